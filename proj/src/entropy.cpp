#include "topent/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <set>
#include <thread>

namespace topent {

const char* count_mode_name(CountMode mode) {
  switch (mode) {
    case CountMode::Separated:
      return "separated";
    case CountMode::SpanningInLambda:
      return "spanning-in-lambda";
    case CountMode::SpanningInX:
      return "spanning-in-x";
    case CountMode::Cover:
      return "cover";
  }
  return "?";
}

std::vector<Eigen::Index> all_indices(const SpaceSample& space) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(space.count()));
  for (Eigen::Index i = 0; i < space.count(); ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

double bowen_distance(const MapSequence& seq, const SpaceSample& space,
                      const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y, long n, long base_index) {
  if (n < 1) throw InvalidArgument("bowen_distance: n must be >= 1");
  Eigen::VectorXd a = x;
  Eigen::VectorXd b = y;
  double dist = distance(space, a, b);
  for (long j = 1; j < n; ++j) {
    seq.apply_in_place(base_index + j - 1, a.data());
    seq.apply_in_place(base_index + j - 1, b.data());
    dist = std::max(dist, distance(space, a, b));
  }
  return dist;
}

OrbitTable::OrbitTable(const MapSequence& seq, const SpaceSample& space,
                       const std::vector<Eigen::Index>& points, long base_index, long steps)
    : axes_(space.axes()), index_of_(points), steps_(steps) {
  if (steps < 1) throw InvalidArgument("orbit table needs at least one step");
  if (points.empty()) throw InvalidArgument("orbit table needs at least one point");
  if (seq.dim() != space.dim()) throw InvalidArgument("sequence/space dimension mismatch");
  const Eigen::Index m = static_cast<Eigen::Index>(points.size());
  const Eigen::Index d = space.dim();
  per_step_.reserve(static_cast<std::size_t>(steps));
  Eigen::MatrixXd cur(m, d);
  for (Eigen::Index r = 0; r < m; ++r) cur.row(r) = space.points().row(points[static_cast<std::size_t>(r)]);
  per_step_.push_back(cur);
  for (long j = 1; j < steps; ++j) {
    for (Eigen::Index r = 0; r < m; ++r) {
      Eigen::RowVectorXd row = cur.row(r);
      seq.apply_in_place(base_index + j - 1, row.data());
      cur.row(r) = row;
    }
    per_step_.push_back(cur);
  }
}

double OrbitTable::bowen(Eigen::Index a, Eigen::Index b, long n, double stop_at) const {
  double best = 0.0;
  const std::size_t dims = axes_.size();
  for (long j = 0; j < n; ++j) {
    const Eigen::MatrixXd& step = per_step_[static_cast<std::size_t>(j)];
    for (std::size_t d = 0; d < dims; ++d) {
      double dist = axis_distance(axes_[d], step(a, static_cast<Eigen::Index>(d)),
                                  step(b, static_cast<Eigen::Index>(d)));
      if (dist > best) {
        best = dist;
        if (best >= stop_at) return best;
      }
    }
  }
  return best;
}

Eigen::VectorXd OrbitTable::value(Eigen::Index point, long step) const {
  return per_step_[static_cast<std::size_t>(step)].row(point).transpose();
}

namespace {

std::vector<Eigen::Index> greedy_separated(const OrbitTable& table, long n, double eps) {
  std::vector<Eigen::Index> kept;
  const Eigen::Index m = table.point_count();
  for (Eigen::Index c = 0; c < m; ++c) {
    bool ok = true;
    // most recently kept points are spatial neighbors: likely violators first
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      if (table.bowen(c, *it, n, eps) < eps) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c);
  }
  return kept;
}

// maximum pairwise-separated subset by branch and bound over <= 20 points
class MaxSeparatedSearch {
 public:
  MaxSeparatedSearch(const OrbitTable& table, long n, double eps) : m_(table.point_count()) {
    conflict_.resize(static_cast<std::size_t>(m_), 0);
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (Eigen::Index j = i + 1; j < m_; ++j) {
        if (table.bowen(i, j, n, eps) < eps) {
          conflict_[static_cast<std::size_t>(i)] |= (1u << j);
          conflict_[static_cast<std::size_t>(j)] |= (1u << i);
        }
      }
    }
  }

  std::vector<Eigen::Index> run() {
    best_.clear();
    choose(0, 0u, {});
    return best_;
  }

 private:
  void choose(Eigen::Index pos, std::uint32_t chosen_mask, std::vector<Eigen::Index> chosen) {
    if (chosen.size() + static_cast<std::size_t>(m_ - pos) <= best_.size()) return;
    if (pos == m_) {
      if (chosen.size() > best_.size()) best_ = chosen;
      return;
    }
    if ((conflict_[static_cast<std::size_t>(pos)] & chosen_mask) == 0) {
      auto with = chosen;
      with.push_back(pos);
      choose(pos + 1, chosen_mask | (1u << pos), std::move(with));
    }
    choose(pos + 1, chosen_mask, std::move(chosen));
  }

  Eigen::Index m_;
  std::vector<std::uint32_t> conflict_;
  std::vector<Eigen::Index> best_;
};

using Mask = std::uint64_t;

long greedy_set_cover(const std::vector<Mask>& sets, Mask universe,
                      std::vector<std::size_t>* picked_out) {
  Mask covered = 0;
  long used = 0;
  std::vector<std::size_t> picked;
  while (covered != universe) {
    std::size_t best = sets.size();
    int best_gain = -1;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      int gain = __builtin_popcountll(sets[s] & universe & ~covered);
      if (gain > best_gain) {
        best_gain = gain;
        best = s;
      }
    }
    if (best_gain <= 0) throw UncoveredPoint("set cover: point not covered by any set");
    covered |= sets[best] & universe;
    picked.push_back(best);
    ++used;
  }
  if (picked_out) *picked_out = std::move(picked);
  return used;
}

class MinCoverSearch {
 public:
  MinCoverSearch(const std::vector<Mask>& sets, Mask universe) : sets_(sets), universe_(universe) {}

  long run(std::vector<std::size_t>* picked_out) {
    best_count_ = greedy_set_cover(sets_, universe_, &best_picked_);
    std::vector<std::size_t> chosen;
    descend(0, chosen);
    if (picked_out) *picked_out = best_picked_;
    return best_count_;
  }

 private:
  void descend(Mask covered, std::vector<std::size_t>& chosen) {
    if (covered == universe_) {
      if (static_cast<long>(chosen.size()) < best_count_) {
        best_count_ = static_cast<long>(chosen.size());
        best_picked_ = chosen;
      }
      return;
    }
    if (static_cast<long>(chosen.size()) + 1 >= best_count_) return;
    // branch on the lowest uncovered element
    Mask uncovered = universe_ & ~covered;
    int element = __builtin_ctzll(uncovered);
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      if (sets_[s] & (Mask{1} << element)) {
        chosen.push_back(s);
        descend(covered | (sets_[s] & universe_), chosen);
        chosen.pop_back();
      }
    }
  }

  const std::vector<Mask>& sets_;
  Mask universe_;
  long best_count_ = 0;
  std::vector<std::size_t> best_picked_;
};

}  // namespace

std::vector<Eigen::Index> max_separated(const SpaceSample& space, const MapSequence& seq,
                                        const std::vector<Eigen::Index>& lambda, long n, double eps,
                                        Exactness exactness, long base_index) {
  if (lambda.empty()) throw InvalidArgument("max_separated: empty point set");
  if (!(eps > 0.0)) throw InvalidArgument("max_separated: eps must be positive");
  if (n < 1) throw InvalidArgument("max_separated: n must be >= 1");
  OrbitTable table(seq, space, lambda, base_index, n);
  std::vector<Eigen::Index> local;
  if (exactness == Exactness::Greedy) {
    local = greedy_separated(table, n, eps);
  } else {
    if (static_cast<Eigen::Index>(lambda.size()) > kExactOracleCap) {
      throw OracleTooLarge("exact separated search capped at " + std::to_string(kExactOracleCap) +
                           " points");
    }
    local = MaxSeparatedSearch(table, n, eps).run();
  }
  std::vector<Eigen::Index> out;
  out.reserve(local.size());
  for (Eigen::Index i : local) out.push_back(lambda[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<Eigen::Index> min_spanning(const SpaceSample& space, const MapSequence& seq,
                                       const std::vector<Eigen::Index>& lambda, long n, double eps,
                                       Ambient ambient, Exactness exactness, long base_index) {
  if (lambda.empty()) throw InvalidArgument("min_spanning: empty point set");
  if (!(eps > 0.0)) throw InvalidArgument("min_spanning: eps must be positive");
  if (n < 1) throw InvalidArgument("min_spanning: n must be >= 1");

  const std::vector<Eigen::Index> pool =
      ambient == Ambient::Lambda ? lambda : all_indices(space);
  if (lambda.size() > 64) {
    throw OracleTooLarge("spanning counts use 64-bit coverage masks; |lambda| <= 64");
  }
  if (exactness == Exactness::Exact &&
      static_cast<Eigen::Index>(pool.size()) > kExactOracleCap) {
    throw OracleTooLarge("exact spanning search capped at " + std::to_string(kExactOracleCap) +
                         " candidate centers");
  }

  // one table holding the pool first, then lambda (indices may repeat; rows
  // are independent)
  std::vector<Eigen::Index> tracked = pool;
  tracked.insert(tracked.end(), lambda.begin(), lambda.end());
  OrbitTable table(seq, space, tracked, base_index, n);
  const Eigen::Index pool_count = static_cast<Eigen::Index>(pool.size());

  std::vector<Mask> sets(pool.size(), 0);
  for (std::size_t c = 0; c < pool.size(); ++c) {
    for (std::size_t p = 0; p < lambda.size(); ++p) {
      double d = table.bowen(static_cast<Eigen::Index>(c),
                             pool_count + static_cast<Eigen::Index>(p), n, eps);
      if (d < eps) sets[c] |= Mask{1} << p;
    }
  }
  Mask universe = lambda.size() == 64 ? ~Mask{0} : ((Mask{1} << lambda.size()) - 1);

  std::vector<std::size_t> picked;
  if (exactness == Exactness::Greedy) {
    greedy_set_cover(sets, universe, &picked);
  } else {
    MinCoverSearch(sets, universe).run(&picked);
  }
  std::vector<Eigen::Index> out;
  out.reserve(picked.size());
  for (std::size_t s : picked) out.push_back(pool[s]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Ball> orbit_ball_cover(const SpaceSample& space, const MapSequence& seq,
                                   const std::vector<Eigen::Index>& lambda, long n, double eps,
                                   long base_index) {
  if (!(eps > 0.0)) throw InvalidArgument("orbit_ball_cover: eps must be positive");
  OrbitTable table(seq, space, lambda, base_index, n);
  std::set<std::vector<double>> seen;
  std::vector<Ball> cover;
  for (long j = 0; j < n; ++j) {
    for (Eigen::Index p = 0; p < table.point_count(); ++p) {
      Eigen::VectorXd center = table.value(p, j);
      std::vector<double> key(center.data(), center.data() + center.size());
      if (seen.insert(std::move(key)).second) {
        cover.push_back(Ball{std::move(center), eps});
      }
    }
  }
  return cover;
}

long cover_join_count(const SpaceSample& space, const std::vector<Ball>& cover,
                      const MapSequence& seq, const std::vector<Eigen::Index>& lambda, long n,
                      Exactness exactness, long base_index) {
  if (cover.empty()) throw InvalidArgument("cover_join_count: empty cover");
  if (lambda.empty()) throw InvalidArgument("cover_join_count: empty point set");
  if (n < 1) throw InvalidArgument("cover_join_count: n must be >= 1");
  if (lambda.size() > 64) throw OracleTooLarge("cover joins use 64-bit masks; |lambda| <= 64");
  if (exactness == Exactness::Exact &&
      static_cast<Eigen::Index>(lambda.size()) > kExactOracleCap) {
    throw OracleTooLarge("exact subcover search capped at " + std::to_string(kExactOracleCap) +
                         " points");
  }

  OrbitTable table(seq, space, lambda, base_index, n);
  Mask universe = lambda.size() == 64 ? ~Mask{0} : ((Mask{1} << lambda.size()) - 1);

  // members of the pullback f^{-j}(B) among lambda, per depth and ball
  std::vector<std::vector<Mask>> level(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    auto& masks = level[static_cast<std::size_t>(j)];
    masks.assign(cover.size(), 0);
    Mask any = 0;
    for (std::size_t b = 0; b < cover.size(); ++b) {
      if (cover[b].center.size() != space.dim()) {
        throw InvalidArgument("cover_join_count: ball dimension mismatch");
      }
      for (std::size_t p = 0; p < lambda.size(); ++p) {
        Eigen::VectorXd v = table.value(static_cast<Eigen::Index>(p), j);
        double d = 0.0;
        for (Eigen::Index axis = 0; axis < space.dim(); ++axis) {
          d = std::max(d, axis_distance(space.axes()[static_cast<std::size_t>(axis)], v[axis],
                                        cover[b].center[axis]));
        }
        if (d < cover[b].radius) masks[b] |= Mask{1} << p;
      }
      any |= masks[b];
    }
    if ((any & universe) != universe) {
      throw UncoveredPoint("cover_join_count: a point leaves the cover at depth " +
                           std::to_string(j));
    }
  }

  // distinct nonempty join elements, built level by level
  std::set<Mask> elements(level[0].begin(), level[0].end());
  elements.erase(0);
  for (long j = 1; j < n; ++j) {
    std::set<Mask> next;
    for (Mask m : elements) {
      for (Mask lm : level[static_cast<std::size_t>(j)]) {
        Mask inter = m & lm;
        if (inter) next.insert(inter);
      }
    }
    elements = std::move(next);
    if (elements.size() > 200000) {
      throw OracleTooLarge("cover join grew past 200000 distinct elements");
    }
  }

  // only maximal elements can appear in a minimal subcover
  std::vector<Mask> sets(elements.begin(), elements.end());
  std::vector<Mask> maximal;
  for (Mask m : sets) {
    bool dominated = false;
    for (Mask other : sets) {
      if (other != m && (m & other) == m) {
        dominated = true;
        break;
      }
    }
    if (!dominated) maximal.push_back(m);
  }

  if (exactness == Exactness::Greedy) return greedy_set_cover(maximal, universe, nullptr);
  return MinCoverSearch(maximal, universe).run(nullptr);
}

SeparationCurve separation_curve(const SpaceSample& space, const MapSequence& seq,
                                 const std::vector<Eigen::Index>& lambda, CountMode mode,
                                 Exactness exactness, double eps, long n_lo, long n_hi,
                                 long base_index) {
  if (n_lo < 1 || n_hi < n_lo) throw InvalidArgument("separation_curve: bad depth range");
  SeparationCurve curve;
  curve.epsilon = eps;
  curve.mode = mode;
  curve.exactness = exactness;
  for (long n = n_lo; n <= n_hi; ++n) {
    long count = 0;
    switch (mode) {
      case CountMode::Separated:
        count = static_cast<long>(
            max_separated(space, seq, lambda, n, eps, exactness, base_index).size());
        break;
      case CountMode::SpanningInLambda:
        count = static_cast<long>(
            min_spanning(space, seq, lambda, n, eps, Ambient::Lambda, exactness, base_index)
                .size());
        break;
      case CountMode::SpanningInX:
        count = static_cast<long>(
            min_spanning(space, seq, lambda, n, eps, Ambient::FullSample, exactness, base_index)
                .size());
        break;
      case CountMode::Cover: {
        auto cover = orbit_ball_cover(space, seq, lambda, n, eps, base_index);
        count = cover_join_count(space, cover, seq, lambda, n, exactness, base_index);
        break;
      }
    }
    curve.n_values.push_back(n);
    curve.counts.push_back(count);
  }
  return curve;
}

RateFit growth_rate(const SeparationCurve& curve, long window_lo, long window_hi) {
  if (curve.n_values.empty()) throw InvalidArgument("growth_rate: empty curve");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
    long n = curve.n_values[i];
    if (n < window_lo || n > window_hi) continue;
    if (curve.counts[i] < 1) throw InvalidArgument("growth_rate: nonpositive count");
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(static_cast<double>(curve.counts[i])));
  }
  if (xs.size() < 3) throw InvalidArgument("growth_rate: window must contain >= 3 depths");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  RateFit fit;
  fit.rate = sxy / sxx;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double pred = my + fit.rate * (xs[i] - mx);
    ss += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.residual = std::sqrt(ss / static_cast<double>(xs.size()));
  return fit;
}

namespace {

// per-depth expansion bound per axis: L_n = max over prefix lengths j < n of
// the product of per-step slope bounds
std::vector<Eigen::VectorXd> expansion_bounds(const MapSequence& seq, long base_index, long n_hi) {
  const Eigen::Index d = seq.dim();
  std::vector<Eigen::VectorXd> bound(static_cast<std::size_t>(n_hi) + 1);
  Eigen::VectorXd running = Eigen::VectorXd::Ones(d);
  Eigen::VectorXd best = running;
  bound[0] = best;
  for (long n = 1; n <= n_hi; ++n) {
    bound[static_cast<std::size_t>(n)] = best;  // prefixes j <= n-1
    running = running.cwiseProduct(seq.axis_max_slopes(base_index + n - 1));
    best = best.cwiseMax(running);
  }
  return bound;
}

EpsilonReport analyze_epsilon(const SpaceSample& space, const SeparationCurve& curve,
                              const std::vector<Eigen::VectorXd>& expansion,
                              std::size_t lambda_size, long req_lo, long req_hi,
                              const EstimateOptions& options) {
  EpsilonReport report;
  report.epsilon = curve.epsilon;
  report.curve = curve;

  const double sat_cut = options.saturation_fraction * static_cast<double>(lambda_size);
  std::vector<long> valid;
  for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
    long n = curve.n_values[i];
    bool saturated = static_cast<double>(curve.counts[i]) >= sat_cut;
    bool limited = false;
    const Eigen::VectorXd& l = expansion[static_cast<std::size_t>(n)];
    for (Eigen::Index axis = 0; axis < space.dim(); ++axis) {
      if (curve.epsilon <
          options.resolution_factor * space.axis_mesh()[axis] * l[axis]) {
        limited = true;
        break;
      }
    }
    report.saturated.push_back(saturated);
    report.resolution_limited.push_back(limited);
    report.saturation_seen |= saturated;
    if (!saturated && !limited) valid.push_back(n);
  }

  auto fit_over = [&](const std::vector<long>& depths) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
      if (std::find(depths.begin(), depths.end(), curve.n_values[i]) == depths.end()) continue;
      xs.push_back(static_cast<double>(curve.n_values[i]));
      ys.push_back(std::log(static_cast<double>(curve.counts[i])));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    RateFit fit;
    fit.rate = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.window_lo = static_cast<long>(xs.front());
    fit.window_hi = static_cast<long>(xs.back());
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double pred = my + fit.rate * (xs[i] - mx);
      ss += (ys[i] - pred) * (ys[i] - pred);
    }
    fit.residual = std::sqrt(ss / static_cast<double>(xs.size()));
    return fit;
  };

  std::vector<long> in_window;
  for (long n : valid) {
    if (n >= req_lo && n <= req_hi) in_window.push_back(n);
  }
  if (in_window.size() >= 3) {
    report.fit = fit_over(in_window);
  } else if (valid.size() >= 3) {
    report.fit = fit_over(valid);
    report.window_fallback = true;
  } else {
    // nothing resolvable: fit the smallest depths and flag hard
    std::vector<long> first;
    for (long n : curve.n_values) {
      first.push_back(n);
      if (first.size() == 3) break;
    }
    report.fit = fit_over(first);
    report.window_fallback = true;
    report.resolution_exhausted = true;
  }
  return report;
}

}  // namespace

EntropyEstimate entropy_estimate(const SpaceSample& space, const MapSequence& seq,
                                 const std::vector<Eigen::Index>& lambda,
                                 const std::vector<double>& eps_schedule, long n_lo, long n_hi,
                                 const EstimateOptions& options) {
  if (lambda.empty()) throw InvalidArgument("entropy_estimate: empty point set");
  if (eps_schedule.empty()) throw InvalidArgument("entropy_estimate: empty epsilon schedule");
  for (std::size_t i = 1; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] < eps_schedule[i - 1])) {
      throw InvalidArgument("entropy_estimate: epsilon schedule must be strictly decreasing");
    }
  }
  if (n_lo < 1 || n_hi < n_lo) throw InvalidArgument("entropy_estimate: bad depth range");
  if (n_hi < 3) throw InvalidArgument("entropy_estimate: need depth range reaching at least 3");
  const double eps_min = eps_schedule.back();
  if (eps_min < options.resolution_factor * space.mesh()) {
    throw ResolutionViolation("entropy_estimate: smallest epsilon " + std::to_string(eps_min) +
                              " below " + std::to_string(options.resolution_factor) +
                              " * mesh = " +
                              std::to_string(options.resolution_factor * space.mesh()));
  }

  long req_lo = options.window_lo;
  long req_hi = options.window_hi;
  if (req_lo == 0 && req_hi == 0) {
    req_lo = std::max<long>(1, n_hi / 2);
    req_hi = n_hi;
  }
  if (req_lo < 1 || req_hi < req_lo || req_hi > n_hi) {
    throw InvalidArgument("entropy_estimate: fit window outside depth range");
  }

  auto expansion = expansion_bounds(seq, options.base_index, n_hi);

  EntropyEstimate estimate;
  estimate.method = options.mode;
  estimate.n_lo = n_lo;
  estimate.n_hi = n_hi;
  estimate.per_epsilon.resize(eps_schedule.size());

  // per-epsilon curves are independent; run them on worker threads and
  // assemble by schedule order so results are deterministic
  std::vector<std::exception_ptr> errors(eps_schedule.size());
  auto work = [&](std::size_t slot) {
    try {
      SeparationCurve curve =
          separation_curve(space, seq, lambda, options.mode, options.exactness,
                           eps_schedule[slot], 1, n_hi, options.base_index);
      estimate.per_epsilon[slot] =
          analyze_epsilon(space, curve, expansion, lambda.size(), req_lo, req_hi, options);
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  if (eps_schedule.size() == 1) {
    work(0);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(eps_schedule.size());
    for (std::size_t slot = 0; slot < eps_schedule.size(); ++slot) {
      workers.emplace_back(work, slot);
    }
    for (auto& w : workers) w.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  const EpsilonReport& head = estimate.per_epsilon.back();
  estimate.value = std::max(0.0, head.fit.rate);
  estimate.epsilon_used = head.epsilon;
  estimate.mesh_over_epsilon = space.mesh() / head.epsilon;
  return estimate;
}

long sup_separated(const SpaceSample& space, const MapSequence& seq,
                   const std::vector<Eigen::Index>& lambda, long n, double eps, long i_max,
                   Exactness exactness) {
  if (i_max < 0) throw InvalidArgument("sup_separated: i_max must be >= 0");
  if (lambda.empty()) throw InvalidArgument("sup_separated: empty point set");
  if (n < 1) throw InvalidArgument("sup_separated: n must be >= 1");

  std::vector<OrbitTable> tables;
  tables.reserve(static_cast<std::size_t>(i_max) + 1);
  for (long i = 0; i <= i_max; ++i) tables.emplace_back(seq, space, lambda, i, n);

  auto separated = [&](Eigen::Index a, Eigen::Index b) {
    for (const OrbitTable& t : tables) {
      if (t.bowen(a, b, n, eps) >= eps) return true;
    }
    return false;
  };

  const Eigen::Index m = static_cast<Eigen::Index>(lambda.size());
  if (exactness == Exactness::Greedy) {
    std::vector<Eigen::Index> kept;
    for (Eigen::Index c = 0; c < m; ++c) {
      bool ok = true;
      for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
        if (!separated(c, *it)) {
          ok = false;
          break;
        }
      }
      if (ok) kept.push_back(c);
    }
    return static_cast<long>(kept.size());
  }

  if (m > kExactOracleCap) {
    throw OracleTooLarge("exact sup-separated search capped at " +
                         std::to_string(kExactOracleCap) + " points");
  }
  // reuse the branch-and-bound by building a conflict table over the bases
  std::vector<std::uint32_t> conflict(static_cast<std::size_t>(m), 0);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (!separated(i, j)) {
        conflict[static_cast<std::size_t>(i)] |= (1u << j);
        conflict[static_cast<std::size_t>(j)] |= (1u << i);
      }
    }
  }
  std::vector<Eigen::Index> best;
  std::vector<Eigen::Index> chosen;
  std::function<void(Eigen::Index, std::uint32_t)> descend = [&](Eigen::Index pos,
                                                                 std::uint32_t mask) {
    if (chosen.size() + static_cast<std::size_t>(m - pos) <= best.size()) return;
    if (pos == m) {
      if (chosen.size() > best.size()) best = chosen;
      return;
    }
    if ((conflict[static_cast<std::size_t>(pos)] & mask) == 0) {
      chosen.push_back(pos);
      descend(pos + 1, mask | (1u << pos));
      chosen.pop_back();
    }
    descend(pos + 1, mask);
  };
  descend(0, 0);
  return static_cast<long>(best.size());
}

std::vector<std::pair<long, EntropyEstimate>> tail_entropy(
    const SpaceSample& space, const MapSequence& seq, const std::vector<Eigen::Index>& lambda,
    const std::vector<double>& eps_schedule, long n_lo, long n_hi,
    const std::vector<long>& i_list, const EstimateOptions& options) {
  for (std::size_t k = 1; k < i_list.size(); ++k) {
    if (i_list[k] <= i_list[k - 1]) throw InvalidArgument("tail_entropy: i_list must ascend");
  }
  std::vector<std::pair<long, EntropyEstimate>> out;
  out.reserve(i_list.size());
  for (long i : i_list) {
    MapSequence tail = shift_system(seq, i);
    out.emplace_back(i, entropy_estimate(space, tail, lambda, eps_schedule, n_lo, n_hi, options));
  }
  return out;
}

}  // namespace topent
