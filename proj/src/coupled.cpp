#include "topent/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace topent {

PartitionSets make_partition(std::vector<Interval> sets, bool require_strict) {
  if (sets.empty()) throw InvalidArgument("partition needs at least one set");
  for (const Interval& iv : sets) {
    if (!(iv.lo <= iv.hi)) throw InvalidArgument("partition set is empty");
    if (iv.lo < 0.0 || iv.hi > 1.0) throw InvalidArgument("partition set leaves [0,1]");
  }
  std::vector<Interval> sorted = sets;
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].lo < sorted[i - 1].hi) {
      throw InvalidArgument("partition interiors overlap");
    }
    if (require_strict && !(sorted[i].lo > sorted[i - 1].hi)) {
      throw InvalidArgument("strict partition requires disjoint closures");
    }
  }
  PartitionSets partition;
  partition.sets = std::move(sets);
  partition.strict = require_strict;
  return partition;
}

namespace {

void require_one_dimensional(const MapSequence& seq, const char* who) {
  if (seq.dim() != 1) throw UnsupportedMap(std::string(who) + ": needs a one-dimensional system");
}

IntervalSet layered_image(const std::vector<MapPrimitive>& layers, IntervalSet set) {
  for (const MapPrimitive& layer : layers) set = layer.image(set);
  return set;
}

IntervalSet layered_preimage(const std::vector<MapPrimitive>& layers, IntervalSet set) {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) set = it->preimage(set);
  return set;
}

IntervalSet admissible_union(const PartitionSets& partition, const TransitionMatrix& matrix,
                             int i) {
  IntervalSet target;
  for (Eigen::Index j = 0; j < matrix.size(); ++j) {
    if (matrix(i - 1, j) == 1) {
      target = unite(target, IntervalSet(partition.sets[static_cast<std::size_t>(j)]));
    }
  }
  return target;
}

std::pair<std::pair<long, long>, bool> resolve_range(const MapSequence& seq,
                                                     std::optional<std::pair<long, long>> n_range) {
  if (n_range) {
    if (n_range->first < 0 || n_range->second < n_range->first) {
      throw InvalidArgument("coupled expansion: bad index range");
    }
    long period = seq.period_hint();
    bool complete = period > 0 && n_range->second - n_range->first + 1 >= period;
    return {*n_range, complete};
  }
  long period = seq.period_hint();
  if (period > 0) return {{0, period - 1}, true};
  return {{0, 64}, false};
}

}  // namespace

CoupledExpansionCertificate verify_coupled_expansion(const MapSequence& seq,
                                                     const PartitionSets& partition,
                                                     const TransitionMatrix& matrix,
                                                     std::optional<std::pair<long, long>> n_range,
                                                     bool equality_mode) {
  require_one_dimensional(seq, "verify_coupled_expansion");
  if (!seq.has_layers()) {
    throw UnsupportedMap("verify_coupled_expansion: system lacks monotone-branch data");
  }
  if (partition.sets.size() != static_cast<std::size_t>(matrix.size())) {
    throw InvalidArgument("partition size must match the matrix dimension");
  }

  auto [range, complete] = resolve_range(seq, n_range);
  CoupledExpansionCertificate cert{matrix, partition, 0, 0, false, false, {}, {}, false,
                                   std::nullopt, std::nullopt, std::nullopt};
  cert.n_lo = range.first;
  cert.n_hi = range.second;
  cert.range_complete = complete;
  cert.equality_mode = equality_mode;
  cert.all_hold = true;

  for (long n = range.first; n <= range.second; ++n) {
    std::vector<MapPrimitive> layers = seq.layers(n);
    for (int i = 1; i <= static_cast<int>(matrix.size()); ++i) {
      IntervalSet image =
          layered_image(layers, IntervalSet(partition.sets[static_cast<std::size_t>(i - 1)]));
      for (int j = 1; j <= static_cast<int>(matrix.size()); ++j) {
        if (matrix(i - 1, j - 1) != 1) continue;
        bool holds = image.contains(partition.sets[static_cast<std::size_t>(j - 1)]);
        cert.verdicts.push_back({n, i, j, holds});
        cert.all_hold &= holds;
      }
      if (equality_mode) {
        IntervalSet target = admissible_union(partition, matrix, i);
        bool holds = image == target;
        cert.equality.push_back({n, i, holds});
        cert.all_hold &= holds;
      }
    }
  }
  if (cert.all_hold) cert.lower_bound = shift_entropy(matrix);
  return cert;
}

SymbolWord itinerary(const MapSequence& seq, double x, const PartitionSets& partition, long n,
                     long base_index) {
  require_one_dimensional(seq, "itinerary");
  if (n < 1) throw InvalidArgument("itinerary: length must be >= 1");
  std::vector<int> symbols;
  symbols.reserve(static_cast<std::size_t>(n));
  double cur = x;
  for (long k = 0; k < n; ++k) {
    int symbol = 0;
    for (std::size_t i = 0; i < partition.sets.size(); ++i) {
      if (partition.sets[i].contains(cur)) {
        symbol = static_cast<int>(i) + 1;  // lower index wins ties
        break;
      }
    }
    if (symbol == 0) {
      throw OrbitEscape("itinerary: orbit leaves the partition at step " + std::to_string(k), k);
    }
    symbols.push_back(symbol);
    if (k + 1 < n) {
      Eigen::VectorXd v(1);
      v[0] = cur;
      seq.apply_in_place(base_index + k, v.data());
      cur = v[0];
    }
  }
  return SymbolWord{std::move(symbols)};
}

IntervalSet pullback_cylinder(const MapSequence& seq, const PartitionSets& partition,
                              const SymbolWord& word, long m, long n_start) {
  require_one_dimensional(seq, "pullback_cylinder");
  if (!seq.has_layers()) {
    throw UnsupportedMap("pullback_cylinder: system lacks monotone-branch data");
  }
  if (m < 0) throw InvalidArgument("pullback_cylinder: depth must be >= 0");
  if (static_cast<long>(word.size()) < m + 1) {
    throw InvalidArgument("pullback_cylinder: word shorter than depth + 1");
  }
  for (int s : word.symbols) {
    if (s < 1 || s > static_cast<int>(partition.sets.size())) {
      throw InvalidArgument("pullback_cylinder: symbol outside the partition");
    }
  }

  auto piece = [&](long k) {
    return IntervalSet(partition.sets[static_cast<std::size_t>(word[static_cast<std::size_t>(k)] - 1)]);
  };
  IntervalSet set = piece(m);
  for (long k = m - 1; k >= 0; --k) {
    set = intersect(piece(k), layered_preimage(seq.layers(n_start + k), set));
  }
  return set;
}

PointEstimate point_from_itinerary(const MapSequence& seq, const PartitionSets& partition,
                                   const SymbolWord& word, long depth, long n_start,
                                   double tolerance) {
  IntervalSet cylinder = pullback_cylinder(seq, partition, word, depth, n_start);
  if (cylinder.empty()) {
    throw NoSingletonGuarantee("point_from_itinerary: empty cylinder at depth " +
                               std::to_string(depth));
  }
  double radius = 0.5 * cylinder.diameter();
  if (!(radius <= tolerance)) {
    throw NoSingletonGuarantee("point_from_itinerary: cylinder radius " + std::to_string(radius) +
                               " exceeds tolerance " + std::to_string(tolerance));
  }
  Interval hull = cylinder.hull();
  return PointEstimate{hull.midpoint(), radius};
}

ContractionReport contraction_check(const MapSequence& seq, const PartitionSets& partition,
                                    const TransitionMatrix& matrix, long depth, double eps,
                                    long n_lo, long n_hi, long sample_words,
                                    unsigned long long seed) {
  if (depth < 1) throw InvalidArgument("contraction_check: depth must be >= 1");
  if (!(eps > 0.0)) throw InvalidArgument("contraction_check: eps must be positive");
  if (n_lo < 0 || n_hi < n_lo) throw InvalidArgument("contraction_check: bad index range");
  if (sample_words < 1) throw InvalidArgument("contraction_check: need at least one word");

  std::mt19937_64 rng(seed);
  ContractionReport report;
  report.depth = depth;
  report.epsilon = eps;
  report.seed = seed;

  std::vector<SymbolWord> words;
  words.reserve(static_cast<std::size_t>(sample_words) + static_cast<std::size_t>(matrix.size()));
  // constant words name the fixed-point cylinders, typically the widest ones;
  // include every admissible one before the random sample
  for (int s = 1; s <= static_cast<int>(matrix.size()); ++s) {
    if (matrix(s - 1, s - 1) == 1) {
      words.push_back(SymbolWord{std::vector<int>(static_cast<std::size_t>(depth) + 1, s)});
    }
  }
  for (long w = 0; w < sample_words; ++w) {
    words.push_back(random_admissible_word(matrix, static_cast<std::size_t>(depth) + 1, rng));
  }
  report.words_checked = static_cast<long>(words.size());

  double global_max = 0.0;
  for (long n = n_lo; n <= n_hi; ++n) {
    double local_max = 0.0;
    for (const SymbolWord& word : words) {
      IntervalSet cylinder = pullback_cylinder(seq, partition, word, depth, n);
      local_max = std::max(local_max, cylinder.diameter());
    }
    report.per_n_max.emplace_back(n, local_max);
    global_max = std::max(global_max, local_max);
  }
  report.max_diameter = global_max;
  report.pass = global_max < eps;
  return report;
}

std::pair<double, std::optional<double>> entropy_bounds(
    const CoupledExpansionCertificate& certificate) {
  if (!certificate.all_hold || !certificate.lower_bound) {
    throw NoBound("entropy_bounds: cover conditions failed; no bound available");
  }
  std::optional<double> upper;
  if (certificate.contraction && certificate.contraction->pass) {
    upper = certificate.upper_bound ? certificate.upper_bound : certificate.lower_bound;
  }
  return {*certificate.lower_bound, upper};
}

CoupledExpansionCertificate certify(const MapSequence& seq, const PartitionSets& partition,
                                    const TransitionMatrix& matrix,
                                    std::optional<std::pair<long, long>> n_range,
                                    bool equality_mode, long depth, double contraction_eps,
                                    long sample_words, unsigned long long seed) {
  CoupledExpansionCertificate cert =
      verify_coupled_expansion(seq, partition, matrix, n_range, equality_mode);
  cert.contraction = contraction_check(seq, partition, matrix, depth, contraction_eps, cert.n_lo,
                                       cert.n_hi, sample_words, seed);
  if (cert.all_hold && cert.contraction->pass) cert.upper_bound = cert.lower_bound;
  return cert;
}

double semiconjugacy_residual(const MapSequence& seq_f, const MapSequence& seq_g,
                              const ConjugacyMaps& h, const SpaceSample& target_space,
                              const Eigen::MatrixXd& sample_points, long n_steps) {
  if (n_steps < 1) throw InvalidArgument("semiconjugacy_residual: need at least one step");
  if (sample_points.rows() == 0) throw InvalidArgument("semiconjugacy_residual: empty sample");
  if (sample_points.cols() != seq_f.dim()) {
    throw InvalidArgument("semiconjugacy_residual: sample dimension mismatch");
  }
  double residual = 0.0;
  for (Eigen::Index r = 0; r < sample_points.rows(); ++r) {
    Eigen::VectorXd x = sample_points.row(r).transpose();
    for (long n = 0; n < n_steps; ++n) {
      Eigen::VectorXd fx = seq_f.apply(n, x);
      Eigen::VectorXd lhs = h(n + 1, fx);
      Eigen::VectorXd rhs = seq_g.apply(n, h(n, x));
      if (lhs.size() != target_space.dim() || rhs.size() != target_space.dim()) {
        throw InvalidArgument("semiconjugacy_residual: conjugacy map dimension mismatch");
      }
      residual = std::max(residual, distance(target_space, lhs, rhs));
      x = fx;
    }
  }
  return residual;
}

}  // namespace topent
