#include "topent/systems.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace topent {

namespace {

std::string fmt_param(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void check_unit_value(double y, const std::string& who) {
  if (y < -1e-9 || y > 1.0 + 1e-9) {
    throw InvalidArgument(who + ": branch image leaves [0,1]");
  }
}

}  // namespace

double Branch::eval(double x) const {
  switch (kind) {
    case Kind::Affine:
      return a * x + b;
    case Kind::LogisticUp:
    case Kind::LogisticDown:
      return a * x * (1.0 - x);
  }
  return 0.0;
}

double Branch::inverse(double y) const {
  switch (kind) {
    case Kind::Affine:
      return (y - b) / a;
    case Kind::LogisticUp:
    case Kind::LogisticDown: {
      double arg = 1.0 - 4.0 * y / a;
      arg = std::max(arg, 0.0);  // clip fp overshoot at the vertex
      double root = std::sqrt(arg);
      return kind == Kind::LogisticUp ? 0.5 * (1.0 - root) : 0.5 * (1.0 + root);
    }
  }
  return 0.0;
}

bool Branch::increasing() const {
  switch (kind) {
    case Kind::Affine:
      return a > 0.0;
    case Kind::LogisticUp:
      return true;
    case Kind::LogisticDown:
      return false;
  }
  return true;
}

double Branch::max_slope() const {
  switch (kind) {
    case Kind::Affine:
      return std::abs(a);
    case Kind::LogisticUp:
    case Kind::LogisticDown:
      // |f'| = r|1-2x|, maximal at the domain endpoint farther from 1/2
      return a * std::max(std::abs(1.0 - 2.0 * lo), std::abs(1.0 - 2.0 * hi));
  }
  return 0.0;
}

Interval Branch::image() const {
  double u = eval(lo);
  double v = eval(hi);
  return {std::min(u, v), std::max(u, v)};
}

double MapPrimitive::eval(double x) const {
  // tolerate 1-ulp overshoot from upstream float arithmetic
  if (x < 0.0 || x > 1.0) {
    if (x >= -1e-12 && x <= 1.0 + 1e-12) {
      x = std::clamp(x, 0.0, 1.0);
    } else {
      throw InvalidArgument(name + ": point outside [0,1]");
    }
  }
  for (const Branch& br : branches) {
    if (x <= br.hi) return br.eval(x);  // lower-index branch wins at shared breakpoints
  }
  return branches.back().eval(x);
}

IntervalSet MapPrimitive::image(const Interval& iv) const {
  std::vector<Interval> out;
  for (const Branch& br : branches) {
    double lo = std::max(iv.lo, br.lo);
    double hi = std::min(iv.hi, br.hi);
    if (lo <= hi) {
      double u = br.eval(lo);
      double v = br.eval(hi);
      // interior vertex of a logistic branch clipped at 1/2 is an endpoint of
      // the clipped domain, so endpoint images suffice
      out.push_back({std::min(u, v), std::max(u, v)});
    }
  }
  return IntervalSet::from_parts(std::move(out));
}

IntervalSet MapPrimitive::image(const IntervalSet& set) const {
  IntervalSet acc;
  for (const Interval& iv : set.parts()) acc = unite(acc, image(iv));
  return acc;
}

IntervalSet MapPrimitive::preimage(const Interval& iv) const {
  std::vector<Interval> out;
  for (const Branch& br : branches) {
    Interval im = br.image();
    double lo = std::max(iv.lo, im.lo);
    double hi = std::min(iv.hi, im.hi);
    if (lo <= hi) {
      double u = br.inverse(lo);
      double v = br.inverse(hi);
      if (u > v) std::swap(u, v);
      u = std::max(u, br.lo);
      v = std::min(v, br.hi);
      if (u <= v) out.push_back({u, v});
    }
  }
  return IntervalSet::from_parts(std::move(out));
}

IntervalSet MapPrimitive::preimage(const IntervalSet& set) const {
  IntervalSet acc;
  for (const Interval& iv : set.parts()) acc = unite(acc, preimage(iv));
  return acc;
}

double MapPrimitive::max_slope() const {
  double s = 0.0;
  for (const Branch& br : branches) s = std::max(s, br.max_slope());
  return s;
}

namespace {

MapPrimitive validate_primitive(MapPrimitive p) {
  if (p.branches.empty()) throw InvalidArgument(p.name + ": no branches");
  if (p.branches.front().lo != 0.0 || p.branches.back().hi != 1.0) {
    throw InvalidArgument(p.name + ": branches must cover [0,1]");
  }
  for (std::size_t i = 0; i < p.branches.size(); ++i) {
    const Branch& br = p.branches[i];
    if (!(br.lo < br.hi)) throw InvalidArgument(p.name + ": degenerate branch domain");
    if (i > 0 && p.branches[i - 1].hi != br.lo) {
      throw InvalidArgument(p.name + ": branch domains must partition [0,1]");
    }
    if (br.kind == Branch::Kind::Affine && br.a == 0.0) {
      throw InvalidArgument(p.name + ": branch must be strictly monotone");
    }
    Interval im = br.image();
    check_unit_value(im.lo, p.name);
    check_unit_value(im.hi, p.name);
  }
  return p;
}

}  // namespace

MapPrimitive identity_map() {
  MapPrimitive p;
  p.name = "identity";
  p.branches = {{Branch::Kind::Affine, 0.0, 1.0, 1.0, 0.0}};
  return validate_primitive(std::move(p));
}

MapPrimitive tent_map(double slope) {
  if (!(slope > 0.0 && slope <= 2.0)) throw InvalidArgument("tent: slope must be in (0,2]");
  MapPrimitive p;
  p.name = "tent(" + fmt_param(slope) + ")";
  p.branches = {{Branch::Kind::Affine, 0.0, 0.5, slope, 0.0},
                {Branch::Kind::Affine, 0.5, 1.0, -slope, slope}};
  return validate_primitive(std::move(p));
}

MapPrimitive doubling_map() {
  MapPrimitive p;
  p.name = "doubling";
  p.circle = true;
  p.branches = {{Branch::Kind::Affine, 0.0, 0.5, 2.0, 0.0},
                {Branch::Kind::Affine, 0.5, 1.0, 2.0, -1.0}};
  return validate_primitive(std::move(p));
}

MapPrimitive logistic_map(double r) {
  if (!(r > 0.0 && r <= 4.0)) throw InvalidArgument("logistic: rate must be in (0,4]");
  MapPrimitive p;
  p.name = "logistic(" + fmt_param(r) + ")";
  p.branches = {{Branch::Kind::LogisticUp, 0.0, 0.5, r, 0.0},
                {Branch::Kind::LogisticDown, 0.5, 1.0, r, 0.0}};
  return validate_primitive(std::move(p));
}

MapPrimitive rotation_map(double alpha) {
  alpha -= std::floor(alpha);
  MapPrimitive p;
  p.name = "rotation(" + fmt_param(alpha) + ")";
  p.circle = true;
  if (alpha == 0.0) {
    p.branches = {{Branch::Kind::Affine, 0.0, 1.0, 1.0, 0.0}};
  } else {
    p.branches = {{Branch::Kind::Affine, 0.0, 1.0 - alpha, 1.0, alpha},
                  {Branch::Kind::Affine, 1.0 - alpha, 1.0, 1.0, alpha - 1.0}};
  }
  return validate_primitive(std::move(p));
}

MapPrimitive affine_piecewise_map(std::vector<double> breakpoints, std::vector<double> slopes,
                                  std::vector<double> intercepts, bool circle) {
  if (breakpoints.size() < 2 || slopes.size() != breakpoints.size() - 1 ||
      intercepts.size() != slopes.size()) {
    throw InvalidArgument("affine-piecewise: need k+1 breakpoints, k slopes, k intercepts");
  }
  MapPrimitive p;
  p.name = "affine-piecewise";
  p.circle = circle;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    p.branches.push_back(
        {Branch::Kind::Affine, breakpoints[i], breakpoints[i + 1], slopes[i], intercepts[i]});
  }
  return validate_primitive(std::move(p));
}

std::vector<std::string> primitive_names() {
  return {"tent", "doubling", "logistic", "rotation", "identity", "affine-piecewise"};
}

MapPrimitive make_primitive(const std::string& name, const std::map<std::string, double>& params) {
  auto need = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) throw InvalidArgument(name + ": missing parameter '" + key + "'");
    return it->second;
  };
  if (name == "tent") return tent_map(need("slope"));
  if (name == "doubling") return doubling_map();
  if (name == "logistic") return logistic_map(need("r"));
  if (name == "rotation") return rotation_map(need("alpha"));
  if (name == "identity") return identity_map();
  throw InvalidArgument("unknown primitive '" + name + "'");
}

Warp quadratic_warp(double c) {
  if (!(c >= 0.0 && c < 1.0)) throw InvalidArgument("quadratic_warp: c must be in [0,1)");
  Warp w;
  w.name = "quadratic-warp(" + fmt_param(c) + ")";
  w.forward = [c](double x) { return x + c * x * (1.0 - x); };
  if (c == 0.0) {
    w.inverse = [](double y) { return y; };
  } else {
    // solve c x^2 - (1+c) x + y = 0 on [0,1]
    w.inverse = [c](double y) {
      double s = 1.0 + c;
      double disc = s * s - 4.0 * c * y;
      disc = std::max(disc, 0.0);
      return (s - std::sqrt(disc)) / (2.0 * c);
    };
  }
  w.lip_forward = 1.0 + c;
  w.lip_inverse = 1.0 / (1.0 - c);
  return w;
}

// ---------------------------------------------------------------------------
// schedule implementations

namespace detail {

class SeqImpl {
 public:
  virtual ~SeqImpl() = default;
  virtual Eigen::Index dim() const = 0;
  virtual long horizon() const = 0;
  virtual void apply_in_place(long i, double* coords) const = 0;
  virtual void axis_slopes(long i, double* out) const = 0;
  virtual bool has_layers() const { return false; }
  virtual void append_layers(long, std::vector<MapPrimitive>&) const {
    throw UnsupportedMap("sequence does not expose monotone-branch layers");
  }
  virtual long period_hint() const { return 0; }
  virtual std::string describe() const = 0;
};

namespace {

class ScheduleImpl final : public SeqImpl {
 public:
  enum class Kind { Constant, Periodic, Converging };

  ScheduleImpl(Kind kind, std::vector<MapPrimitive> maps, long horizon)
      : kind_(kind), maps_(std::move(maps)), horizon_(horizon) {
    if (horizon_ < 1) throw InvalidArgument("horizon must be positive");
    if (maps_.empty()) throw InvalidArgument("schedule needs at least one map");
  }

  ScheduleImpl(ConvergingFamily family, double target, double c, double q, long horizon)
      : kind_(Kind::Converging),
        family_(family),
        target_(target),
        c_(c),
        q_(q),
        horizon_(horizon) {
    if (horizon_ < 1) throw InvalidArgument("horizon must be positive");
    if (!(c_ >= 0.0) || !(q_ > 0.0)) {
      throw InvalidArgument("converging schedule: need c >= 0 and q > 0");
    }
    maps_.push_back(build_converging(0));  // validates the worst-case parameter
  }

  MapPrimitive map_at(long i) const {
    switch (kind_) {
      case Kind::Constant:
        return maps_[0];
      case Kind::Periodic:
        return maps_[static_cast<std::size_t>(i % static_cast<long>(maps_.size()))];
      case Kind::Converging:
        return build_converging(i);
    }
    return maps_[0];
  }

  Eigen::Index dim() const override { return 1; }
  long horizon() const override { return horizon_; }

  void apply_in_place(long i, double* coords) const override {
    coords[0] = map_at(i).eval(coords[0]);
  }

  void axis_slopes(long i, double* out) const override { out[0] = map_at(i).max_slope(); }

  bool has_layers() const override { return true; }
  void append_layers(long i, std::vector<MapPrimitive>& out) const override {
    out.push_back(map_at(i));
  }

  long period_hint() const override {
    switch (kind_) {
      case Kind::Constant:
        return 1;
      case Kind::Periodic:
        return static_cast<long>(maps_.size());
      case Kind::Converging:
        return 0;
    }
    return 0;
  }

  std::string describe() const override {
    switch (kind_) {
      case Kind::Constant:
        return "constant " + maps_[0].name;
      case Kind::Periodic: {
        std::string s = "periodic [";
        for (std::size_t i = 0; i < maps_.size(); ++i) {
          if (i) s += ", ";
          s += maps_[i].name;
        }
        return s + "]";
      }
      case Kind::Converging:
        return "converging " + family_name() + " target=" + fmt_param(target_) +
               " c=" + fmt_param(c_) + " q=" + fmt_param(q_);
    }
    return "";
  }

 private:
  MapPrimitive build_converging(long i) const {
    double param = target_ - c_ / std::pow(static_cast<double>(i + 1), q_);
    switch (family_) {
      case ConvergingFamily::TentSlope:
        return tent_map(param);
      case ConvergingFamily::LogisticRate:
        return logistic_map(param);
      case ConvergingFamily::RotationAngle:
        return rotation_map(param);
    }
    throw InvalidArgument("unknown converging family");
  }

  std::string family_name() const {
    switch (family_) {
      case ConvergingFamily::TentSlope:
        return "tent-slope";
      case ConvergingFamily::LogisticRate:
        return "logistic-rate";
      case ConvergingFamily::RotationAngle:
        return "rotation-angle";
    }
    return "";
  }

  Kind kind_;
  ConvergingFamily family_ = ConvergingFamily::TentSlope;
  double target_ = 0.0, c_ = 0.0, q_ = 1.0;
  std::vector<MapPrimitive> maps_;
  long horizon_;
};

class IteratedImpl final : public SeqImpl {
 public:
  IteratedImpl(std::shared_ptr<const SeqImpl> base, long n) : base_(std::move(base)), n_(n) {
    if (n_ < 1) throw InvalidArgument("iterate_system: n must be >= 1");
  }

  Eigen::Index dim() const override { return base_->dim(); }
  long horizon() const override { return base_->horizon() / n_; }

  void apply_in_place(long k, double* coords) const override {
    for (long j = 0; j < n_; ++j) base_->apply_in_place(k * n_ + j, coords);
  }

  void axis_slopes(long k, double* out) const override {
    Eigen::Index d = dim();
    std::vector<double> step(static_cast<std::size_t>(d));
    for (Eigen::Index a = 0; a < d; ++a) out[a] = 1.0;
    for (long j = 0; j < n_; ++j) {
      base_->axis_slopes(k * n_ + j, step.data());
      for (Eigen::Index a = 0; a < d; ++a) out[a] *= step[static_cast<std::size_t>(a)];
    }
  }

  bool has_layers() const override { return base_->has_layers(); }
  void append_layers(long k, std::vector<MapPrimitive>& out) const override {
    for (long j = 0; j < n_; ++j) base_->append_layers(k * n_ + j, out);
  }

  long period_hint() const override {
    long p = base_->period_hint();
    if (p == 0) return 0;
    return p / std::gcd(p, n_);
  }

  std::string describe() const override {
    return "iterate(" + base_->describe() + ", n=" + std::to_string(n_) + ")";
  }

 private:
  std::shared_ptr<const SeqImpl> base_;
  long n_;
};

class ProductImpl final : public SeqImpl {
 public:
  ProductImpl(std::shared_ptr<const SeqImpl> a, std::shared_ptr<const SeqImpl> b)
      : a_(std::move(a)), b_(std::move(b)) {}

  Eigen::Index dim() const override { return a_->dim() + b_->dim(); }
  long horizon() const override { return std::min(a_->horizon(), b_->horizon()); }

  void apply_in_place(long i, double* coords) const override {
    a_->apply_in_place(i, coords);
    b_->apply_in_place(i, coords + a_->dim());
  }

  void axis_slopes(long i, double* out) const override {
    a_->axis_slopes(i, out);
    b_->axis_slopes(i, out + a_->dim());
  }

  long period_hint() const override {
    long pa = a_->period_hint();
    long pb = b_->period_hint();
    if (pa == 0 || pb == 0) return 0;
    return std::lcm(pa, pb);
  }

  std::string describe() const override {
    return "product(" + a_->describe() + ", " + b_->describe() + ")";
  }

 private:
  std::shared_ptr<const SeqImpl> a_, b_;
};

class PowerImpl final : public SeqImpl {
 public:
  PowerImpl(std::shared_ptr<const SeqImpl> base, long k) : base_(std::move(base)), k_(k) {
    if (k_ < 1) throw InvalidArgument("power_system: k must be >= 1");
  }

  Eigen::Index dim() const override { return base_->dim() * k_; }
  long horizon() const override { return base_->horizon(); }

  void apply_in_place(long i, double* coords) const override {
    Eigen::Index d = base_->dim();
    for (long f = 0; f < k_; ++f) base_->apply_in_place(i, coords + f * d);
  }

  void axis_slopes(long i, double* out) const override {
    Eigen::Index d = base_->dim();
    base_->axis_slopes(i, out);
    for (long f = 1; f < k_; ++f) std::copy(out, out + d, out + f * d);
  }

  long period_hint() const override { return base_->period_hint(); }

  std::string describe() const override {
    return "power(" + base_->describe() + ", k=" + std::to_string(k_) + ")";
  }

 private:
  std::shared_ptr<const SeqImpl> base_;
  long k_;
};

class ShiftedImpl final : public SeqImpl {
 public:
  ShiftedImpl(std::shared_ptr<const SeqImpl> base, long offset)
      : base_(std::move(base)), offset_(offset) {
    if (offset_ < 0) throw InvalidArgument("shift_system: index must be >= 0");
    if (offset_ >= base_->horizon()) throw HorizonExceeded("shift_system: offset beyond horizon");
  }

  Eigen::Index dim() const override { return base_->dim(); }
  long horizon() const override { return base_->horizon() - offset_; }

  void apply_in_place(long i, double* coords) const override {
    base_->apply_in_place(i + offset_, coords);
  }

  void axis_slopes(long i, double* out) const override { base_->axis_slopes(i + offset_, out); }

  bool has_layers() const override { return base_->has_layers(); }
  void append_layers(long i, std::vector<MapPrimitive>& out) const override {
    base_->append_layers(i + offset_, out);
  }

  long period_hint() const override { return base_->period_hint(); }

  std::string describe() const override {
    return "shift(" + base_->describe() + ", i=" + std::to_string(offset_) + ")";
  }

 private:
  std::shared_ptr<const SeqImpl> base_;
  long offset_;
};

class ConjugateImpl final : public SeqImpl {
 public:
  ConjugateImpl(std::shared_ptr<const SeqImpl> base, Warp warp)
      : base_(std::move(base)), warp_(std::move(warp)) {
    if (base_->dim() != 1) throw UnsupportedMap("conjugate_system: base must be one-dimensional");
  }

  Eigen::Index dim() const override { return 1; }
  long horizon() const override { return base_->horizon(); }

  void apply_in_place(long i, double* coords) const override {
    coords[0] = warp_.forward(coords[0]);
    base_->apply_in_place(i, coords);
    coords[0] = warp_.inverse(coords[0]);
  }

  void axis_slopes(long i, double* out) const override {
    base_->axis_slopes(i, out);
    out[0] *= warp_.lip_forward * warp_.lip_inverse;
  }

  long period_hint() const override { return base_->period_hint(); }

  std::string describe() const override {
    return "conjugate(" + base_->describe() + ", " + warp_.name + ")";
  }

 private:
  std::shared_ptr<const SeqImpl> base_;
  Warp warp_;
};

}  // namespace
}  // namespace detail

MapSequence::MapSequence(std::shared_ptr<const detail::SeqImpl> impl) : impl_(std::move(impl)) {}

Eigen::Index MapSequence::dim() const { return impl_->dim(); }
long MapSequence::horizon() const { return impl_->horizon(); }

Eigen::VectorXd MapSequence::apply(long i, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) throw InvalidArgument("apply: point dimension mismatch");
  Eigen::VectorXd y = x;
  apply_in_place(i, y.data());
  return y;
}

void MapSequence::apply_in_place(long i, double* coords) const {
  if (i < 0 || i >= impl_->horizon()) {
    throw HorizonExceeded("apply: index " + std::to_string(i) + " beyond horizon " +
                          std::to_string(impl_->horizon()));
  }
  impl_->apply_in_place(i, coords);
}

Eigen::VectorXd MapSequence::axis_max_slopes(long i) const {
  if (i < 0 || i >= impl_->horizon()) throw HorizonExceeded("axis_max_slopes: beyond horizon");
  Eigen::VectorXd out(dim());
  impl_->axis_slopes(i, out.data());
  return out;
}

bool MapSequence::has_layers() const { return impl_->has_layers(); }

std::vector<MapPrimitive> MapSequence::layers(long i) const {
  if (i < 0 || i >= impl_->horizon()) throw HorizonExceeded("layers: beyond horizon");
  std::vector<MapPrimitive> out;
  impl_->append_layers(i, out);
  return out;
}

long MapSequence::period_hint() const { return impl_->period_hint(); }
std::string MapSequence::describe() const { return impl_->describe(); }

MapSequence constant_system(MapPrimitive map, long horizon) {
  return MapSequence(std::make_shared<detail::ScheduleImpl>(
      detail::ScheduleImpl::Kind::Constant, std::vector<MapPrimitive>{std::move(map)}, horizon));
}

MapSequence periodic_system(std::vector<MapPrimitive> maps, long horizon) {
  return MapSequence(std::make_shared<detail::ScheduleImpl>(detail::ScheduleImpl::Kind::Periodic,
                                                            std::move(maps), horizon));
}

MapSequence converging_system(ConvergingFamily family, double target, double c, double q,
                              long horizon) {
  return MapSequence(std::make_shared<detail::ScheduleImpl>(family, target, c, q, horizon));
}

MapSequence iterate_system(const MapSequence& seq, long n) {
  return MapSequence(std::make_shared<detail::IteratedImpl>(seq.impl(), n));
}

MapSequence product_system(const MapSequence& a, const MapSequence& b) {
  return MapSequence(std::make_shared<detail::ProductImpl>(a.impl(), b.impl()));
}

MapSequence power_system(const MapSequence& seq, long k) {
  return MapSequence(std::make_shared<detail::PowerImpl>(seq.impl(), k));
}

MapSequence shift_system(const MapSequence& seq, long i) {
  return MapSequence(std::make_shared<detail::ShiftedImpl>(seq.impl(), i));
}

MapSequence conjugate_system(const MapSequence& seq, Warp warp) {
  return MapSequence(std::make_shared<detail::ConjugateImpl>(seq.impl(), std::move(warp)));
}

OrbitPath orbit(const MapSequence& seq, long i, const Eigen::Ref<const Eigen::VectorXd>& x,
                long n) {
  if (n < 1) throw InvalidArgument("orbit: length must be >= 1");
  OrbitPath path;
  path.base_index = i;
  path.entries.reserve(static_cast<std::size_t>(n) + 1);
  path.entries.push_back(x);
  Eigen::VectorXd cur = x;
  for (long j = 0; j < n; ++j) {
    seq.apply_in_place(i + j, cur.data());
    path.entries.push_back(cur);
  }
  return path;
}

}  // namespace topent
