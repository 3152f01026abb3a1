#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "topent/interval.hpp"
#include "topent/space.hpp"

namespace topent {

inline constexpr long kDefaultHorizon = 1'000'000;

// One strictly monotone branch of a piecewise map, with a closed-form
// inverse. Affine branches cover tent/doubling/rotation/identity and user
// data; the logistic halves are the only non-affine pieces in the catalog.
struct Branch {
  enum class Kind { Affine, LogisticUp, LogisticDown };

  Kind kind = Kind::Affine;
  double lo = 0.0;
  double hi = 1.0;
  // Affine: y = a*x + b. Logistic: a is the rate r, y = r*x*(1-x).
  double a = 1.0;
  double b = 0.0;

  double eval(double x) const;
  double inverse(double y) const;
  bool increasing() const;
  double max_slope() const;
  Interval domain() const { return {lo, hi}; }
  Interval image() const;
};

// Piecewise-monotone self-map of [0,1]. Branch domains partition [0,1] and
// share endpoints; a point shared by two branches evaluates via the
// lower-index branch.
struct MapPrimitive {
  std::string name;
  std::vector<Branch> branches;
  bool circle = false;

  double eval(double x) const;
  IntervalSet image(const Interval& iv) const;
  IntervalSet image(const IntervalSet& set) const;
  IntervalSet preimage(const Interval& iv) const;
  IntervalSet preimage(const IntervalSet& set) const;
  double max_slope() const;
};

MapPrimitive identity_map();
MapPrimitive tent_map(double slope);    // 0 < slope <= 2
MapPrimitive doubling_map();            // circle map, two affine branches
MapPrimitive logistic_map(double r);    // 0 < r <= 4
MapPrimitive rotation_map(double alpha);
MapPrimitive affine_piecewise_map(std::vector<double> breakpoints, std::vector<double> slopes,
                                  std::vector<double> intercepts, bool circle = false);

// Catalog exposed by name for configuration files.
std::vector<std::string> primitive_names();
MapPrimitive make_primitive(const std::string& name, const std::map<std::string, double>& params);

// Invertible coordinate change with closed-form inverse, for conjugated
// systems.
struct Warp {
  std::string name;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  double lip_forward = 1.0;
  double lip_inverse = 1.0;
};

// phi(x) = x + c*x*(1-x), 0 <= c < 1; fixes 0 and 1, quadratic inverse.
Warp quadratic_warp(double c);

struct OrbitPath {
  long base_index = 0;
  std::vector<Eigen::VectorXd> entries;  // entries[0] is the start point

  const Eigen::VectorXd& last() const { return entries.back(); }
};

namespace detail {
class SeqImpl;
}

// A schedule n -> f_n of self-maps. Immutable value type; all evaluation is
// pure, so unrestricted concurrent use is safe.
class MapSequence {
 public:
  explicit MapSequence(std::shared_ptr<const detail::SeqImpl> impl);

  Eigen::Index dim() const;
  long horizon() const;
  Eigen::VectorXd apply(long i, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  void apply_in_place(long i, double* coords) const;

  // Per-axis bound on |f_i'|; the equi-continuity diagnostic.
  Eigen::VectorXd axis_max_slopes(long i) const;

  // The time-i map as a chain of piecewise-monotone primitives, innermost
  // first. Throws UnsupportedMap for maps without branch data (products,
  // conjugated systems).
  bool has_layers() const;
  std::vector<MapPrimitive> layers(long i) const;

  // Schedule period when known (1 = constant), 0 = aperiodic/unknown.
  long period_hint() const;
  std::string describe() const;

  std::shared_ptr<const detail::SeqImpl> impl() const { return impl_; }

 private:
  std::shared_ptr<const detail::SeqImpl> impl_;
};

MapSequence constant_system(MapPrimitive map, long horizon = kDefaultHorizon);
MapSequence periodic_system(std::vector<MapPrimitive> maps, long horizon = kDefaultHorizon);

// Schedules f_n converging uniformly to the target-parameter map, with
// parameter deficit c/(n+1)^q. The sup distance between f_n and the limit is
// bounded by the deficit for every family in the catalog.
enum class ConvergingFamily { TentSlope, LogisticRate, RotationAngle };
MapSequence converging_system(ConvergingFamily family, double target, double c, double q,
                              long horizon = kDefaultHorizon);

// Blocks f_{kn}^n = f_{kn+n-1} o ... o f_{kn} as a new schedule.
MapSequence iterate_system(const MapSequence& seq, long n);
// (f_i x g_i) acting on the product space.
MapSequence product_system(const MapSequence& a, const MapSequence& b);
// k-fold product of the sequence with itself.
MapSequence power_system(const MapSequence& seq, long k);
// Tail schedule {f_{i+n}}_{n>=0}.
MapSequence shift_system(const MapSequence& seq, long i);
// g_n = phi^{-1} o f_n o phi on 1-d systems.
MapSequence conjugate_system(const MapSequence& seq, Warp warp);

inline Eigen::VectorXd apply(const MapSequence& seq, long i,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  return seq.apply(i, x);
}

// Orbit segment x, f_i(x), f_i^2(x), ..., f_i^n(x); n+1 entries.
OrbitPath orbit(const MapSequence& seq, long i, const Eigen::Ref<const Eigen::VectorXd>& x, long n);

}  // namespace topent
