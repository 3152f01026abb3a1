#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "topent/space.hpp"
#include "topent/systems.hpp"

namespace topent {

enum class CountMode { Separated, SpanningInLambda, SpanningInX, Cover };
enum class Exactness { Greedy, Exact };
enum class Ambient { Lambda, FullSample };

const char* count_mode_name(CountMode mode);

// Exact combinatorial searches are capped at this many candidates.
inline constexpr Eigen::Index kExactOracleCap = 20;

// Metric ball used as an open cover element.
struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;
};

// d_n(x,y) = max_{0<=j<n} d(f_i^j x, f_i^j y): the orbit-segment distance
// whose >= eps sublevel realizes (n,eps)-separation.
double bowen_distance(const MapSequence& seq, const SpaceSample& space,
                      const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y, long n, long base_index = 0);

// Orbit values f_i^j(p) for a fixed point subset, j = 0..steps-1, built once
// and then read-only; concurrent reads are safe.
class OrbitTable {
 public:
  OrbitTable(const MapSequence& seq, const SpaceSample& space,
             const std::vector<Eigen::Index>& points, long base_index, long steps);

  Eigen::Index point_count() const { return static_cast<Eigen::Index>(index_of_.size()); }
  long steps() const { return steps_; }

  // Bowen distance between the a-th and b-th tracked points, early-exiting
  // once the running max reaches stop_at.
  double bowen(Eigen::Index a, Eigen::Index b, long n, double stop_at) const;

  Eigen::VectorXd value(Eigen::Index point, long step) const;

 private:
  std::vector<Eigen::MatrixXd> per_step_;  // each: points x dims
  std::vector<AxisKind> axes_;
  std::vector<Eigen::Index> index_of_;
  long steps_;
};

// Maximal/maximum (n,eps)-separated subset of lambda (indices into the
// sample). Separation is strict: d_n >= eps counts as separated. The greedy
// variant scans points in sample order and is maximal by construction; the
// exact variant is a branch-and-bound maximum search capped at
// kExactOracleCap points.
std::vector<Eigen::Index> max_separated(const SpaceSample& space, const MapSequence& seq,
                                        const std::vector<Eigen::Index>& lambda, long n, double eps,
                                        Exactness exactness, long base_index = 0);

// Minimal (greedy: largest-residual-coverage-first; exact: branch-and-bound)
// set of centers whose d_n-eps balls cover lambda. Centers come from lambda
// or from the full sample.
std::vector<Eigen::Index> min_spanning(const SpaceSample& space, const MapSequence& seq,
                                       const std::vector<Eigen::Index>& lambda, long n, double eps,
                                       Ambient ambient, Exactness exactness, long base_index = 0);

// Minimal subcover cardinality of the n-step join of pullbacks of the ball
// cover, restricted to lambda: a sample point p lies in the pullback of ball
// B at depth j iff d(f^j(p), center) < radius.
long cover_join_count(const SpaceSample& space, const std::vector<Ball>& cover,
                      const MapSequence& seq, const std::vector<Eigen::Index>& lambda, long n,
                      Exactness exactness, long base_index = 0);

// Ball cover with centers at every orbit value f^j(p), p in lambda, j < n.
// With these centers a minimal spanning set induces a subcover of the join,
// so the subcover count is bounded by the spanning count on finite samples.
std::vector<Ball> orbit_ball_cover(const SpaceSample& space, const MapSequence& seq,
                                   const std::vector<Eigen::Index>& lambda, long n, double eps,
                                   long base_index = 0);

struct SeparationCurve {
  double epsilon = 0.0;
  CountMode mode = CountMode::Separated;
  Exactness exactness = Exactness::Greedy;
  std::vector<long> n_values;
  std::vector<long> counts;
};

SeparationCurve separation_curve(const SpaceSample& space, const MapSequence& seq,
                                 const std::vector<Eigen::Index>& lambda, CountMode mode,
                                 Exactness exactness, double eps, long n_lo, long n_hi,
                                 long base_index = 0);

struct RateFit {
  double rate = 0.0;      // nats per step
  double residual = 0.0;  // rms residual of the log-count fit
  long window_lo = 0;
  long window_hi = 0;
};

// Least-squares slope of log counts over the window; the finite-resolution
// stand-in for the limsup growth rate.
RateFit growth_rate(const SeparationCurve& curve, long window_lo, long window_hi);

struct EpsilonReport {
  double epsilon = 0.0;
  SeparationCurve curve;
  // per-n validity flags, aligned with curve.n_values
  std::vector<bool> saturated;
  std::vector<bool> resolution_limited;
  RateFit fit;
  bool window_fallback = false;      // requested window had < 3 valid depths
  bool resolution_exhausted = false;  // fewer than 3 valid depths anywhere
  bool saturation_seen = false;
};

struct EstimateOptions {
  CountMode mode = CountMode::Separated;
  Exactness exactness = Exactness::Greedy;
  // 0,0 selects the default tail window [n_hi/2, n_hi]
  long window_lo = 0;
  long window_hi = 0;
  // counts at or above this fraction of |lambda| cannot express further
  // growth on the sample and are excluded from fits
  double saturation_fraction = 0.9;
  // depth n is resolution-valid while eps / L_n(axis) >= factor * mesh(axis),
  // where L_n is the axis expansion bound accumulated from the slope
  // diagnostics
  double resolution_factor = 4.0;
  long base_index = 0;
};

struct EntropyEstimate {
  double value = 0.0;  // nats; clamped at 0
  double epsilon_used = 0.0;
  std::vector<EpsilonReport> per_epsilon;
  double mesh_over_epsilon = 0.0;
  CountMode method = CountMode::Separated;
  long n_lo = 0;
  long n_hi = 0;
};

// Counts are computed for every depth 1..n_hi; the fit window is the
// requested window intersected with the resolution/saturation-valid depths,
// widened to the whole valid range (and flagged) when fewer than three
// valid depths survive inside it. The headline value is the fitted rate at
// the smallest epsilon of the schedule.
EntropyEstimate entropy_estimate(const SpaceSample& space, const MapSequence& seq,
                                 const std::vector<Eigen::Index>& lambda,
                                 const std::vector<double>& eps_schedule, long n_lo, long n_hi,
                                 const EstimateOptions& options = {});

// Cardinality of a maximal set whose pairs separate along some orbit segment
// started at any base index i <= i_max.
long sup_separated(const SpaceSample& space, const MapSequence& seq,
                   const std::vector<Eigen::Index>& lambda, long n, double eps, long i_max,
                   Exactness exactness);

// Entropy estimates of the tail systems f_{i,inf}; the last entry is the
// proxy for the asymptotic entropy.
std::vector<std::pair<long, EntropyEstimate>> tail_entropy(
    const SpaceSample& space, const MapSequence& seq, const std::vector<Eigen::Index>& lambda,
    const std::vector<double>& eps_schedule, long n_lo, long n_hi,
    const std::vector<long>& i_list, const EstimateOptions& options = {});

std::vector<Eigen::Index> all_indices(const SpaceSample& space);

}  // namespace topent
