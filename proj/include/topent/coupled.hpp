#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "topent/interval.hpp"
#include "topent/space.hpp"
#include "topent/symbolic.hpp"
#include "topent/systems.hpp"

namespace topent {

// Closed sets V_1..V_N with pairwise disjoint interiors; strict partitions
// additionally have disjoint closures.
struct PartitionSets {
  std::vector<Interval> sets;
  bool strict = false;
};

PartitionSets make_partition(std::vector<Interval> sets, bool require_strict = false);

struct CoverVerdict {
  long n = 0;
  int i = 0;  // 1-based source piece
  int j = 0;  // 1-based target piece
  bool holds = false;
};

struct EqualityVerdict {
  long n = 0;
  int i = 0;
  bool holds = false;
};

struct ContractionReport {
  long depth = 0;
  double epsilon = 0.0;
  double max_diameter = 0.0;
  bool pass = false;
  long words_checked = 0;
  unsigned long long seed = 0;
  std::vector<std::pair<long, double>> per_n_max;
};

// Certified cover conditions f_n(V_i) >= union of the V_j allowed by the
// matrix, over a finite index range, plus the contraction evidence needed
// for the matching upper bound.
struct CoupledExpansionCertificate {
  TransitionMatrix matrix;
  PartitionSets partition;
  long n_lo = 0;
  long n_hi = 0;
  // true when the checked range covers all indices (one period of a periodic
  // schedule); false ranges are evidence, not proof
  bool range_complete = false;
  bool equality_mode = false;
  std::vector<CoverVerdict> verdicts;
  std::vector<EqualityVerdict> equality;
  bool all_hold = false;
  std::optional<double> lower_bound;  // log lambda(A) when all verdicts hold
  std::optional<ContractionReport> contraction;
  std::optional<double> upper_bound;  // log lambda(A) when contraction passes
};

// Checks f_n(V_i) contains the union of admissible targets for each n in the
// range, through exact monotone-branch endpoint images. equality_mode also
// requires the reverse inclusion. A missing range defaults to one schedule
// period, or [0,64] flagged incomplete for aperiodic schedules.
CoupledExpansionCertificate verify_coupled_expansion(
    const MapSequence& seq, const PartitionSets& partition, const TransitionMatrix& matrix,
    std::optional<std::pair<long, long>> n_range = std::nullopt, bool equality_mode = false);

// Symbols of the pieces visited by the orbit of x; ties at shared boundaries
// resolve to the lower index. Throws OrbitEscape with the first escaping
// step when the orbit leaves the partition.
SymbolWord itinerary(const MapSequence& seq, double x, const PartitionSets& partition, long n,
                     long base_index = 0);

// V_alpha^{m,n} = intersection of f_n^{-k}(V_{a_k}), k = 0..m, computed by
// backward branch-inverse propagation. Exact for the branch catalog.
IntervalSet pullback_cylinder(const MapSequence& seq, const PartitionSets& partition,
                              const SymbolWord& word, long m, long n_start = 0);

struct PointEstimate {
  double value = 0.0;
  double radius = 0.0;
};

// Midpoint of the depth-M cylinder; valid as the x_n(alpha) singleton proxy
// when the cylinder diameter is within tolerance.
PointEstimate point_from_itinerary(const MapSequence& seq, const PartitionSets& partition,
                                   const SymbolWord& word, long depth, long n_start,
                                   double tolerance);

// Diameters of depth-M cylinders over seeded random admissible words and
// each start index in range; passes when every diameter stays below eps.
// Sampled evidence for the upper-bound contraction hypothesis, not proof.
ContractionReport contraction_check(const MapSequence& seq, const PartitionSets& partition,
                                    const TransitionMatrix& matrix, long depth, double eps,
                                    long n_lo, long n_hi, long sample_words,
                                    unsigned long long seed);

// (log lambda(A), optionally log lambda(A)); throws NoBound when the
// certificate failed.
std::pair<double, std::optional<double>> entropy_bounds(
    const CoupledExpansionCertificate& certificate);

// Convenience driver: verify + contraction + bounds in one certificate.
CoupledExpansionCertificate certify(const MapSequence& seq, const PartitionSets& partition,
                                    const TransitionMatrix& matrix,
                                    std::optional<std::pair<long, long>> n_range,
                                    bool equality_mode, long depth, double contraction_eps,
                                    long sample_words, unsigned long long seed);

// Maps h_n between phase spaces, indexed by time.
using ConjugacyMaps = std::function<Eigen::VectorXd(long, const Eigen::Ref<const Eigen::VectorXd>&)>;

// max over sampled x and n < n_steps of d(h_{n+1}(f_n(x)), g_n(h_n(x))):
// zero for genuine equi-semiconjugacies.
double semiconjugacy_residual(const MapSequence& seq_f, const MapSequence& seq_g,
                              const ConjugacyMaps& h, const SpaceSample& target_space,
                              const Eigen::MatrixXd& sample_points, long n_steps);

}  // namespace topent
