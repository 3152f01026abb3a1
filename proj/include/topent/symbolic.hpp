#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "topent/errors.hpp"

namespace topent {

// 0/1 matrix with every row and column sum >= 1; the transition structure of
// a one-sided subshift of finite type on symbols 1..N.
class TransitionMatrix {
 public:
  static TransitionMatrix checked(const Eigen::MatrixXi& entries);

  Eigen::Index size() const { return entries_.rows(); }
  int operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  const Eigen::MatrixXi& entries() const { return entries_; }

  bool operator==(const TransitionMatrix& other) const { return entries_ == other.entries_; }

 private:
  explicit TransitionMatrix(Eigen::MatrixXi entries) : entries_(std::move(entries)) {}
  Eigen::MatrixXi entries_;
};

// Finite prefix of a one-sided symbol sequence; symbols are 1-based.
struct SymbolWord {
  std::vector<int> symbols;

  std::size_t size() const { return symbols.size(); }
  int operator[](std::size_t i) const { return symbols[i]; }
};

// Validates admissibility of consecutive pairs against the matrix.
SymbolWord make_word(const TransitionMatrix& matrix, std::vector<int> symbols);
bool is_admissible(const TransitionMatrix& matrix, const std::vector<int>& symbols);
SymbolWord shift_word(const SymbolWord& word);

// Uniform random walk on the transition digraph; deterministic for a fixed
// generator state.
SymbolWord random_admissible_word(const TransitionMatrix& matrix, std::size_t length,
                                  std::mt19937_64& rng);

enum class SpectralMethod { Power, NormLimit };

// Spectral radius of a transition matrix. Power iteration starts from the
// all-ones vector and stops on a small one-norm residual; schedules whose
// iterates oscillate (imprimitive matrices) fall back to the norm-limit
// route, which always converges for nonnegative matrices. The norm-limit
// method evaluates ||A^n||^{1/n} at doubling n with the entrywise-sum norm.
double spectral_radius(const TransitionMatrix& matrix, SpectralMethod method, double tol);

// log(spectral radius), nats: the entropy of the subshift sigma_A.
double shift_entropy(const TransitionMatrix& matrix);

using BigCount = unsigned __int128;

// Number of admissible words of length n: N for n = 1, the entry sum of
// A^{n-1} otherwise. Exact integer arithmetic; throws CountOverflow past
// 128 bits.
BigCount count_admissible_words(const TransitionMatrix& matrix, int n);

std::string to_string(BigCount value);
double log_big_count(BigCount value);

// Truncated shift metric sum_{i<len} d(a_i,b_i)/2^i with the tail bounded by
// 2^{-(len-1)}.
struct ShiftDistance {
  double partial = 0.0;
  double tail_bound = 0.0;
};
ShiftDistance shift_metric(const SymbolWord& a, const SymbolWord& b);

// Row-per-line text form: 0/1 digits separated by spaces.
TransitionMatrix parse_transition_matrix(const std::string& text);
std::string to_text(const TransitionMatrix& matrix);

}  // namespace topent
