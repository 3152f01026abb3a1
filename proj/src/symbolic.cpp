#include "topent/symbolic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace topent {

TransitionMatrix TransitionMatrix::checked(const Eigen::MatrixXi& entries) {
  if (entries.rows() != entries.cols()) throw InvalidArgument("transition matrix must be square");
  if (entries.rows() < 2) throw InvalidArgument("transition matrix needs N >= 2");
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      if (entries(i, j) != 0 && entries(i, j) != 1) {
        throw InvalidArgument("transition matrix entries must be 0 or 1");
      }
    }
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    if (entries.row(i).sum() < 1) {
      throw NotATransitionMatrix("row " + std::to_string(i + 1) + " sums to 0");
    }
    if (entries.col(i).sum() < 1) {
      throw NotATransitionMatrix("column " + std::to_string(i + 1) + " sums to 0");
    }
  }
  return TransitionMatrix(entries);
}

bool is_admissible(const TransitionMatrix& matrix, const std::vector<int>& symbols) {
  const Eigen::Index n = matrix.size();
  for (int s : symbols) {
    if (s < 1 || s > n) return false;
  }
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
    if (matrix(symbols[i] - 1, symbols[i + 1] - 1) != 1) return false;
  }
  return true;
}

SymbolWord make_word(const TransitionMatrix& matrix, std::vector<int> symbols) {
  if (!is_admissible(matrix, symbols)) {
    throw InvalidArgument("symbol word is not admissible for the matrix");
  }
  return SymbolWord{std::move(symbols)};
}

SymbolWord shift_word(const SymbolWord& word) {
  if (word.symbols.empty()) throw InvalidArgument("cannot shift an empty word");
  return SymbolWord{std::vector<int>(word.symbols.begin() + 1, word.symbols.end())};
}

SymbolWord random_admissible_word(const TransitionMatrix& matrix, std::size_t length,
                                  std::mt19937_64& rng) {
  if (length == 0) throw InvalidArgument("word length must be positive");
  const Eigen::Index n = matrix.size();
  // plain modulo keeps the draw deterministic across platforms
  auto pick = [&rng](std::size_t k) { return static_cast<std::size_t>(rng() % k); };
  std::vector<int> symbols;
  symbols.reserve(length);
  symbols.push_back(static_cast<int>(pick(static_cast<std::size_t>(n))) + 1);
  while (symbols.size() < length) {
    int cur = symbols.back();
    std::vector<int> next;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (matrix(cur - 1, j) == 1) next.push_back(static_cast<int>(j) + 1);
    }
    symbols.push_back(next[pick(next.size())]);  // nonempty: row sums >= 1
  }
  return SymbolWord{std::move(symbols)};
}

namespace {

double norm_limit_radius(const Eigen::MatrixXd& a, double tol, int max_doublings) {
  // track A^(2^k) = exp(logc) * B with B normalized to unit entry sum
  Eigen::MatrixXd b = a;
  double logc = 0.0;
  double n = 1.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k <= max_doublings; ++k) {
    double s = b.sum();
    double value = std::exp((logc + std::log(s)) / n);
    if (k > 0 && std::abs(value - prev) < tol) return value;
    prev = value;
    logc = 2.0 * (logc + std::log(s));
    b = ((b / s) * (b / s)).eval();
    n *= 2.0;
  }
  throw ConvergenceFailure("norm-limit spectral radius did not stabilize");
}

}  // namespace

double spectral_radius(const TransitionMatrix& matrix, SpectralMethod method, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("spectral_radius: tol must be positive");
  const Eigen::MatrixXd a = matrix.entries().cast<double>();

  if (method == SpectralMethod::NormLimit) return norm_limit_radius(a, tol, 64);

  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows());
  v /= v.sum();
  // eigenvalue error for non-normal matrices is residual times the eigenvalue
  // condition number, so drive the residual well below tol
  const double floor = 64.0 * std::numeric_limits<double>::epsilon();
  const int cap = 500000;
  for (int it = 0; it < cap; ++it) {
    Eigen::VectorXd w = a * v;
    double est = w.sum();  // v has unit sum and nonnegative entries
    double residual = (w - est * v).cwiseAbs().sum();
    if (residual <= std::max(tol * 1e-4, floor) * std::max(1.0, est)) return est;
    v = w / w.sum();
  }
  // oscillating iterates (imprimitive structure): norm-limit always converges
  return norm_limit_radius(a, tol, 64);
}

double shift_entropy(const TransitionMatrix& matrix) {
  return std::log(spectral_radius(matrix, SpectralMethod::Power, 1e-12));
}

namespace {

constexpr BigCount kBigMax = ~static_cast<BigCount>(0);

BigCount checked_add(BigCount a, BigCount b) {
  if (a > kBigMax - b) throw CountOverflow("word count overflow");
  return a + b;
}

}  // namespace

BigCount count_admissible_words(const TransitionMatrix& matrix, int n) {
  if (n < 1) throw InvalidArgument("word length must be >= 1");
  const Eigen::Index dim = matrix.size();
  if (n == 1) return static_cast<BigCount>(dim);

  std::vector<BigCount> power(static_cast<std::size_t>(dim * dim));
  auto at = [dim](std::vector<BigCount>& m, Eigen::Index i, Eigen::Index j) -> BigCount& {
    return m[static_cast<std::size_t>(i * dim + j)];
  };
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) at(power, i, j) = static_cast<BigCount>(matrix(i, j));
  }
  for (int step = 2; step < n; ++step) {
    std::vector<BigCount> next(static_cast<std::size_t>(dim * dim), 0);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        BigCount aik = at(power, i, k);
        if (aik == 0) continue;
        for (Eigen::Index j = 0; j < dim; ++j) {
          if (matrix(k, j) == 1) at(next, i, j) = checked_add(at(next, i, j), aik);
        }
      }
    }
    power = std::move(next);
  }
  BigCount total = 0;
  for (BigCount entry : power) total = checked_add(total, entry);
  return total;
}

std::string to_string(BigCount value) {
  if (value == 0) return "0";
  std::string digits;
  while (value > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  return std::string(digits.rbegin(), digits.rend());
}

double log_big_count(BigCount value) {
  if (value == 0) throw InvalidArgument("log of zero count");
  // split into high and low 64-bit halves to stay exact enough for doubles
  const double two64 = 18446744073709551616.0;
  auto hi = static_cast<double>(static_cast<std::uint64_t>(value >> 64));
  auto lo = static_cast<double>(static_cast<std::uint64_t>(value));
  return std::log(hi * two64 + lo);
}

ShiftDistance shift_metric(const SymbolWord& a, const SymbolWord& b) {
  if (a.size() != b.size()) throw InvalidArgument("shift_metric: words must have equal length");
  if (a.size() == 0) throw InvalidArgument("shift_metric: empty words");
  double sum = 0.0;
  double weight = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i, weight *= 0.5) {
    if (a[i] != b[i]) sum += weight;
  }
  // remaining tail: sum_{i >= len} 2^{-i} = 2^{-(len-1)}
  return ShiftDistance{sum, std::ldexp(1.0, -static_cast<int>(a.size() - 1))};
}

TransitionMatrix parse_transition_matrix(const std::string& text) {
  std::vector<std::vector<int>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::vector<int> row;
    int value;
    while (fields >> value) row.push_back(value);
    if (!fields.eof()) throw InvalidArgument("transition matrix text: non-numeric field");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("transition matrix text: no rows");
  Eigen::MatrixXi entries(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw InvalidArgument("transition matrix text: ragged rows");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return TransitionMatrix::checked(entries);
}

std::string to_text(const TransitionMatrix& matrix) {
  std::string out;
  for (Eigen::Index i = 0; i < matrix.size(); ++i) {
    for (Eigen::Index j = 0; j < matrix.size(); ++j) {
      if (j) out += ' ';
      out += matrix(i, j) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

}  // namespace topent
