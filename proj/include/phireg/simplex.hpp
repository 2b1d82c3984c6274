#pragma once

// Simplex and row-stochastic matrix primitives shared by every learner.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace phireg {

using Vec = std::vector<double>;

/// Raised when an iterative solver cannot reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a two-phase round protocol is called out of order.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when an enumeration or tensor contraction would exceed its budget.
class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Negative entries above this are treated as rounding noise and clamped to 0.
inline constexpr double kNegativeClamp = -1e-12;

/// Neumaier-compensated running sum.
class KahanSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }
  KahanSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t d);
  static Matrix constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double s);

  /// Frobenius inner product <A, B> = trace(A^T B).
  friend double inner(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

double max_abs_diff(const Matrix& a, const Matrix& b);

/// A point of the probability simplex.
///
/// Construction rejects NaN/Inf and entries below -1e-12, clamps the
/// remaining tiny negatives to zero and renormalizes.
class ProbVector {
 public:
  ProbVector() = default;
  /// Requires the entries to already sum to 1 within 1e-6.
  explicit ProbVector(Vec entries);
  ProbVector(std::initializer_list<double> entries) : ProbVector(Vec(entries)) {}

  /// Normalizes arbitrary nonnegative weights with a positive sum.
  static ProbVector from_weights(Vec weights);
  static ProbVector uniform(std::size_t d);
  static ProbVector vertex(std::size_t d, std::size_t i);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> span() const noexcept { return p_; }
  const Vec& values() const noexcept { return p_; }

  auto begin() const noexcept { return p_.begin(); }
  auto end() const noexcept { return p_.end(); }

 private:
  struct Unchecked {};
  ProbVector(Vec entries, Unchecked) : p_(std::move(entries)) {}
  Vec p_;
};

/// A loss vector with entries in [0, max_loss] (max_loss = 1 unless extended).
class LossVector {
 public:
  LossVector() = default;
  explicit LossVector(Vec entries, double max_loss = 1.0);
  LossVector(std::initializer_list<double> entries) : LossVector(Vec(entries)) {}

  static LossVector zeros(std::size_t d) { return LossVector(Vec(d, 0.0)); }

  std::size_t size() const noexcept { return l_.size(); }
  double operator[](std::size_t i) const { return l_[i]; }
  std::span<const double> span() const noexcept { return l_; }
  const Vec& values() const noexcept { return l_; }

  auto begin() const noexcept { return l_.begin(); }
  auto end() const noexcept { return l_.end(); }

 private:
  Vec l_;
};

/// Row-stochastic square matrix; acts on the simplex by phi(p) = phi^T p.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;
  /// Validates every row (see ProbVector) and renormalizes it.
  explicit StochasticMatrix(Matrix m);
  StochasticMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : StochasticMatrix(Matrix(rows)) {}

  static StochasticMatrix identity(std::size_t d);
  static StochasticMatrix uniform(std::size_t d);
  /// The rank-one transform 1 q^T that maps every distribution to q.
  static StochasticMatrix constant_map(const ProbVector& q);

  std::size_t size() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  std::span<const double> row(std::size_t i) const { return m_.row(i); }
  const Matrix& matrix() const noexcept { return m_; }

  /// phi(p) = phi^T p.
  ProbVector apply(const ProbVector& p) const;

 private:
  Matrix m_;
};

/// Entry (i, j) = p_i * l_j.
Matrix outer_product(std::span<const double> p, std::span<const double> l);
inline Matrix outer_product(const ProbVector& p, const LossVector& l) {
  return outer_product(p.span(), l.span());
}

/// Numerically stable log(sum(exp(x))). Returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

/// Softmax of log-weights with max shift.
ProbVector softmax(std::span<const double> logits);

/// KL(p, q) = sum_i p_i log(p_i / q_i), with 0 log 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

double l1_distance(std::span<const double> a, std::span<const double> b);
double linf_norm(std::span<const double> a);
double dot(std::span<const double> a, std::span<const double> b);

/// Weight of the uniform component mixed into phi before solving for p.
inline constexpr double kStationaryDamping = 1e-10;

/// Largest dimension solved directly by elimination before iterating.
inline constexpr std::size_t kDirectSolveMaxDim = 128;

/// Stationary distribution p = phi^T p of the damped chain
/// (1 - gamma) phi + gamma (1/d) 11^T, gamma = kStationaryDamping.
///
/// For d <= kDirectSolveMaxDim the damped chain is solved by GTH elimination
/// and accepted once one power step moves it by at most tol. Otherwise, or if
/// that check fails, power iteration runs from the uniform vector for up to
/// max_iter steps, then GTH again as a last resort. Throws ConvergenceError
/// only if the result still misses tol.
ProbVector stationary_distribution(const Matrix& phi, double tol = 1e-10,
                                   std::size_t max_iter = 2000);
inline ProbVector stationary_distribution(const StochasticMatrix& phi, double tol = 1e-10,
                                          std::size_t max_iter = 2000) {
  return stationary_distribution(phi.matrix(), tol, max_iter);
}

/// ||p - phi^T p||_1.
double stationary_residual(const Matrix& phi, std::span<const double> p);

}  // namespace phireg
