#include "phireg/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace phireg {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

// Clamps tiny negatives and returns the sum; throws on real negatives.
double sanitize_nonnegative(Vec& v, const char* what) {
  KahanSum sum;
  for (double& x : v) {
    require_finite(x, what);
    if (x < 0.0) {
      if (x < kNegativeClamp)
        throw std::invalid_argument(std::string(what) + ": negative entry " + std::to_string(x));
      x = 0.0;
    }
    sum += x;
  }
  return sum.value();
}

}  // namespace

void KahanSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t d) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
  return Matrix(rows, cols, value);
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("Matrix +=: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

double inner(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw std::invalid_argument("inner: dimension mismatch");
  KahanSum s;
  for (std::size_t k = 0; k < a.data_.size(); ++k) s += a.data_[k] * b.data_[k];
  return s.value();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: dimension mismatch");
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
  return m;
}

// ------------------------------------------------------------ ProbVector

ProbVector::ProbVector(Vec entries) {
  if (entries.empty()) throw std::invalid_argument("ProbVector: empty");
  const double sum = sanitize_nonnegative(entries, "ProbVector");
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("ProbVector: entries sum to " + std::to_string(sum));
  for (double& x : entries) x /= sum;
  p_ = std::move(entries);
}

ProbVector ProbVector::from_weights(Vec weights) {
  if (weights.empty()) throw std::invalid_argument("ProbVector: empty");
  const double sum = sanitize_nonnegative(weights, "ProbVector");
  if (!(sum > 0.0)) throw std::invalid_argument("ProbVector: weights sum to zero");
  for (double& x : weights) x /= sum;
  return ProbVector(std::move(weights), Unchecked{});
}

ProbVector ProbVector::uniform(std::size_t d) {
  if (d == 0) throw std::invalid_argument("ProbVector: empty");
  return ProbVector(Vec(d, 1.0 / static_cast<double>(d)), Unchecked{});
}

ProbVector ProbVector::vertex(std::size_t d, std::size_t i) {
  if (i >= d) throw std::out_of_range("ProbVector::vertex: index out of range");
  Vec v(d, 0.0);
  v[i] = 1.0;
  return ProbVector(std::move(v), Unchecked{});
}

// ------------------------------------------------------------ LossVector

LossVector::LossVector(Vec entries, double max_loss) {
  for (double& x : entries) {
    require_finite(x, "LossVector");
    if (x < kNegativeClamp || x > max_loss - kNegativeClamp)
      throw std::invalid_argument("LossVector: entry " + std::to_string(x) + " outside [0, " +
                                  std::to_string(max_loss) + "]");
    x = std::clamp(x, 0.0, max_loss);
  }
  l_ = std::move(entries);
}

// ------------------------------------------------------ StochasticMatrix

StochasticMatrix::StochasticMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0)
    throw std::invalid_argument("StochasticMatrix: must be square and nonempty");
  for (std::size_t i = 0; i < m_.rows(); ++i) {
    auto r = m_.row(i);
    Vec tmp(r.begin(), r.end());
    ProbVector p(std::move(tmp));
    std::copy(p.begin(), p.end(), r.begin());
  }
}

StochasticMatrix StochasticMatrix::identity(std::size_t d) {
  return StochasticMatrix(Matrix::identity(d));
}

StochasticMatrix StochasticMatrix::uniform(std::size_t d) {
  return StochasticMatrix(Matrix(d, d, 1.0 / static_cast<double>(d)));
}

StochasticMatrix StochasticMatrix::constant_map(const ProbVector& q) {
  const std::size_t d = q.size();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) std::copy(q.begin(), q.end(), m.row(i).begin());
  return StochasticMatrix(std::move(m));
}

ProbVector StochasticMatrix::apply(const ProbVector& p) const {
  const std::size_t d = size();
  if (p.size() != d) throw std::invalid_argument("StochasticMatrix::apply: dimension mismatch");
  Vec out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    auto r = m_.row(i);
    for (std::size_t j = 0; j < d; ++j) out[j] += pi * r[j];
  }
  return ProbVector::from_weights(std::move(out));
}

// ------------------------------------------------------------- free ops

Matrix outer_product(std::span<const double> p, std::span<const double> l) {
  if (p.size() != l.size()) throw std::invalid_argument("outer_product: dimension mismatch");
  const std::size_t d = p.size();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = p[i] * l[j];
  return m;
}

double log_sum_exp(std::span<const double> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

ProbVector softmax(std::span<const double> logits) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logits) mx = std::max(mx, v);
  if (!std::isfinite(mx)) throw std::invalid_argument("softmax: no finite logit");
  Vec w(logits.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logits[i] - mx);
  return ProbVector::from_weights(std::move(w));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: dimension mismatch");
  KahanSum s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s.value();
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double linf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s.value();
}

// ------------------------------------------------- stationary distribution

namespace {

void check_row_stochastic(const Matrix& phi) {
  if (phi.rows() != phi.cols() || phi.rows() == 0)
    throw std::invalid_argument("stationary_distribution: phi must be square and nonempty");
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    double s = 0.0;
    for (double x : phi.row(i)) {
      require_finite(x, "stationary_distribution");
      if (x < kNegativeClamp) throw std::invalid_argument("stationary_distribution: negative entry");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-8)
      throw std::invalid_argument("stationary_distribution: row " + std::to_string(i) +
                                  " sums to " + std::to_string(s));
  }
}

// p <- phi_gamma^T p; returns the l1 change.
double damped_power_step(const Matrix& phi, const Vec& p, Vec& next) {
  const std::size_t d = phi.rows();
  const double keep = 1.0 - kStationaryDamping;
  const double spread = kStationaryDamping / static_cast<double>(d);
  std::fill(next.begin(), next.end(), 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    auto r = phi.row(i);
    for (std::size_t j = 0; j < d; ++j) next[j] += pi * r[j];
  }
  double s = 0.0;
  for (double& x : next) {
    x = keep * std::max(x, 0.0) + spread;
    s += x;
  }
  double change = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    next[j] /= s;
    change += std::abs(next[j] - p[j]);
  }
  return change;
}

// Grassmann-Taksar-Heyman state reduction on the damped chain. Every
// off-diagonal entry is positive, so no pivot vanishes.
Vec gth_stationary(const Matrix& phi) {
  const std::size_t d = phi.rows();
  const double keep = 1.0 - kStationaryDamping;
  const double spread = kStationaryDamping / static_cast<double>(d);
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = keep * std::max(phi(i, j), 0.0) + spread;

  for (std::size_t n = d - 1; n >= 1; --n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(n, j);
    for (std::size_t i = 0; i < n; ++i) a(i, n) /= s;
    for (std::size_t i = 0; i < n; ++i) {
      const double ain = a(i, n);
      for (std::size_t j = 0; j < n; ++j) a(i, j) += ain * a(n, j);
    }
  }
  Vec x(d, 0.0);
  x[0] = 1.0;
  for (std::size_t n = 1; n < d; ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * a(i, n);
    x[n] = s;
  }
  double total = 0.0;
  for (double v : x) total += v;
  for (double& v : x) v /= total;
  return x;
}

}  // namespace

double stationary_residual(const Matrix& phi, std::span<const double> p) {
  const std::size_t d = phi.rows();
  if (p.size() != d) throw std::invalid_argument("stationary_residual: dimension mismatch");
  Vec out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += p[i] * phi(i, j);
  return l1_distance(out, p);
}

ProbVector stationary_distribution(const Matrix& phi, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("stationary_distribution: tol must be positive");
  check_row_stochastic(phi);
  const std::size_t d = phi.rows();
  if (d == 1) return ProbVector::uniform(1);

  Vec next(d);
  if (d <= kDirectSolveMaxDim) {
    Vec x = gth_stationary(phi);
    const double change = damped_power_step(phi, x, next);
    if (change <= tol) return ProbVector::from_weights(std::move(next));
  }

  Vec p(d, 1.0 / static_cast<double>(d));
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double change = damped_power_step(phi, p, next);
    p.swap(next);
    if (change <= tol) return ProbVector::from_weights(std::move(p));
  }

  Vec x = gth_stationary(phi);
  // A couple of polishing sweeps absorb the elimination round-off.
  double change = 0.0;
  for (int it = 0; it < 2; ++it) {
    change = damped_power_step(phi, x, next);
    x.swap(next);
  }
  if (!(change <= tol))
    throw ConvergenceError("stationary_distribution: residual " + std::to_string(change) +
                           " above tolerance");
  return ProbVector::from_weights(std::move(x));
}

}  // namespace phireg
