#include "phireg/priors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace phireg {

BinaryTransform::BinaryTransform(std::vector<std::size_t> map) : map_(std::move(map)) {
  const std::size_t d = map_.size();
  if (d == 0) throw std::invalid_argument("BinaryTransform: empty map");
  for (std::size_t j : map_)
    if (j >= d) throw std::invalid_argument("BinaryTransform: image " + std::to_string(j) + " out of range");
}

BinaryTransform BinaryTransform::identity(std::size_t d) {
  std::vector<std::size_t> m(d);
  for (std::size_t i = 0; i < d; ++i) m[i] = i;
  return BinaryTransform(std::move(m));
}

BinaryTransform BinaryTransform::constant(std::size_t d, std::size_t target) {
  return BinaryTransform(std::vector<std::size_t>(d, target));
}

BinaryTransform BinaryTransform::internal(std::size_t d, std::size_t from, std::size_t to) {
  auto phi = identity(d);
  if (from >= d || to >= d) throw std::invalid_argument("BinaryTransform::internal: index out of range");
  phi.map_[from] = to;
  return phi;
}

Matrix BinaryTransform::to_matrix() const {
  const std::size_t d = size();
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, map_[i]) = 1.0;
  return m;
}

ComplexityReport complexity(const BinaryTransform& phi) {
  const std::size_t d = phi.size();
  ComplexityReport r;
  std::vector<std::size_t> mult(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    if (phi[i] == i) ++r.d_self;
    ++mult[phi[i]];
  }
  r.d_unif = *std::max_element(mult.begin(), mult.end());
  r.c = std::min(d - r.d_self, d - r.d_unif + 1);
  return r;
}

// ------------------------------------------------------------ PriorFamily

PriorFamily::PriorFamily(std::size_t d) : d_(d) {
  if (d < 2) throw std::invalid_argument("PriorFamily: d must be at least 2");
  psi_.reserve(d + 1);
  for (std::size_t k = 0; k <= d; ++k) {
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) m(i, j) = psi_entry(k, i, j);
    psi_.emplace_back(std::move(m));
  }
  weights_.assign(d, 1.0 / (2.0 * static_cast<double>(d)));
  weights_.push_back(0.5);
}

double PriorFamily::psi_entry(std::size_t k, std::size_t i, std::size_t j) const {
  const double d = static_cast<double>(d_);
  const double peak = (d - 2.0) / (d - 1.0);
  const double base = 1.0 / (d * (d - 1.0));
  const bool hit = k < d_ ? (j == k) : (j == i);
  return base + (hit ? peak : 0.0);
}

Matrix PriorFamily::marginal() const {
  Matrix m(d_, d_);
  for (std::size_t k = 0; k < psi_.size(); ++k) {
    Matrix part = psi_[k].matrix();
    part *= weights_[k];
    m += part;
  }
  return m;
}

// ------------------------------------------------------------------ masses

namespace {
void check_dims(const Matrix& psi, const BinaryTransform& phi) {
  if (psi.rows() != phi.size() || psi.cols() != phi.size())
    throw std::invalid_argument("induced_mass: dimension mismatch");
}
}  // namespace

double induced_mass(const Matrix& psi, const BinaryTransform& phi) {
  check_dims(psi, phi);
  double m = 1.0;
  for (std::size_t i = 0; i < phi.size(); ++i) m *= psi(i, phi[i]);
  return m;
}

double induced_log_mass(const Matrix& psi, const BinaryTransform& phi) {
  check_dims(psi, phi);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += std::log(psi(i, phi[i]));
  return s;
}

double prior_mass(const PriorFamily& family, const BinaryTransform& phi) {
  if (family.dim() > 30) return std::exp(prior_log_mass(family, phi));
  double m = 0.0;
  for (std::size_t k = 0; k < family.count(); ++k)
    m += family.weight(k) * induced_mass(family.psi(k).matrix(), phi);
  return m;
}

double prior_log_mass(const PriorFamily& family, const BinaryTransform& phi) {
  Vec terms(family.count());
  for (std::size_t k = 0; k < family.count(); ++k)
    terms[k] = std::log(family.weight(k)) + induced_log_mass(family.psi(k).matrix(), phi);
  return log_sum_exp(terms);
}

// ------------------------------------------------------------ enumeration

BinaryTransformRange::BinaryTransformRange(std::size_t d) : d_(d), count_(1) {
  if (d == 0 || d > kMaxEnumerationDim)
    throw std::invalid_argument("enumerate_binary: d must be in [1, " +
                                std::to_string(kMaxEnumerationDim) + "]");
  for (std::size_t i = 0; i < d; ++i) count_ *= d;
}

BinaryTransformRange::iterator::iterator(std::size_t d)
    : current_(std::vector<std::size_t>(d, 0)), done_(false) {}

BinaryTransformRange::iterator& BinaryTransformRange::iterator::operator++() {
  auto& m = current_.map_;
  const std::size_t d = m.size();
  for (std::size_t pos = d; pos-- > 0;) {
    if (++m[pos] < d) return *this;
    m[pos] = 0;
  }
  done_ = true;
  return *this;
}

}  // namespace phireg
