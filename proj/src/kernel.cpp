#include "phireg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace phireg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_square(const Matrix& m, std::size_t d, const char* what) {
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

void check_loss_matrix(const Matrix& m, std::size_t d) {
  check_square(m, d, "loss matrix");
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw std::invalid_argument("loss matrix: non-finite entry");
    if (x < kNegativeClamp || x > 1.0 - kNegativeClamp)
      throw std::invalid_argument("loss matrix: entry outside [0, 1]");
  }
}

// Row maxima of log_b and the rescaled matrix exp(log_b - rowmax) in (0, 1].
struct ScaledB {
  Vec row_log_max;
  Matrix scaled;
};

ScaledB scale_rows(const Matrix& log_b) {
  const std::size_t d = log_b.rows();
  ScaledB out{Vec(d), Matrix(d, d)};
  for (std::size_t i = 0; i < d; ++i) {
    auto r = log_b.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    out.row_log_max[i] = mx;
    for (std::size_t j = 0; j < d; ++j)
      out.scaled(i, j) = std::isfinite(mx) ? std::exp(r[j] - mx) : 0.0;
  }
  return out;
}

// log of sum_k w_k prod_i sum_j psi^k_ij S_ij A_ij, with S the row-scaled B.
double log_kernel_core(const Matrix& scaled, const Matrix& a, const PriorFamily& family) {
  const std::size_t d = family.dim();
  Vec terms(family.count());
  for (std::size_t k = 0; k < family.count(); ++k) {
    const Matrix& psi = family.psi(k).matrix();
    double acc = std::log(family.weight(k));
    for (std::size_t i = 0; i < d && acc != kNegInf; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += psi(i, j) * scaled(i, j) * a(i, j);
      acc += s > 0.0 ? std::log(s) : kNegInf;
    }
    terms[k] = acc;
  }
  return log_sum_exp(terms);
}

}  // namespace

double kernel_log_eval(const Matrix& log_b, const Matrix& a, const PriorFamily& family) {
  const std::size_t d = family.dim();
  check_square(log_b, d, "kernel_log_eval");
  check_square(a, d, "kernel_log_eval");
  for (double x : a.data())
    if (x < 0.0 || !std::isfinite(x)) throw std::invalid_argument("kernel: A must be nonnegative");
  const ScaledB sb = scale_rows(log_b);
  double shift = 0.0;
  for (double m : sb.row_log_max) {
    if (!std::isfinite(m)) return kNegInf;
    shift += m;
  }
  return shift + log_kernel_core(sb.scaled, a, family);
}

double kernel_eval(const Matrix& b, const Matrix& a, const PriorFamily& family) {
  const std::size_t d = family.dim();
  check_square(b, d, "kernel_eval");
  Matrix log_b(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double x = b(i, j);
      if (x < 0.0 || !std::isfinite(x)) throw std::invalid_argument("kernel: B must be nonnegative");
      log_b(i, j) = x > 0.0 ? std::log(x) : kNegInf;
    }
  return std::exp(kernel_log_eval(log_b, a, family));
}

// ------------------------------------------------------------ NaiveEnumMwu

NaiveEnumMwu::NaiveEnumMwu(const PriorFamily& family, double eta) : d_(family.dim()), eta_(eta) {
  if (d_ > kMaxNaiveDim)
    throw std::invalid_argument("NaiveEnumMwu: d must be at most " + std::to_string(kMaxNaiveDim));
  if (!(eta >= 0.0)) throw std::invalid_argument("NaiveEnumMwu: eta must be nonnegative");
  for (const auto& phi : enumerate_binary(d_)) {
    transforms_.push_back(phi);
    log_q_.push_back(prior_log_mass(family, phi));
  }
}

Vec NaiveEnumMwu::distribution() const { return softmax(log_q_).values(); }

StochasticMatrix NaiveEnumMwu::propose() const {
  const Vec q = distribution();
  std::vector<KahanSum> acc(d_ * d_);
  for (std::size_t n = 0; n < transforms_.size(); ++n) {
    const auto& phi = transforms_[n];
    for (std::size_t i = 0; i < d_; ++i) acc[i * d_ + phi[i]] += q[n];
  }
  Matrix m(d_, d_);
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j) m(i, j) = acc[i * d_ + j].value();
  return StochasticMatrix(std::move(m));
}

void NaiveEnumMwu::update(const Matrix& loss_matrix) {
  check_loss_matrix(loss_matrix, d_);
  for (std::size_t n = 0; n < transforms_.size(); ++n) {
    const auto& phi = transforms_[n];
    double l = 0.0;
    for (std::size_t i = 0; i < d_; ++i) l += loss_matrix(i, phi[i]);
    log_q_[n] -= eta_ * l;
  }
}

// ----------------------------------------------------------- KernelizedMwu

KernelizedMwu::KernelizedMwu(PriorFamily family, double eta)
    : family_(std::move(family)), eta_(eta), log_b_(family_.dim(), family_.dim(), 0.0) {
  if (!(eta >= 0.0)) throw std::invalid_argument("KernelizedMwu: eta must be nonnegative");
}

Matrix KernelizedMwu::b() const {
  Matrix out(log_b_.rows(), log_b_.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = std::exp(log_b_(i, j));
  return out;
}

StochasticMatrix KernelizedMwu::propose() const {
  const std::size_t d = dim();
  // The per-row shift is common to every evaluation and cancels in the ratio.
  const ScaledB sb = scale_rows(log_b_);
  Matrix ones(d, d, 1.0);
  const double log_full = log_kernel_core(sb.scaled, ones, family_);
  if (!std::isfinite(log_full))
    throw std::runtime_error("KernelizedMwu: K(B, 11^T) underflowed");
  Matrix phi(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      ones(i, j) = 0.0;
      const double log_removed = log_kernel_core(sb.scaled, ones, family_);
      ones(i, j) = 1.0;
      phi(i, j) = -std::expm1(log_removed - log_full);
    }
  return StochasticMatrix(std::move(phi));
}

void KernelizedMwu::update(const Matrix& loss_matrix) {
  check_loss_matrix(loss_matrix, dim());
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) log_b_(i, j) -= eta_ * loss_matrix(i, j);
}

// ------------------------------------------------------------ FastKernelMwu

FastKernelStats fast_kernel_stats(const Matrix& cumulative_loss, double eta) {
  const std::size_t d = cumulative_loss.rows();
  if (d < 3) throw std::invalid_argument("fast kernel: d must be at least 3");
  check_square(cumulative_loss, d, "fast kernel");
  const double dd = static_cast<double>(d);
  const double delta = 1.0 / (dd * (dd - 2.0));

  FastKernelStats st{Matrix(d, d), 0.0, Matrix(d, d + 1), Vec(d), false};

  // V: row softmax of -eta L.
  for (std::size_t i = 0; i < d; ++i) {
    auto l = cumulative_loss.row(i);
    const double mn = *std::min_element(l.begin(), l.end());
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      st.v(i, k) = std::exp(-eta * (l[k] - mn));
      s += st.v(i, k);
    }
    for (std::size_t k = 0; k < d; ++k) st.v(i, k) /= s;
  }

  // Factors f_uk = V_uk + delta for k < d; column d holds f_uu.
  Matrix log_f(d, d + 1);
  double min_factor = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < d; ++u) {
    for (std::size_t k = 0; k < d; ++k) {
      const double f = st.v(u, k) + delta;
      min_factor = std::min(min_factor, f);
      log_f(u, k) = std::log(f);
    }
    log_f(u, d) = log_f(u, u);
  }

  // Column log-products: log P_k = sum_u log f_uk.
  Vec log_p(d + 1, 0.0);
  for (std::size_t u = 0; u < d; ++u)
    for (std::size_t k = 0; k <= d; ++k) log_p[k] += log_f(u, k);

  // Leave-one-out: C_ik = P_k / f_ik.
  if (min_factor > 1e-100) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k <= d; ++k) st.log_cc(i, k) = log_p[k] - log_f(i, k);
  } else {
    st.prefix_suffix = true;
    for (std::size_t k = 0; k <= d; ++k) {
      double prefix = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        st.log_cc(i, k) = prefix;
        prefix += log_f(i, k);
      }
      double suffix = 0.0;
      for (std::size_t i = d; i-- > 0;) {
        st.log_cc(i, k) += suffix;
        suffix += log_f(i, k);
      }
    }
  }

  // c_t = (1/d) sum_k P_k + P_{d+1}.
  Vec terms(d + 1);
  for (std::size_t k = 0; k < d; ++k) terms[k] = log_p[k] - std::log(dd);
  terms[d] = log_p[d];
  st.log_c = log_sum_exp(terms);

  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += std::exp(st.log_cc(i, k) - st.log_c);
    st.s_over_c[i] = s;
  }
  return st;
}

FastKernelMwu::FastKernelMwu(std::size_t d, double eta) : d_(d), eta_(eta), cum_loss_(d, d, 0.0) {
  if (d < 3) throw std::invalid_argument("FastKernelMwu: d must be at least 3");
  if (!(eta >= 0.0)) throw std::invalid_argument("FastKernelMwu: eta must be nonnegative");
}

StochasticMatrix FastKernelMwu::propose() const {
  const FastKernelStats st = fast_kernel_stats(cum_loss_, eta_);
  const double dd = static_cast<double>(d_);
  const double delta = 1.0 / (dd * (dd - 2.0));
  Matrix phi(d_, d_);
  for (std::size_t i = 0; i < d_; ++i) {
    const double self_ratio = std::exp(st.log_cc(i, d_) - st.log_c);
    const double spread = st.s_over_c[i] / (dd * dd * (dd - 2.0));
    for (std::size_t j = 0; j < d_; ++j) {
      const double ratio = std::exp(st.log_cc(i, j) - st.log_c);
      const double diag = delta + (i == j ? 1.0 : 0.0);
      phi(i, j) = st.v(i, j) * (ratio / dd + spread + diag * self_ratio);
    }
  }
  return StochasticMatrix(std::move(phi));
}

void FastKernelMwu::update(const Matrix& loss_matrix) {
  check_loss_matrix(loss_matrix, d_);
  cum_loss_ += loss_matrix;
}

// ---------------------------------------------------------------- KernelMwu

namespace {
std::variant<KernelizedMwu, FastKernelMwu> make_engine(std::size_t d, double eta) {
  if (d == 2) return KernelizedMwu(PriorFamily(d), eta);
  return FastKernelMwu(d, eta);
}
}  // namespace

KernelMwu::KernelMwu(std::size_t d, double eta) : d_(d), eta_(eta), impl_(make_engine(d, eta)) {}

StochasticMatrix KernelMwu::propose() const {
  return std::visit([](const auto& e) { return e.propose(); }, impl_);
}

void KernelMwu::update(const Matrix& loss_matrix) {
  std::visit([&](auto& e) { e.update(loss_matrix); }, impl_);
}

}  // namespace phireg
