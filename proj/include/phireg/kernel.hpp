#pragma once

// Exponential weights over all d^d binary transformations with the mixture
// prior, implemented three ways that must agree:
//
//   NaiveEnumMwu    explicit weights over every transform (test oracle, d <= 5)
//   KernelizedMwu   closed-form kernel ratios, O(d^3) per kernel evaluation
//   FastKernelMwu   shared leave-one-out statistics, O(d^2) per round (d >= 3)
//
// Each learner follows the same protocol: propose() returns the mean transform
// phi_t under the current weights, then update(M) consumes the loss matrix
// M_t = p_t l_t^T.

#include <cstddef>
#include <variant>
#include <vector>

#include "phireg/priors.hpp"
#include "phireg/simplex.hpp"

namespace phireg {

/// K(B, A) = sum_phi pi(phi) prod_{phi_ij = 1} B_ij A_ij, evaluated through the
/// product-form closed expression of each mixture component.
double kernel_eval(const Matrix& b, const Matrix& a, const PriorFamily& family);

/// log K(exp(log_b), A). Rows are rescaled by their maxima, so this stays
/// finite long after exp(log_b) would underflow.
double kernel_log_eval(const Matrix& log_b, const Matrix& a, const PriorFamily& family);

/// Largest d accepted by NaiveEnumMwu.
inline constexpr std::size_t kMaxNaiveDim = 5;

class NaiveEnumMwu {
 public:
  NaiveEnumMwu(const PriorFamily& family, double eta);

  std::size_t dim() const noexcept { return d_; }
  StochasticMatrix propose() const;
  void update(const Matrix& loss_matrix);

  /// Normalized weights q_t, indexed in enumerate_binary order.
  Vec distribution() const;

 private:
  std::size_t d_;
  double eta_;
  std::vector<BinaryTransform> transforms_;
  Vec log_q_;
};

class KernelizedMwu {
 public:
  KernelizedMwu(PriorFamily family, double eta);

  std::size_t dim() const noexcept { return family_.dim(); }
  double eta() const noexcept { return eta_; }
  /// (phi_t)_ij = 1 - K(B_t, 11^T - e_i e_j^T) / K(B_t, 11^T).
  StochasticMatrix propose() const;
  void update(const Matrix& loss_matrix);

  /// B_t = exp(-eta * cumulative loss), entrywise.
  Matrix b() const;
  const Matrix& log_b() const noexcept { return log_b_; }

 private:
  PriorFamily family_;
  double eta_;
  Matrix log_b_;
};

/// Round-t statistics of the O(d^2) implementation, kept in log form where the
/// raw d-fold products would underflow. Exposed for white-box tests.
struct FastKernelStats {
  Matrix v;        ///< V_ik: row softmax of -eta L
  double log_c;    ///< log c_t
  Matrix log_cc;   ///< log C_ik, d x (d+1); column d holds the psi^{d+1} products
  Vec s_over_c;    ///< S_i / c_t
  bool prefix_suffix = false;  ///< leave-one-out products took the log prefix/suffix path
};

FastKernelStats fast_kernel_stats(const Matrix& cumulative_loss, double eta);

class FastKernelMwu {
 public:
  FastKernelMwu(std::size_t d, double eta);

  std::size_t dim() const noexcept { return d_; }
  double eta() const noexcept { return eta_; }
  StochasticMatrix propose() const;
  void update(const Matrix& loss_matrix);

  const Matrix& cumulative_loss() const noexcept { return cum_loss_; }

 private:
  std::size_t d_;
  double eta_;
  Matrix cum_loss_;
};

/// The engine used by the meta learners: kernelized for d = 2 (where the fast
/// closed form is singular), fast otherwise.
class KernelMwu {
 public:
  KernelMwu(std::size_t d, double eta);

  std::size_t dim() const noexcept { return d_; }
  double eta() const noexcept { return eta_; }
  bool uses_fast_path() const noexcept { return std::holds_alternative<FastKernelMwu>(impl_); }

  StochasticMatrix propose() const;
  void update(const Matrix& loss_matrix);

 private:
  std::size_t d_;
  double eta_;
  std::variant<KernelizedMwu, FastKernelMwu> impl_;
};

}  // namespace phireg
