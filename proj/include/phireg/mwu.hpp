#pragma once

// Multiplicative weights (Hedge) and optimistic multiplicative weights over a
// finite action set with an arbitrary prior. Weights live in log space and are
// shifted so the largest log-weight is 0 after every update.

#include <cstddef>
#include <span>

#include "phireg/simplex.hpp"

namespace phireg {

/// x_{t+1,i} ∝ x_{t,i} exp(-eta l_{t,i}), x_1 = prior.
class Mwu {
 public:
  /// `max_loss` bounds accepted loss entries (1 for standard losses).
  Mwu(ProbVector prior, double eta, double max_loss = 1.0);

  std::size_t size() const noexcept { return log_w_.size(); }
  double eta() const noexcept { return eta_; }
  const ProbVector& prior() const noexcept { return prior_; }
  const Vec& log_weights() const noexcept { return log_w_; }

  ProbVector current() const { return softmax(log_w_); }
  void update(std::span<const double> loss);
  void update(const LossVector& loss) { update(loss.span()); }

 private:
  ProbVector prior_;
  double eta_;
  double max_loss_;
  Vec log_w_;
};

/// Optimistic MWU: p_t ∝ p̂_t exp(-eta l_{t-1}), p̂_{t+1} ∝ p̂_t exp(-eta l_t), l_0 = 0.
class Omwu {
 public:
  Omwu(ProbVector prior, double eta, double max_loss = 1.0);

  std::size_t size() const noexcept { return log_hat_.size(); }
  double eta() const noexcept { return eta_; }
  const ProbVector& prior() const noexcept { return prior_; }
  const Vec& log_hat_weights() const noexcept { return log_hat_; }
  const Vec& last_loss() const noexcept { return last_loss_; }

  /// The played distribution p_t.
  ProbVector predict() const;
  /// The auxiliary distribution p̂_t.
  ProbVector hat() const { return softmax(log_hat_); }
  void update(std::span<const double> loss);
  void update(const LossVector& loss) { update(loss.span()); }

 private:
  ProbVector prior_;
  double eta_;
  double max_loss_;
  Vec log_hat_;
  Vec last_loss_;
};

}  // namespace phireg
