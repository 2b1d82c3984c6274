#include "phireg/mwu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace phireg {

namespace {

Vec log_of(const ProbVector& p) {
  Vec out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
  return out;
}

void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("learning rate must be positive");
}

void check_loss(std::span<const double> loss, std::size_t d, double max_loss) {
  if (loss.size() != d) throw std::invalid_argument("loss: dimension mismatch");
  for (double x : loss) {
    if (!std::isfinite(x)) throw std::invalid_argument("loss: non-finite entry");
    if (x < kNegativeClamp || x > max_loss - kNegativeClamp)
      throw std::invalid_argument("loss: entry " + std::to_string(x) + " outside [0, " +
                                  std::to_string(max_loss) + "]");
  }
}

void shift_to_zero_max(Vec& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return;
  for (double& x : v) x -= mx;
}

}  // namespace

Mwu::Mwu(ProbVector prior, double eta, double max_loss)
    : prior_(std::move(prior)), eta_(eta), max_loss_(max_loss), log_w_(log_of(prior_)) {
  check_eta(eta);
  shift_to_zero_max(log_w_);
}

void Mwu::update(std::span<const double> loss) {
  check_loss(loss, size(), max_loss_);
  for (std::size_t i = 0; i < log_w_.size(); ++i) log_w_[i] -= eta_ * loss[i];
  shift_to_zero_max(log_w_);
}

Omwu::Omwu(ProbVector prior, double eta, double max_loss)
    : prior_(std::move(prior)),
      eta_(eta),
      max_loss_(max_loss),
      log_hat_(log_of(prior_)),
      last_loss_(prior_.size(), 0.0) {
  check_eta(eta);
  shift_to_zero_max(log_hat_);
}

ProbVector Omwu::predict() const {
  Vec logits(log_hat_);
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] -= eta_ * last_loss_[i];
  return softmax(logits);
}

void Omwu::update(std::span<const double> loss) {
  check_loss(loss, size(), max_loss_);
  for (std::size_t i = 0; i < log_hat_.size(); ++i) log_hat_[i] -= eta_ * loss[i];
  shift_to_zero_max(log_hat_);
  last_loss_.assign(loss.begin(), loss.end());
}

}  // namespace phireg
