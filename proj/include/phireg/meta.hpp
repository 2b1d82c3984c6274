#pragma once

// Meta multiplicative weights over a set of transform-proposing base learners.
//
// Each round: every base proposes phi^h, the meta weights w combine them into
// phi = sum_h w_h phi^h, and the learner plays the stationary distribution
// p = phi^T p. After the loss l arrives, base h is charged
// <phi^h, p l^T> = p^T phi^h l and every base receives M = p l^T.

#include <cstddef>
#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phireg/bm.hpp"
#include "phireg/kernel.hpp"
#include "phireg/mwu.hpp"
#include "phireg/simplex.hpp"

namespace phireg {

/// 2 * ceil(log2 d), the number of geometric learning rates.
std::size_t rate_grid_size(std::size_t d);

/// eta_h = sqrt(2^h / T) for h = 1..rate_grid_size(d).
Vec rate_grid(std::size_t d, std::size_t horizon);

/// Bilinear form p^T phi l.
double transform_loss(const StochasticMatrix& phi, std::span<const double> p,
                      std::span<const double> l);

template <class Base>
class MetaAggregator {
 public:
  MetaAggregator(std::vector<Base> bases, Vec base_etas, double meta_eta, std::size_t horizon)
      : bases_(std::move(bases)),
        base_etas_(std::move(base_etas)),
        horizon_(horizon),
        meta_(ProbVector::uniform(bases_.size()), meta_eta) {
    if (bases_.empty()) throw std::invalid_argument("MetaAggregator: no base learners");
    if (horizon == 0) throw std::invalid_argument("MetaAggregator: horizon must be positive");
    d_ = bases_.front().dim();
    for (const auto& b : bases_)
      if (b.dim() != d_) throw std::invalid_argument("MetaAggregator: base dimensions differ");
  }

  std::size_t dim() const noexcept { return d_; }
  std::size_t base_count() const noexcept { return bases_.size(); }
  std::size_t horizon() const noexcept { return horizon_; }
  /// Completed rounds.
  std::size_t round() const noexcept { return round_; }
  double meta_eta() const noexcept { return meta_.eta(); }
  const Vec& base_etas() const noexcept { return base_etas_; }
  const std::vector<Base>& bases() const noexcept { return bases_; }

  ProbVector weights() const { return meta_.current(); }

  /// Phase one of a round. Throws ProtocolError if the previous proposal has
  /// not been fed, and once the horizon is exhausted.
  ProbVector propose() {
    if (p_) throw ProtocolError("propose called twice without feed");
    if (round_ >= horizon_) throw ProtocolError("horizon exceeded");
    const ProbVector w = meta_.current();
    proposals_.clear();
    proposals_.reserve(bases_.size());
    Matrix agg(d_, d_);
    for (std::size_t h = 0; h < bases_.size(); ++h) {
      proposals_.push_back(bases_[h].propose());
      Matrix part = proposals_.back().matrix();
      part *= w[h];
      agg += part;
    }
    aggregated_ = StochasticMatrix(std::move(agg));
    p_ = stationary_distribution(aggregated_);
    return *p_;
  }

  /// Phase two: the loss of the round just proposed.
  void feed(const LossVector& loss) {
    if (!p_) throw ProtocolError("feed called before propose");
    if (loss.size() != d_) throw std::invalid_argument("feed: dimension mismatch");
    const Matrix m = outer_product(*p_, loss);
    base_losses_.assign(bases_.size(), 0.0);
    for (std::size_t h = 0; h < bases_.size(); ++h)
      base_losses_[h] = std::clamp(transform_loss(proposals_[h], p_->span(), loss.span()), 0.0, 1.0);
    for (auto& b : bases_) b.update(m);
    meta_.update(base_losses_);
    p_.reset();
    ++round_;
  }

  const StochasticMatrix& aggregated() const noexcept { return aggregated_; }
  const std::vector<StochasticMatrix>& base_proposals() const noexcept { return proposals_; }
  /// Meta losses charged in the last completed round.
  const Vec& base_losses() const noexcept { return base_losses_; }

 private:
  std::vector<Base> bases_;
  Vec base_etas_;
  std::size_t horizon_;
  std::size_t d_ = 0;
  std::size_t round_ = 0;
  Mwu meta_;
  std::vector<StochasticMatrix> proposals_;
  StochasticMatrix aggregated_;
  std::optional<ProbVector> p_;
  Vec base_losses_;
};

/// Meta MWU over kernel-MWU learners at the geometric rates.
using KernelMeta = MetaAggregator<KernelMwu>;
/// Meta MWU over BM-reductions, one per (prior psi^k, rate eta_h) pair.
using BmMeta = MetaAggregator<BmReduction>;

/// Meta rate sqrt(ln M / T) unless overridden.
KernelMeta make_kernel_meta(std::size_t d, std::size_t horizon, std::optional<double> meta_eta = std::nullopt);

/// Base (k, h) sits at index k * rate_grid_size(d) + h. Meta rate
/// sqrt(ln((d+1) M) / T) unless overridden.
BmMeta make_bm_meta(std::size_t d, std::size_t horizon, std::optional<double> meta_eta = std::nullopt);

}  // namespace phireg
