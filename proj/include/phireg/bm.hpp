#pragma once

// Prior-aware BM-reduction: one external-regret learner per row of the
// transform, learner i started at row i of a prior matrix psi.

#include <cstddef>
#include <variant>
#include <vector>

#include "phireg/mwu.hpp"
#include "phireg/simplex.hpp"

namespace phireg {

enum class SubKind { plain, optimistic };

class BmReduction {
 public:
  BmReduction(const StochasticMatrix& psi, double eta, SubKind kind = SubKind::plain);

  std::size_t dim() const noexcept { return prior_.size(); }
  double eta() const noexcept { return eta_; }
  SubKind kind() const noexcept { return kind_; }
  const StochasticMatrix& prior() const noexcept { return prior_; }

  /// Row i is the current distribution of learner i (the optimistic
  /// prediction when the learners are OMWU).
  StochasticMatrix propose() const;

  /// Learner i receives row i of M, i.e. p_i * l for M = p l^T.
  void update(const Matrix& loss_matrix);

 private:
  StochasticMatrix prior_;
  double eta_;
  SubKind kind_;
  std::variant<std::vector<Mwu>, std::vector<Omwu>> subs_;
};

}  // namespace phireg
