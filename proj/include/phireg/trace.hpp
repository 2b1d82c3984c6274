#pragma once

// Recorded play: what each learner proposed and the loss it then observed.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "phireg/simplex.hpp"

namespace phireg {

struct ExpertTrace {
  std::vector<ProbVector> p;
  std::vector<LossVector> loss;

  ExpertTrace() = default;
  ExpertTrace(std::vector<ProbVector> ps, std::vector<LossVector> ls) : p(std::move(ps)), loss(std::move(ls)) {
    validate();
  }

  std::size_t rounds() const noexcept { return p.size(); }
  std::size_t dim() const noexcept { return p.empty() ? 0 : p.front().size(); }
  bool empty() const noexcept { return p.empty(); }

  void push(ProbVector pt, LossVector lt) {
    if (!p.empty() && (pt.size() != dim() || lt.size() != dim()))
      throw std::invalid_argument("ExpertTrace: dimension mismatch");
    if (pt.size() != lt.size()) throw std::invalid_argument("ExpertTrace: dimension mismatch");
    p.push_back(std::move(pt));
    loss.push_back(std::move(lt));
  }

  void validate() const {
    if (p.size() != loss.size()) throw std::invalid_argument("ExpertTrace: length mismatch");
    for (std::size_t t = 0; t < p.size(); ++t)
      if (p[t].size() != dim() || loss[t].size() != dim())
        throw std::invalid_argument("ExpertTrace: dimension mismatch at round " + std::to_string(t + 1));
  }
};

/// Self-play record for N players sharing one action count.
struct JointTrace {
  std::vector<ExpertTrace> players;
  /// transforms[n][t]; empty unless requested.
  std::vector<std::vector<StochasticMatrix>> transforms;
  /// meta_weights[n][t]: the weights w_t over the player's base learners.
  std::vector<std::vector<Vec>> meta_weights;
  /// path_length[t] = sum_{s=2}^{t+1} sum_n ||p_s - p_{s-1}||_1^2.
  Vec path_length;
  /// Largest ||p - phi^T p||_1 seen at any round for any player.
  double max_stationary_residual = 0.0;

  std::size_t n_players() const noexcept { return players.size(); }
  std::size_t rounds() const noexcept { return players.empty() ? 0 : players.front().rounds(); }
  std::size_t dim() const noexcept { return players.empty() ? 0 : players.front().dim(); }
};

}  // namespace phireg
