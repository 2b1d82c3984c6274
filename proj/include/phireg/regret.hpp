#pragma once

// Post-hoc regret of recorded play against transforms, experts and quantiles,
// and the equilibrium gaps of self-play. All sums run forward in round order
// with compensated accumulation; ties go to the lowest index.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "phireg/game.hpp"
#include "phireg/priors.hpp"
#include "phireg/simplex.hpp"
#include "phireg/trace.hpp"

namespace phireg {

/// sum_t <p_t - phi^T p_t, l_t>.
double regret_against(const ExpertTrace& trace, const StochasticMatrix& phi);
double regret_against(const ExpertTrace& trace, const BinaryTransform& phi);

/// G_ij = sum_t p_{t,i} l_{t,j}. Every binary-transform regret is
/// sum_i G_{i,i} - G_{i,phi(i)}.
Matrix cross_loss(const ExpertTrace& trace);

/// Cumulative loss of each expert.
Vec cumulative_losses(const ExpertTrace& trace);
/// sum_t <p_t, l_t>.
double learner_loss(const ExpertTrace& trace);

struct SwapResult {
  BinaryTransform comparator;
  double regret;
};
SwapResult best_swap(const ExpertTrace& trace);

struct ExternalResult {
  std::size_t expert;
  double regret;
};
ExternalResult best_external(const ExpertTrace& trace);

struct InternalResult {
  std::size_t from;
  std::size_t to;
  double regret;
};
/// Max over ordered pairs i != j of sum_t p_{t,i}(l_{t,i} - l_{t,j}).
InternalResult best_internal(const ExpertTrace& trace);

/// Learner loss minus the ceil(eps d)-th smallest cumulative expert loss.
/// Requires eps in [1/d, 1].
double quantile_regret(const ExpertTrace& trace, double eps);

struct RegretReport {
  double external = 0.0;
  double internal = 0.0;
  double swap = 0.0;
  BinaryTransform swap_comparator;
  /// Regret against every binary transform, in enumerate_binary order.
  std::optional<Vec> per_phi;
  std::map<double, double> quantile;
};

/// per_phi is filled when d <= per_phi_max_dim.
RegretReport regret_report(const ExpertTrace& trace, const std::vector<double>& quantile_eps = {},
                           std::size_t per_phi_max_dim = 4);

struct EquilibriumGaps {
  double cce_gap = 0.0;
  double ce_gap = 0.0;
};

/// Gaps of the empirical play over the first `rounds` rounds (all rounds when
/// 0), computed from each player's recorded loss vectors.
EquilibriumGaps equilibrium_gaps(const JointTrace& trace, std::size_t rounds = 0);

/// The same gaps by direct enumeration over joint actions and binary
/// transforms, using only the game tensors. Requires d^N <= budget.
EquilibriumGaps equilibrium_gaps_direct(const JointTrace& trace, const GameSpec& game, std::size_t rounds = 0,
                                        std::size_t budget = 10'000);

/// CSV with header t,p_1..p_d,loss_1..loss_d; t is 1-based.
void write_trace_csv(const ExpertTrace& trace, const std::filesystem::path& path);
/// Columns are located by header name, so extra columns are ignored.
ExpertTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace phireg
