#pragma once

// N-player normal-form games and optimistic meta-learner self-play.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phireg/bm.hpp"
#include "phireg/mwu.hpp"
#include "phireg/priors.hpp"
#include "phireg/simplex.hpp"
#include "phireg/trace.hpp"

namespace phireg {

/// Default cap on d^N for dense loss tensors.
inline constexpr std::size_t kDefaultJointBudget = 1'000'000;

/// losses[n] is player n's loss over joint actions, flattened row-major over
/// (a_1, ..., a_N): index = sum_n a_n d^(N-1-n).
struct GameSpec {
  std::size_t n_players = 0;
  std::size_t d = 0;
  std::vector<Vec> losses;
  std::vector<std::string> tags;

  std::size_t profile_count() const;
  bool has_tag(const std::string& tag) const;
  std::size_t index(const std::vector<std::size_t>& actions) const;
  std::vector<std::size_t> actions(std::size_t index) const;

  /// Throws std::invalid_argument on inconsistent sizes, entries outside
  /// [0, 1], or a zero_sum/constant_sum tag whose sum is not constant.
  void validate() const;
};

/// d^N, or BudgetError if it exceeds `budget`.
std::size_t checked_profile_count(std::size_t n_players, std::size_t d,
                                  std::size_t budget = kDefaultJointBudget);

/// Entry a = E_{a^(-n) ~ profile}[loss_n(a, a^(-n))].
LossVector expected_loss_vector(const GameSpec& game, std::size_t player,
                                const std::vector<ProbVector>& profile,
                                std::size_t budget = kDefaultJointBudget);

/// Every player's expected loss vector in one pass over the joint actions.
std::vector<LossVector> expected_loss_vectors(const GameSpec& game, const std::vector<ProbVector>& profile,
                                              std::size_t budget = kDefaultJointBudget);

/// Two players; player 1 losses i.i.d. uniform, player 2 = 1 - player 1.
GameSpec make_zero_sum(std::size_t d, std::uint64_t seed);
/// Pairwise matrices A^(m,n) with A^(n,m) = 1 - A^(m,n)^T; each player averages
/// over its N - 1 opponents so the losses sum to N/2 everywhere.
GameSpec make_constant_sum_polymatrix(std::size_t n_players, std::size_t d, std::uint64_t seed);
/// Player 1 loses on a match, player 2 on a mismatch.
GameSpec make_matching_pennies();
/// Independent i.i.d. uniform losses for every player.
GameSpec make_random_game(std::size_t n_players, std::size_t d, std::uint64_t seed);

std::string game_to_json(const GameSpec& game);
GameSpec game_from_json(const std::string& text);
GameSpec load_game(const std::filesystem::path& path);
void save_game(const GameSpec& game, const std::filesystem::path& path);

struct GameParams {
  std::optional<double> base_eta;  ///< default 1/(16N)
  std::optional<double> meta_eta;  ///< default 1/(64N)
  std::optional<double> lambda;    ///< default N
};

struct ResolvedGameParams {
  double base_eta;
  double meta_eta;
  double lambda;
};

ResolvedGameParams resolve(const GameParams& params, std::size_t n_players);

/// One player's optimistic meta learner over d+2 bases: d+1 BM-reductions with
/// OMWU rows (priors psi^1..psi^{d+1}) and one OMWU over actions whose
/// transform is the constant map to its prediction.
class GamePlayer {
 public:
  GamePlayer(std::size_t d, std::size_t n_players, const GameParams& params = {});

  std::size_t dim() const noexcept { return d_; }
  std::size_t base_count() const noexcept { return d_ + 2; }
  std::size_t round() const noexcept { return round_; }
  const ResolvedGameParams& params() const noexcept { return params_; }

  ProbVector propose();
  void feed(const LossVector& loss);

  /// State of the last proposal.
  const StochasticMatrix& aggregated() const noexcept { return aggregated_; }
  const std::vector<StochasticMatrix>& base_proposals() const noexcept { return proposals_; }
  const Vec& weights() const noexcept { return w_; }
  const Vec& corrections() const noexcept { return correction_; }
  const Vec& predictions() const noexcept { return prediction_; }
  /// Normalized ŵ.
  ProbVector hat_weights() const { return softmax(log_hat_); }

  /// [1/(2d), ..., 1/(2d), 1/4, 1/4].
  static Vec initial_hat_weights(std::size_t d);

 private:
  std::size_t d_;
  ResolvedGameParams params_;
  std::vector<BmReduction> bms_;
  Omwu actions_;
  Vec log_hat_;

  std::size_t round_ = 0;
  std::optional<ProbVector> p_;
  std::vector<StochasticMatrix> proposals_;
  StochasticMatrix aggregated_;
  Vec w_, correction_, prediction_;
  std::vector<Vec> image_now_, image_prev_, image_prev2_;
  Vec prev_p_, prev_loss_;
};

struct SelfPlayOptions {
  GameParams params;
  bool record_transforms = false;
  std::size_t budget = kDefaultJointBudget;
};

JointTrace run_self_play(const GameSpec& game, std::size_t rounds, const SelfPlayOptions& options = {});

}  // namespace phireg
