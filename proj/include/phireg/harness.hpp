#pragma once

// Experiment plumbing: configuration, loss generators, expert and game runs,
// result files, and seed sweeps.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phireg/game.hpp"
#include "phireg/regret.hpp"
#include "phireg/rng.hpp"
#include "phireg/simplex.hpp"
#include "phireg/trace.hpp"

namespace phireg {

struct ExperimentConfig {
  std::string mode = "expert";  ///< expert | game | verify
  std::string algorithm = "meta1";
  std::size_t d = 3;
  std::size_t T = 1024;
  std::size_t N = 2;
  std::uint64_t seed = 0;
  std::string generator;  ///< empty: iid_uniform for expert runs, zero_sum for games
  std::string game_file;
  std::filesystem::path out;  ///< empty: nothing written
  std::optional<double> eta;
  std::optional<double> eta_meta;
  std::optional<double> lambda;
  std::string verify_level = "fast";
  double gap = 0.2;          ///< bernoulli_gap mean separation
  std::size_t period = 0;    ///< drifting_best / piecewise_stationary segment length; 0 means T/8
  std::vector<double> quantiles;  ///< empty: 1/d, 1/4, 1/2 where valid
  std::size_t count = 4;     ///< sweep: number of consecutive seeds

  std::string resolved_generator() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

inline const std::vector<std::string>& expert_algorithms() {
  static const std::vector<std::string> ids{"meta1", "meta2", "kernel_mwu_fixed_eta", "bm_mwu", "mwu"};
  return ids;
}
inline const std::vector<std::string>& expert_generators() {
  static const std::vector<std::string> ids{"iid_uniform", "bernoulli_gap", "drifting_best", "piecewise_stationary",
                                            "adversarial_swap_probe"};
  return ids;
}
inline const std::vector<std::string>& game_generators() {
  static const std::vector<std::string> ids{"zero_sum", "polymatrix", "matching_pennies", "random"};
  return ids;
}

/// Sets one field from its textual value. Keys match the CLI flags without the
/// leading dashes; '-' and '_' are interchangeable.
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// key = value lines; '#' starts a comment, [section] headers and quotes
/// around values are ignored.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Seeded loss sequence in [0, 1]^d. Adaptive kinds look at the learner's
/// current distribution, so next() takes it.
class LossGenerator {
 public:
  LossGenerator(std::string kind, std::size_t d, std::size_t horizon, std::uint64_t seed, double gap = 0.2,
                std::size_t period = 0);

  const std::string& kind() const noexcept { return kind_; }
  LossVector next(const ProbVector& p);

 private:
  std::string kind_;
  std::size_t d_;
  std::size_t period_;
  double gap_;
  std::size_t t_ = 0;
  CounterRng rng_;
  std::size_t best_ = 0;
  Vec means_;
};

/// Propose/feed learner over experts.
class ExpertLearner {
 public:
  virtual ~ExpertLearner() = default;
  virtual ProbVector propose() = 0;
  virtual void feed(const LossVector& loss) = 0;
  /// ||p - phi^T p||_1 of the last proposal (0 when no transform is involved).
  virtual double last_residual() const { return 0.0; }
  virtual nlohmann::ordered_json parameters() const = 0;
};

std::unique_ptr<ExpertLearner> make_expert_learner(const ExperimentConfig& config);

/// Explicit-constant regret bounds for the meta learners and for quantile regret.
double kernel_meta_bound(std::size_t horizon, double log_inv_prior, std::size_t rate_count);
double bm_meta_bound(std::size_t horizon, double log_inv_prior, std::size_t d);
double quantile_bound(std::size_t horizon, std::size_t d, double eps, std::size_t rate_count);

struct ExpertRun {
  ExpertTrace trace;
  nlohmann::ordered_json summary;
};

/// Runs the learner against the generator, writes trace.csv and summary.json
/// under config.out when it is set.
ExpertRun run_expert_experiment(const ExperimentConfig& config);

struct GameCheckpoint {
  std::size_t t;
  double cce_gap;
  double ce_gap;
  double path_length;
  double max_external;
};

/// Rounds of a self-play trace that break the loss-difference or the
/// weight-stability invariant.
std::size_t count_loss_difference_violations(const JointTrace& trace, double tol = 1e-12);
std::size_t count_stability_violations(const JointTrace& trace, double tol = 1e-12);

GameCheckpoint game_checkpoint(const JointTrace& trace, std::size_t t);

struct GameRun {
  GameSpec game;
  JointTrace trace;
  nlohmann::ordered_json summary;
};

GameSpec make_game(const ExperimentConfig& config);

/// Writes player_<n>.csv, path_length.csv, game.json and summary.json under
/// config.out when it is set.
GameRun run_game_experiment(const ExperimentConfig& config);

/// Worker count: PHIREGRET_THREADS if set and positive, else the hardware
/// concurrency, never more than `jobs`.
std::size_t worker_count(std::size_t jobs);

/// Runs job(i) for i in [0, jobs) on a pool of worker_count(jobs) threads.
/// The first exception is rethrown after all workers stop.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& job);

/// config.count runs with seeds seed, seed+1, ... in mode config.mode; each run
/// writes into out/seed_<s>. Returns the aggregated summary (also written to
/// out/sweep.json).
nlohmann::ordered_json run_sweep(const ExperimentConfig& config);

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);

}  // namespace phireg
