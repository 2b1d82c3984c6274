// phiregret: run expert or game experiments, seed sweeps, and self-checks.
//
//   phiregret expert --alg meta1 --d 3 --T 1024 --seed 7 --out runs/a
//   phiregret game --gen zero_sum --d 5 --T 10000 --out runs/g
//   phiregret verify --verify-level full
//   phiregret sweep --mode expert --count 8 --out runs/sweep
//
// Flags override values read from --config. Exit status is 0 on success and
// 1 on any error or failed check.

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "phireg/harness.hpp"
#include "phireg/verify.hpp"

namespace {

struct FlagSet {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::vector<std::string> storage;
};

void add_flags(CLI::App& app, FlagSet& flags) {
  static const std::vector<std::pair<std::string, std::string>> known{
      {"mode", "expert | game (sweep only)"},
      {"alg", "meta1 | meta2 | kernel_mwu_fixed_eta | bm_mwu | mwu"},
      {"d", "number of experts / actions per player"},
      {"T", "rounds"},
      {"N", "players (game mode)"},
      {"seed", "64-bit seed"},
      {"gen", "loss or game generator"},
      {"game", "game JSON file (overrides --gen)"},
      {"out", "output directory"},
      {"eta", "fixed learning rate / game base rate"},
      {"eta-meta", "meta learning rate"},
      {"lambda", "game stability correction scale"},
      {"verify-level", "fast | full"},
      {"gap", "bernoulli_gap / drifting_best mean separation"},
      {"period", "segment length for drifting_best / piecewise_stationary"},
      {"quantiles", "comma-separated eps values"},
      {"count", "sweep: number of seeds"},
  };
  flags.storage.reserve(known.size());
  app.add_option("--config", flags.config_file, "key = value config file");
  for (const auto& [name, help] : known) {
    flags.storage.emplace_back();
    CLI::Option* opt = app.add_option("--" + name, flags.storage.back(), help);
    flags.options.emplace_back(name, opt);
  }
}

phireg::ExperimentConfig build_config(const FlagSet& flags, const std::string& mode) {
  phireg::ExperimentConfig c;
  if (!flags.config_file.empty()) c = phireg::load_config(flags.config_file);
  if (mode != "sweep") c.mode = mode;
  for (std::size_t i = 0; i < flags.options.size(); ++i) {
    if (flags.options[i].second->count() == 0) continue;
    const std::string& key = flags.options[i].first;
    if (key == "mode" && mode != "sweep" && flags.storage[i] != mode)
      throw std::invalid_argument("--mode " + flags.storage[i] + " conflicts with subcommand " + mode);
    phireg::apply_config_value(c, key, flags.storage[i]);
  }
  c.validate();
  return c;
}

int run_verify(const phireg::ExperimentConfig& c) {
  const auto results = phireg::run_verification_suite(c.verify_level, c.seed == 0 ? 1 : c.seed);
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed;
    std::printf("%s %-28s observed=%.3e limit=%.1e %.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.observed, r.limit, r.seconds, r.detail.c_str());
  }
  std::printf("%s: %zu checks\n", ok ? "ok" : "FAILED", results.size());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Comparator-adaptive swap-regret learners and game dynamics"};
  app.require_subcommand(1);
  struct Sub {
    const char* name;
    const char* help;
    CLI::App* app = nullptr;
    FlagSet flags;
  };
  std::vector<Sub> subs(4);
  subs[0] = {"expert", "run one expert-problem experiment"};
  subs[1] = {"game", "run one self-play experiment"};
  subs[2] = {"verify", "run the self-check suite"};
  subs[3] = {"sweep", "run consecutive seeds in parallel (PHIREGRET_THREADS caps workers)"};
  for (auto& s : subs) {
    s.app = app.add_subcommand(s.name, s.help);
    add_flags(*s.app, s.flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      const std::string name = s.name;
      const phireg::ExperimentConfig c = build_config(s.flags, name);
      if (name == "verify") return run_verify(c);
      nlohmann::ordered_json summary;
      if (name == "expert") summary = phireg::run_expert_experiment(c).summary;
      else if (name == "game") summary = phireg::run_game_experiment(c).summary;
      else summary = phireg::run_sweep(c);
      std::cout << summary.dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
