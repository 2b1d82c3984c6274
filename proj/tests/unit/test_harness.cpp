#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phireg/harness.hpp"

using namespace phireg;

namespace {
std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}
std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("phireg_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}
}  // namespace

TEST_CASE("config text parsing") {
  const ExperimentConfig c = parse_config(R"(
# comment
[run]
alg = "meta2"
d = 5
T = 200   # trailing comment
eta-meta = 0.05
seed = 18446744073709551615
quantiles = 0.25, 0.5
)");
  CHECK(c.algorithm == "meta2");
  CHECK(c.d == 5);
  CHECK(c.T == 200);
  CHECK(c.eta_meta.value() == 0.05);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.quantiles == std::vector<double>{0.25, 0.5});
  ExperimentConfig d;
  apply_config_value(d, "verify_level", "full");
  CHECK(d.verify_level == "full");
  CHECK_THROWS(parse_config("bogus = 1"));
  CHECK_THROWS(parse_config("d = three"));
  CHECK_THROWS(parse_config("no equals sign"));
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.d = 1;
  CHECK_THROWS(c.validate());
  c = {};
  c.algorithm = "nope";
  CHECK_THROWS(c.validate());
  c = {};
  c.eta = 0.1;
  CHECK_THROWS(c.validate());
  c.algorithm = "mwu";
  CHECK_NOTHROW(c.validate());
  c = {};
  c.lambda = 1.0;
  CHECK_THROWS(c.validate());
  c.mode = "game";
  CHECK_NOTHROW(c.validate());
  CHECK(c.resolved_generator() == "zero_sum");
  CHECK(ExperimentConfig{}.resolved_generator() == "iid_uniform");
}

TEST_CASE("loss generators are deterministic and in range") {
  for (const auto& kind : expert_generators()) {
    LossGenerator a(kind, 4, 100, 7), b(kind, 4, 100, 7), c(kind, 4, 100, 8);
    bool differs = false;
    ProbVector p = ProbVector::from_weights({0.1, 0.2, 0.3, 0.4});
    for (int t = 0; t < 100; ++t) {
      const LossVector x = a.next(p), y = b.next(p), z = c.next(p);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(x[i] == y[i]);
        CHECK(x[i] >= 0.0);
        CHECK(x[i] <= 1.0);
        differs = differs || x[i] != z[i];
      }
    }
    CHECK(differs);
  }
  CHECK_THROWS(LossGenerator("nope", 3, 10, 1));
}

TEST_CASE("expert runs are reproducible byte for byte") {
  ExperimentConfig c;
  c.algorithm = "meta1";
  c.d = 3;
  c.T = 1024;
  c.seed = 7;
  const auto d1 = scratch("a"), d2 = scratch("b");
  c.out = d1;
  const ExpertRun r = run_expert_experiment(c);
  c.out = d2;
  run_expert_experiment(c);
  CHECK(slurp(d1 / "summary.json") == slurp(d2 / "summary.json"));
  CHECK(slurp(d1 / "trace.csv") == slurp(d2 / "trace.csv"));
  CHECK(r.summary["per_phi"].size() == 27);
  CHECK(r.summary["bounds"]["violations"] == 0);
  CHECK(r.summary["max_stationary_residual"].get<double>() <= 1e-8);
  CHECK(r.trace.rounds() == 1024);
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("every expert algorithm runs") {
  for (const auto& alg : expert_algorithms()) {
    ExperimentConfig c;
    c.algorithm = alg;
    c.d = 4;
    c.T = 64;
    c.generator = "bernoulli_gap";
    const ExpertRun r = run_expert_experiment(c);
    CHECK(std::isfinite(r.summary["regret"]["swap"].get<double>()));
    CHECK(r.summary["regret"]["swap"].get<double>() >= r.summary["regret"]["external"].get<double>() - 1e-12);
  }
}

TEST_CASE("zero-sum self-play gap shrinks") {
  ExperimentConfig c;
  c.mode = "game";
  c.d = 3;
  c.T = 4096;
  c.seed = 1;
  const auto dir = scratch("game");
  c.out = dir;
  const GameRun r = run_game_experiment(c);
  const auto& cps = r.summary["checkpoints"];
  REQUIRE(cps.size() == 3);
  CHECK(cps[0]["t"] == 1024);
  CHECK(cps[2]["cce_gap"].get<double>() < cps[0]["cce_gap"].get<double>());
  CHECK(r.summary["violations"]["loss_difference"] == 0);
  CHECK(r.summary["violations"]["multiplicative_stability"] == 0);
  CHECK(r.summary["direct_gap_check"]["max_abs_diff"].get<double>() <= 1e-9);
  for (const char* f : {"player_1.csv", "player_2.csv", "path_length.csv", "game.json", "summary.json"})
    CHECK(std::filesystem::exists(dir / f));
  const GameSpec g = load_game(dir / "game.json");
  for (std::size_t i = 0; i < g.profile_count(); ++i)
    CHECK(g.losses[0][i] + g.losses[1][i] == doctest::Approx(1.0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("worker pool") {
  ::setenv("PHIREGRET_THREADS", "2", 1);
  CHECK(worker_count(10) == 2);
  CHECK(worker_count(1) == 1);
  ::setenv("PHIREGRET_THREADS", "0", 1);
  CHECK(worker_count(3) >= 1);
  ::unsetenv("PHIREGRET_THREADS");
  std::atomic<int> sum{0};
  parallel_for(100, [&](std::size_t i) { sum += static_cast<int>(i); });
  CHECK(sum == 4950);
  CHECK_THROWS(parallel_for(8, [](std::size_t i) {
    if (i == 5) throw std::runtime_error("boom");
  }));
}

TEST_CASE("sweep writes one directory per seed") {
  ExperimentConfig c;
  c.algorithm = "mwu";
  c.d = 3;
  c.T = 50;
  c.seed = 10;
  c.count = 3;
  const auto dir = scratch("sweep");
  c.out = dir;
  const auto s = run_sweep(c);
  CHECK(s["runs"].size() == 3);
  CHECK(s["runs"][2]["seed"] == 12);
  for (int k = 10; k < 13; ++k) CHECK(std::filesystem::exists(dir / ("seed_" + std::to_string(k)) / "summary.json"));
  CHECK(std::filesystem::exists(dir / "sweep.json"));
  std::filesystem::remove_all(dir);
}
