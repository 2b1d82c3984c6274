#include <doctest.h>

#include <cmath>

#include "phireg/game.hpp"
#include "phireg/rng.hpp"

using namespace phireg;

TEST_CASE("matching pennies expected losses") {
  const GameSpec g = make_matching_pennies();
  const ProbVector u = ProbVector::uniform(2);
  const LossVector l = expected_loss_vector(g, 0, {u, u});
  CHECK(l[0] == doctest::Approx(0.5));
  CHECK(l[1] == doctest::Approx(0.5));
  const LossVector pure = expected_loss_vector(g, 0, {u, ProbVector::vertex(2, 0)});
  CHECK(pure[0] == doctest::Approx(1.0));
  CHECK(pure[1] == doctest::Approx(0.0));
  const auto all = expected_loss_vectors(g, {u, ProbVector::vertex(2, 0)});
  CHECK(all[0][0] == pure[0]);
}

TEST_CASE("single-player expected loss ignores the profile") {
  GameSpec g{1, 3, {Vec{0.1, 0.5, 0.9}}, {}};
  const LossVector l = expected_loss_vector(g, 0, {ProbVector::vertex(3, 2)});
  CHECK(l[0] == doctest::Approx(0.1));
  CHECK(l[2] == doctest::Approx(0.9));
}

TEST_CASE("expected loss matches a direct triple sum") {
  const GameSpec g = make_random_game(3, 3, 5);
  CounterRng rng(8);
  std::vector<ProbVector> prof;
  for (int n = 0; n < 3; ++n) prof.push_back(ProbVector::from_weights({rng.uniform(), rng.uniform(), rng.uniform()}));
  const LossVector l = expected_loss_vector(g, 1, prof);
  for (std::size_t a = 0; a < 3; ++a) {
    double ref = 0.0;
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t z = 0; z < 3; ++z) ref += prof[0][x] * prof[2][z] * g.losses[1][g.index({x, a, z})];
    CHECK(l[a] == doctest::Approx(ref));
  }
}

TEST_CASE("generators honour their sum constraints") {
  const GameSpec zs = make_zero_sum(4, 3);
  for (std::size_t i = 0; i < zs.profile_count(); ++i)
    CHECK(zs.losses[0][i] + zs.losses[1][i] == doctest::Approx(1.0));
  const GameSpec pm = make_constant_sum_polymatrix(3, 3, 4);
  for (std::size_t i = 0; i < pm.profile_count(); ++i) {
    double s = 0.0;
    for (int n = 0; n < 3; ++n) {
      s += pm.losses[n][i];
      CHECK(pm.losses[n][i] >= 0.0);
      CHECK(pm.losses[n][i] <= 1.0);
    }
    CHECK(s == doctest::Approx(1.5));
  }
  CHECK_NOTHROW(zs.validate());
  CHECK_NOTHROW(pm.validate());
  const GameSpec again = make_zero_sum(4, 3);
  CHECK(again.losses == zs.losses);
  CHECK(make_zero_sum(4, 4).losses != zs.losses);
}

TEST_CASE("profile indexing is row-major") {
  const GameSpec g = make_random_game(3, 4, 1);
  CHECK(g.index({1, 2, 3}) == 1 * 16 + 2 * 4 + 3);
  CHECK(g.actions(27) == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("validation and budget") {
  GameSpec bad = make_zero_sum(2, 1);
  bad.losses[0][0] = 1.5;
  CHECK_THROWS(bad.validate());
  GameSpec skew = make_zero_sum(2, 1);
  skew.losses[1][0] = 0.0;
  skew.losses[0][0] = 0.3;
  CHECK_THROWS(skew.validate());
  CHECK_THROWS_AS(checked_profile_count(10, 10), BudgetError);
  CHECK(checked_profile_count(2, 10) == 100);
}

TEST_CASE("JSON round trip") {
  const GameSpec g = make_constant_sum_polymatrix(3, 2, 9);
  const GameSpec back = game_from_json(game_to_json(g));
  CHECK(back.n_players == 3);
  CHECK(back.d == 2);
  CHECK(back.tags == g.tags);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t i = 0; i < g.profile_count(); ++i) CHECK(back.losses[n][i] == g.losses[n][i]);
  CHECK_THROWS(game_from_json(R"({"N": 2, "d": 2, "losses": [[0.1]]})"));
  CHECK_THROWS(game_from_json("not json"));
}

TEST_CASE("default parameters and stability precondition") {
  const ResolvedGameParams p = resolve({}, 4);
  CHECK(p.base_eta == doctest::Approx(1.0 / 64.0));
  CHECK(p.meta_eta == doctest::Approx(1.0 / 256.0));
  CHECK(p.lambda == 4.0);
  CHECK(p.meta_eta * (1.0 + 4.0 * p.lambda) < 0.125);
  GameParams over;
  over.lambda = 0.5;
  CHECK(resolve(over, 2).lambda == 0.5);
}

TEST_CASE("player indicators for the first rounds") {
  const std::size_t d = 3;
  GamePlayer pl(d, 2);
  const Vec w0 = GamePlayer::initial_hat_weights(d);
  (void)pl.propose();
  for (std::size_t k = 0; k < d + 2; ++k) {
    CHECK(pl.weights()[k] == doctest::Approx(w0[k]));
    CHECK(pl.corrections()[k] == 0.0);
    CHECK(pl.predictions()[k] == 0.0);
  }
  CHECK(w0[0] == doctest::Approx(1.0 / 6.0));
  CHECK(w0[d] == 0.25);
  CHECK(w0[d + 1] == 0.25);
  pl.feed(LossVector({0.9, 0.1, 0.4}));
  (void)pl.propose();
  double msum = 0.0;
  for (std::size_t k = 0; k < d + 2; ++k) {
    CHECK(pl.corrections()[k] == 0.0);
    msum += pl.predictions()[k];
  }
  CHECK(msum > 0.0);
  pl.feed(LossVector({0.0, 1.0, 0.4}));
  (void)pl.propose();
  double csum = 0.0;
  for (std::size_t k = 0; k < d + 2; ++k) {
    CHECK(pl.corrections()[k] >= 0.0);
    CHECK(pl.corrections()[k] <= 4.0 * pl.params().lambda);
    csum += pl.corrections()[k];
  }
  CHECK(csum > 0.0);
  CHECK_THROWS_AS(pl.propose(), ProtocolError);
}

TEST_CASE("first play is stationary for the initial mixture") {
  const JointTrace tr = run_self_play(make_zero_sum(3, 2), 1, {.params = {}, .record_transforms = true});
  REQUIRE(tr.rounds() == 1);
  const Matrix& phi = tr.transforms[0][0].matrix();
  CHECK(stationary_residual(phi, tr.players[0].p[0].span()) <= 1e-9);
}

TEST_CASE("swap-symmetric games give mirrored trajectories") {
  const std::size_t d = 3;
  CounterRng rng(2);
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.uniform();
  GameSpec g{2, d, {Vec(d * d), Vec(d * d)}, {}};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      g.losses[0][i * d + j] = a(i, j);
      g.losses[1][i * d + j] = a(j, i);
    }
  const JointTrace tr = run_self_play(g, 200);
  for (std::size_t t = 0; t < 200; ++t)
    for (std::size_t i = 0; i < d; ++i) CHECK(tr.players[0].p[t][i] == tr.players[1].p[t][i]);
}

TEST_CASE("self-play trace bookkeeping") {
  const JointTrace tr = run_self_play(make_constant_sum_polymatrix(3, 3, 6), 300);
  CHECK(tr.n_players() == 3);
  CHECK(tr.rounds() == 300);
  CHECK(tr.path_length.size() == 300);
  CHECK(tr.path_length[0] == 0.0);
  for (std::size_t t = 1; t < 300; ++t) CHECK(tr.path_length[t] >= tr.path_length[t - 1]);
  CHECK(tr.max_stationary_residual <= 1e-8);
  for (const auto& per : tr.meta_weights)
    for (const Vec& w : per) {
      double s = 0.0;
      for (double x : w) s += x;
      CHECK(s == doctest::Approx(1.0));
    }
}
