#include "phireg/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "phireg/meta.hpp"
#include "phireg/rng.hpp"

namespace phireg {

// ---------------------------------------------------------------- GameSpec

std::size_t checked_profile_count(std::size_t n_players, std::size_t d, std::size_t budget) {
  if (n_players == 0 || d == 0) throw std::invalid_argument("game: N and d must be positive");
  std::size_t count = 1;
  for (std::size_t n = 0; n < n_players; ++n) {
    if (count > budget / d)
      throw BudgetError("game: d^N exceeds the joint-action budget of " + std::to_string(budget));
    count *= d;
  }
  return count;
}

std::size_t GameSpec::profile_count() const {
  return checked_profile_count(n_players, d, std::numeric_limits<std::size_t>::max());
}

bool GameSpec::has_tag(const std::string& tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

std::size_t GameSpec::index(const std::vector<std::size_t>& actions) const {
  if (actions.size() != n_players) throw std::invalid_argument("GameSpec::index: wrong profile size");
  std::size_t idx = 0;
  for (std::size_t a : actions) {
    if (a >= d) throw std::invalid_argument("GameSpec::index: action out of range");
    idx = idx * d + a;
  }
  return idx;
}

std::vector<std::size_t> GameSpec::actions(std::size_t index) const {
  std::vector<std::size_t> a(n_players);
  for (std::size_t n = n_players; n-- > 0;) {
    a[n] = index % d;
    index /= d;
  }
  return a;
}

void GameSpec::validate() const {
  if (n_players == 0) throw std::invalid_argument("game: N must be positive");
  if (d == 0) throw std::invalid_argument("game: d must be positive");
  if (losses.size() != n_players) throw std::invalid_argument("game: expected one loss tensor per player");
  const std::size_t count = profile_count();
  for (std::size_t n = 0; n < n_players; ++n) {
    if (losses[n].size() != count)
      throw std::invalid_argument("game: loss tensor " + std::to_string(n) + " must have d^N entries");
    for (double x : losses[n])
      if (!std::isfinite(x) || x < 0.0 || x > 1.0)
        throw std::invalid_argument("game: loss entries must lie in [0, 1]");
  }
  if (has_tag("zero_sum") || has_tag("constant_sum")) {
    auto total = [&](std::size_t a) {
      double s = 0.0;
      for (std::size_t n = 0; n < n_players; ++n) s += losses[n][a];
      return s;
    };
    const double ref = total(0);
    for (std::size_t a = 1; a < count; ++a)
      if (std::abs(total(a) - ref) > 1e-9)
        throw std::invalid_argument("game: tagged constant-sum but the player sum varies");
  }
}

// ---------------------------------------------------------- expected losses

namespace {

void check_profile(const GameSpec& game, const std::vector<ProbVector>& profile) {
  if (profile.size() != game.n_players) throw std::invalid_argument("profile: one distribution per player");
  for (const auto& p : profile)
    if (p.size() != game.d) throw std::invalid_argument("profile: dimension mismatch");
}

LossVector clamped_loss(Vec v) {
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return LossVector(std::move(v));
}

}  // namespace

LossVector expected_loss_vector(const GameSpec& game, std::size_t player,
                                const std::vector<ProbVector>& profile, std::size_t budget) {
  if (player >= game.n_players) throw std::invalid_argument("expected_loss_vector: player out of range");
  check_profile(game, profile);
  const std::size_t count = checked_profile_count(game.n_players, game.d, budget);
  std::vector<KahanSum> acc(game.d);
  std::vector<std::size_t> a(game.n_players, 0);
  for (std::size_t idx = 0; idx < count; ++idx) {
    double w = 1.0;
    for (std::size_t j = 0; j < game.n_players && w != 0.0; ++j)
      if (j != player) w *= profile[j][a[j]];
    if (w != 0.0) acc[a[player]] += w * game.losses[player][idx];
    for (std::size_t pos = game.n_players; pos-- > 0;) {
      if (++a[pos] < game.d) break;
      a[pos] = 0;
    }
  }
  Vec out(game.d);
  for (std::size_t i = 0; i < game.d; ++i) out[i] = acc[i].value();
  return clamped_loss(std::move(out));
}

std::vector<LossVector> expected_loss_vectors(const GameSpec& game, const std::vector<ProbVector>& profile,
                                              std::size_t budget) {
  std::vector<LossVector> out;
  out.reserve(game.n_players);
  for (std::size_t n = 0; n < game.n_players; ++n) out.push_back(expected_loss_vector(game, n, profile, budget));
  return out;
}

// --------------------------------------------------------------- generators

GameSpec make_zero_sum(std::size_t d, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("make_zero_sum: d must be at least 2");
  CounterRng rng = CounterRng(seed).split("zero_sum");
  GameSpec g{2, d, {Vec(d * d), Vec(d * d)}, {"zero_sum"}};
  for (std::size_t a = 0; a < d * d; ++a) {
    g.losses[0][a] = rng.uniform();
    g.losses[1][a] = 1.0 - g.losses[0][a];
  }
  return g;
}

GameSpec make_constant_sum_polymatrix(std::size_t n_players, std::size_t d, std::uint64_t seed) {
  if (n_players < 2) throw std::invalid_argument("make_constant_sum_polymatrix: N must be at least 2");
  if (d < 2) throw std::invalid_argument("make_constant_sum_polymatrix: d must be at least 2");
  const std::size_t count = checked_profile_count(n_players, d);
  CounterRng rng = CounterRng(seed).split("polymatrix");
  // pair[m][n] is A^(m,n), d x d, indexed [a_m][a_n].
  std::vector<std::vector<Matrix>> pair(n_players, std::vector<Matrix>(n_players));
  for (std::size_t m = 0; m < n_players; ++m)
    for (std::size_t n = m + 1; n < n_players; ++n) {
      Matrix a(d, d), b(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.uniform();
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) b(j, i) = 1.0 - a(i, j);
      pair[m][n] = std::move(a);
      pair[n][m] = std::move(b);
    }
  GameSpec g{n_players, d, std::vector<Vec>(n_players, Vec(count)), {"constant_sum", "polymatrix"}};
  const double scale = 1.0 / static_cast<double>(n_players - 1);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const auto a = g.actions(idx);
    for (std::size_t n = 0; n < n_players; ++n) {
      double s = 0.0;
      for (std::size_t m = 0; m < n_players; ++m)
        if (m != n) s += pair[n][m](a[n], a[m]);
      g.losses[n][idx] = std::clamp(s * scale, 0.0, 1.0);
    }
  }
  return g;
}

GameSpec make_matching_pennies() {
  return GameSpec{2, 2, {{1.0, 0.0, 0.0, 1.0}, {0.0, 1.0, 1.0, 0.0}}, {"zero_sum", "matching_pennies"}};
}

GameSpec make_random_game(std::size_t n_players, std::size_t d, std::uint64_t seed) {
  const std::size_t count = checked_profile_count(n_players, d);
  CounterRng rng = CounterRng(seed).split("random_game");
  GameSpec g{n_players, d, std::vector<Vec>(n_players, Vec(count)), {"general_sum"}};
  for (auto& l : g.losses)
    for (double& x : l) x = rng.uniform();
  return g;
}

// --------------------------------------------------------------------- JSON

std::string game_to_json(const GameSpec& game) {
  nlohmann::json j;
  j["N"] = game.n_players;
  j["d"] = game.d;
  j["losses"] = game.losses;
  j["tags"] = game.tags;
  return j.dump(2);
}

GameSpec game_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("game JSON: ") + e.what());
  }
  GameSpec g;
  try {
    g.n_players = j.at("N").get<std::size_t>();
    g.d = j.at("d").get<std::size_t>();
    g.losses = j.at("losses").get<std::vector<Vec>>();
    if (j.contains("tags")) g.tags = j.at("tags").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("game JSON: ") + e.what());
  }
  checked_profile_count(g.n_players, g.d);
  g.validate();
  return g;
}

GameSpec load_game(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open game file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return game_from_json(ss.str());
}

void save_game(const GameSpec& game, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write game file " + path.string());
  out << game_to_json(game) << '\n';
}

// --------------------------------------------------------------- GamePlayer

ResolvedGameParams resolve(const GameParams& params, std::size_t n_players) {
  if (n_players == 0) throw std::invalid_argument("game params: N must be positive");
  const double n = static_cast<double>(n_players);
  ResolvedGameParams r{params.base_eta.value_or(1.0 / (16.0 * n)), params.meta_eta.value_or(1.0 / (64.0 * n)),
                       params.lambda.value_or(n)};
  if (!(r.base_eta > 0.0) || !(r.meta_eta > 0.0) || !(r.lambda >= 0.0))
    throw std::invalid_argument("game params: rates must be positive and lambda nonnegative");
  return r;
}

Vec GamePlayer::initial_hat_weights(std::size_t d) {
  Vec w(d, 1.0 / (2.0 * static_cast<double>(d)));
  w.push_back(0.25);
  w.push_back(0.25);
  return w;
}

GamePlayer::GamePlayer(std::size_t d, std::size_t n_players, const GameParams& params)
    : d_(d),
      params_(resolve(params, n_players)),
      actions_(ProbVector::uniform(d), params_.base_eta) {
  const PriorFamily family(d);
  bms_.reserve(family.count());
  for (std::size_t k = 0; k < family.count(); ++k)
    bms_.emplace_back(family.psi(k), params_.base_eta, SubKind::optimistic);
  for (double w : initial_hat_weights(d)) log_hat_.push_back(std::log(w));
}

ProbVector GamePlayer::propose() {
  if (p_) throw ProtocolError("propose called twice without feed");
  const std::size_t t = round_ + 1;
  const std::size_t arms = base_count();

  proposals_.clear();
  proposals_.reserve(arms);
  for (const auto& bm : bms_) proposals_.push_back(bm.propose());
  proposals_.push_back(StochasticMatrix::constant_map(actions_.predict()));

  correction_.assign(arms, 0.0);
  prediction_.assign(arms, 0.0);
  if (t >= 3)
    for (std::size_t k = 0; k < arms; ++k) {
      const double dist = l1_distance(image_prev_[k], image_prev2_[k]);
      correction_[k] = params_.lambda * dist * dist;
    }
  if (t >= 2)
    for (std::size_t k = 0; k < arms; ++k)
      prediction_[k] = std::clamp(transform_loss(proposals_[k], prev_p_, prev_loss_), 0.0, 1.0);

  Vec logits(log_hat_);
  for (std::size_t k = 0; k < arms; ++k) logits[k] -= params_.meta_eta * (prediction_[k] + correction_[k]);
  w_ = softmax(logits).values();

  Matrix agg(d_, d_);
  for (std::size_t k = 0; k < arms; ++k) {
    Matrix part = proposals_[k].matrix();
    part *= w_[k];
    agg += part;
  }
  aggregated_ = StochasticMatrix(std::move(agg));
  p_ = stationary_distribution(aggregated_);

  image_now_.clear();
  for (const auto& phi : proposals_) image_now_.push_back(phi.apply(*p_).values());
  return *p_;
}

void GamePlayer::feed(const LossVector& loss) {
  if (!p_) throw ProtocolError("feed called before propose");
  if (loss.size() != d_) throw std::invalid_argument("feed: dimension mismatch");
  const std::size_t arms = base_count();
  for (std::size_t k = 0; k < arms; ++k) {
    const double lw = std::clamp(transform_loss(proposals_[k], p_->span(), loss.span()), 0.0, 1.0);
    log_hat_[k] -= params_.meta_eta * (lw + correction_[k]);
  }
  const double mx = *std::max_element(log_hat_.begin(), log_hat_.end());
  for (double& x : log_hat_) x -= mx;

  const Matrix m = outer_product(*p_, loss);
  for (auto& bm : bms_) bm.update(m);
  actions_.update(loss);

  image_prev2_ = std::move(image_prev_);
  image_prev_ = std::move(image_now_);
  image_now_.clear();
  prev_p_ = p_->values();
  prev_loss_ = loss.values();
  p_.reset();
  ++round_;
}

// ---------------------------------------------------------------- self-play

JointTrace run_self_play(const GameSpec& game, std::size_t rounds, const SelfPlayOptions& options) {
  game.validate();
  checked_profile_count(game.n_players, game.d, options.budget);
  const std::size_t n_players = game.n_players;

  std::vector<GamePlayer> players;
  players.reserve(n_players);
  for (std::size_t n = 0; n < n_players; ++n) players.emplace_back(game.d, n_players, options.params);

  JointTrace trace;
  trace.players.resize(n_players);
  trace.meta_weights.resize(n_players);
  if (options.record_transforms) trace.transforms.resize(n_players);
  for (std::size_t n = 0; n < n_players; ++n) {
    trace.players[n].p.reserve(rounds);
    trace.players[n].loss.reserve(rounds);
    trace.meta_weights[n].reserve(rounds);
  }
  trace.path_length.reserve(rounds);

  KahanSum path;
  std::vector<ProbVector> profile(n_players);
  for (std::size_t t = 0; t < rounds; ++t) {
    for (std::size_t n = 0; n < n_players; ++n) {
      profile[n] = players[n].propose();
      const double res = stationary_residual(players[n].aggregated().matrix(), profile[n].span());
      trace.max_stationary_residual = std::max(trace.max_stationary_residual, res);
    }
    const auto losses = expected_loss_vectors(game, profile, options.budget);
    for (std::size_t n = 0; n < n_players; ++n) {
      if (t > 0) {
        const double step = l1_distance(profile[n].span(), trace.players[n].p.back().span());
        path += step * step;
      }
      trace.meta_weights[n].push_back(players[n].weights());
      if (options.record_transforms) trace.transforms[n].push_back(players[n].aggregated());
      trace.players[n].push(profile[n], losses[n]);
      players[n].feed(losses[n]);
    }
    trace.path_length.push_back(path.value());
  }
  return trace;
}

}  // namespace phireg
