#include "phireg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "phireg/bm.hpp"
#include "phireg/kernel.hpp"
#include "phireg/meta.hpp"
#include "phireg/mwu.hpp"
#include "phireg/priors.hpp"

namespace phireg {

namespace {

using ojson = nlohmann::ordered_json;

bool contains(const std::vector<std::string>& ids, const std::string& id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": expected a nonnegative integer, got '" + value + "'");
  }
  if (pos != value.size()) throw std::invalid_argument(key + ": expected an integer, got '" + value + "'");
  return static_cast<std::size_t>(v);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
  }
  if (pos != value.size() || !std::isfinite(v))
    throw std::invalid_argument(key + ": expected a finite number, got '" + value + "'");
  return v;
}

std::string eps_key(double eps) {
  std::ostringstream ss;
  ss << std::setprecision(6) << eps;
  return ss.str();
}

ojson transform_json(const BinaryTransform& phi) { return ojson(phi.map()); }

}  // namespace

// ------------------------------------------------------------------ config

std::string ExperimentConfig::resolved_generator() const {
  if (!generator.empty()) return generator;
  return mode == "game" ? "zero_sum" : "iid_uniform";
}

void ExperimentConfig::validate() const {
  if (mode != "expert" && mode != "game" && mode != "verify")
    throw std::invalid_argument("mode: expected expert, game or verify, got '" + mode + "'");
  if (verify_level != "fast" && verify_level != "full")
    throw std::invalid_argument("verify_level: expected fast or full, got '" + verify_level + "'");
  if (d < 2) throw std::invalid_argument("d: must be at least 2");
  if (T < 1) throw std::invalid_argument("T: must be at least 1");
  if (eta && !(*eta > 0.0)) throw std::invalid_argument("eta: must be positive");
  if (eta_meta && !(*eta_meta > 0.0)) throw std::invalid_argument("eta_meta: must be positive");
  if (lambda && !(*lambda >= 0.0)) throw std::invalid_argument("lambda: must be nonnegative");
  if (count < 1) throw std::invalid_argument("count: must be at least 1");
  const std::string gen = resolved_generator();
  if (mode == "expert") {
    if (!contains(expert_algorithms(), algorithm))
      throw std::invalid_argument("alg: unknown expert algorithm '" + algorithm + "'");
    if (!contains(expert_generators(), gen)) throw std::invalid_argument("gen: unknown loss generator '" + gen + "'");
    if ((algorithm == "meta1" || algorithm == "meta2") && eta)
      throw std::invalid_argument("eta: " + algorithm + " tunes its own base rates; use eta_meta");
    if (lambda) throw std::invalid_argument("lambda: only meaningful in game mode");
    if (!(gap >= 0.0 && gap <= 1.0)) throw std::invalid_argument("gap: must lie in [0, 1]");
    for (double eps : quantiles)
      if (!(eps >= 1.0 / static_cast<double>(d) - 1e-12 && eps <= 1.0))
        throw std::invalid_argument("quantiles: each eps must lie in [1/d, 1]");
  } else if (mode == "game") {
    if (N < 1) throw std::invalid_argument("N: must be at least 1");
    if (game_file.empty() && !contains(game_generators(), gen))
      throw std::invalid_argument("gen: unknown game generator '" + gen + "'");
  }
}

void apply_config_value(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = normalize_key(trim(raw_key));
  const std::string value = unquote(trim(raw_value));
  if (key == "mode") c.mode = value;
  else if (key == "alg" || key == "algorithm") c.algorithm = value;
  else if (key == "d") c.d = parse_size(key, value);
  else if (key == "T" || key == "t") c.T = parse_size(key, value);
  else if (key == "N" || key == "n") c.N = parse_size(key, value);
  else if (key == "seed") c.seed = parse_size(key, value);
  else if (key == "gen" || key == "generator") c.generator = value;
  else if (key == "game" || key == "game_file") c.game_file = value;
  else if (key == "out") c.out = value;
  else if (key == "eta") c.eta = parse_double(key, value);
  else if (key == "eta_meta") c.eta_meta = parse_double(key, value);
  else if (key == "lambda") c.lambda = parse_double(key, value);
  else if (key == "verify_level") c.verify_level = value;
  else if (key == "gap") c.gap = parse_double(key, value);
  else if (key == "period") c.period = parse_size(key, value);
  else if (key == "count") c.count = parse_size(key, value);
  else if (key == "quantiles") {
    c.quantiles.clear();
    std::string item;
    std::istringstream ss(value);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) c.quantiles.push_back(parse_double(key, item));
    }
  } else {
    throw std::invalid_argument("unknown config key '" + raw_key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

// --------------------------------------------------------------- generators

LossGenerator::LossGenerator(std::string kind, std::size_t d, std::size_t horizon, std::uint64_t seed, double gap,
                             std::size_t period)
    : kind_(std::move(kind)),
      d_(d),
      period_(period ? period : std::max<std::size_t>(1, horizon / 8)),
      gap_(gap),
      rng_(CounterRng(seed).split("losses").split(kind_)) {
  if (!contains(expert_generators(), kind_)) throw std::invalid_argument("unknown loss generator '" + kind_ + "'");
  if (d < 1) throw std::invalid_argument("LossGenerator: d must be positive");
  best_ = static_cast<std::size_t>(rng_.below(d));
}

LossVector LossGenerator::next(const ProbVector& p) {
  if (p.size() != d_) throw std::invalid_argument("LossGenerator: dimension mismatch");
  const std::size_t t = t_++;
  Vec l(d_);
  const double low = 0.5 - gap_ / 2.0;
  const double high = 0.5 + gap_ / 2.0;
  if (kind_ == "iid_uniform") {
    for (double& x : l) x = rng_.uniform();
  } else if (kind_ == "bernoulli_gap") {
    for (std::size_t i = 0; i < d_; ++i) l[i] = rng_.bernoulli(i == best_ ? low : high) ? 1.0 : 0.0;
  } else if (kind_ == "drifting_best") {
    const std::size_t best = (best_ + t / period_) % d_;
    for (std::size_t i = 0; i < d_; ++i) l[i] = rng_.bernoulli(i == best ? low : high) ? 1.0 : 0.0;
  } else if (kind_ == "piecewise_stationary") {
    if (t % period_ == 0) {
      means_.resize(d_);
      for (double& m : means_) m = rng_.uniform();
    }
    for (std::size_t i = 0; i < d_; ++i) l[i] = rng_.bernoulli(means_[i]) ? 1.0 : 0.0;
  } else {
    // Adaptive: experts the learner currently favors lose more often.
    const double threshold = 1.0 / static_cast<double>(d_) - 1e-12;
    for (std::size_t i = 0; i < d_; ++i) l[i] = rng_.bernoulli(p[i] >= threshold ? 0.8 : 0.2) ? 1.0 : 0.0;
  }
  return LossVector(std::move(l));
}

// ------------------------------------------------------------------ learners

namespace {

template <class Engine>
class TransformLearner final : public ExpertLearner {
 public:
  TransformLearner(Engine engine, ojson params) : engine_(std::move(engine)), params_(std::move(params)) {}

  ProbVector propose() override {
    const StochasticMatrix phi = engine_.propose();
    p_ = stationary_distribution(phi);
    residual_ = stationary_residual(phi.matrix(), p_.span());
    return p_;
  }
  void feed(const LossVector& loss) override { engine_.update(outer_product(p_, loss)); }
  double last_residual() const override { return residual_; }
  ojson parameters() const override { return params_; }

 private:
  Engine engine_;
  ojson params_;
  ProbVector p_;
  double residual_ = 0.0;
};

template <class Meta>
class MetaLearner final : public ExpertLearner {
 public:
  explicit MetaLearner(Meta meta) : meta_(std::move(meta)) {}

  ProbVector propose() override {
    ProbVector p = meta_.propose();
    residual_ = stationary_residual(meta_.aggregated().matrix(), p.span());
    return p;
  }
  void feed(const LossVector& loss) override { meta_.feed(loss); }
  double last_residual() const override { return residual_; }
  ojson parameters() const override {
    ojson j;
    j["base_count"] = meta_.base_count();
    j["base_etas"] = meta_.base_etas();
    j["eta_meta"] = meta_.meta_eta();
    return j;
  }

 private:
  Meta meta_;
  double residual_ = 0.0;
};

class PlainMwuLearner final : public ExpertLearner {
 public:
  PlainMwuLearner(std::size_t d, double eta) : mwu_(ProbVector::uniform(d), eta) {}
  ProbVector propose() override { return mwu_.current(); }
  void feed(const LossVector& loss) override { mwu_.update(loss); }
  ojson parameters() const override { return ojson{{"eta", mwu_.eta()}}; }

 private:
  Mwu mwu_;
};

}  // namespace

std::unique_ptr<ExpertLearner> make_expert_learner(const ExperimentConfig& c) {
  const double dd = static_cast<double>(c.d);
  const double tt = static_cast<double>(c.T);
  if (c.algorithm == "meta1") return std::make_unique<MetaLearner<KernelMeta>>(make_kernel_meta(c.d, c.T, c.eta_meta));
  if (c.algorithm == "meta2") return std::make_unique<MetaLearner<BmMeta>>(make_bm_meta(c.d, c.T, c.eta_meta));
  if (c.algorithm == "kernel_mwu_fixed_eta") {
    const double eta = c.eta.value_or(std::sqrt(2.0 * (1.0 + std::log(dd)) / tt));
    return std::make_unique<TransformLearner<KernelMwu>>(KernelMwu(c.d, eta), ojson{{"eta", eta}});
  }
  if (c.algorithm == "bm_mwu") {
    const double eta = c.eta.value_or(std::sqrt(std::log(dd) / tt));
    return std::make_unique<TransformLearner<BmReduction>>(BmReduction(StochasticMatrix::uniform(c.d), eta),
                                                           ojson{{"eta", eta}});
  }
  if (c.algorithm == "mwu") return std::make_unique<PlainMwuLearner>(c.d, c.eta.value_or(std::sqrt(std::log(dd) / tt)));
  throw std::invalid_argument("unknown expert algorithm '" + c.algorithm + "'");
}

// -------------------------------------------------------------------- bounds

double kernel_meta_bound(std::size_t horizon, double log_inv_prior, std::size_t rate_count) {
  const double t = static_cast<double>(horizon);
  return 3.0 * std::sqrt(t * log_inv_prior) + 2.0 * std::sqrt(2.0 * t) +
         2.0 * std::sqrt(t * std::log(static_cast<double>(rate_count)));
}

double bm_meta_bound(std::size_t horizon, double log_inv_prior, std::size_t d) {
  const double t = static_cast<double>(horizon);
  return 3.0 * std::sqrt(t * log_inv_prior) + 2.0 * std::sqrt(t) + 4.0 * std::sqrt(t * std::log(static_cast<double>(d)));
}

double quantile_bound(std::size_t horizon, std::size_t d, double eps, std::size_t rate_count) {
  const double t = static_cast<double>(horizon);
  const double dd = static_cast<double>(d);
  const double k = std::clamp(std::ceil(eps * dd - 1e-9), 1.0, dd);
  return 3.0 * std::sqrt(t * std::log(8.0 * dd / k)) + 2.0 * std::sqrt(2.0 * t) +
         2.0 * std::sqrt(t * std::log(static_cast<double>(rate_count)));
}

// ---------------------------------------------------------------- expert run

void write_json(const ojson& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ExpertRun run_expert_experiment(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.mode = "expert";
  c.validate();
  const std::string gen = c.resolved_generator();
  auto learner = make_expert_learner(c);
  LossGenerator losses(gen, c.d, c.T, c.seed, c.gap, c.period);

  ExpertRun run;
  run.trace.p.reserve(c.T);
  run.trace.loss.reserve(c.T);
  double max_residual = 0.0;
  for (std::size_t t = 0; t < c.T; ++t) {
    ProbVector p = learner->propose();
    max_residual = std::max(max_residual, learner->last_residual());
    LossVector l = losses.next(p);
    learner->feed(l);
    run.trace.push(std::move(p), std::move(l));
  }

  std::vector<double> eps = c.quantiles;
  if (eps.empty()) {
    for (double e : {1.0 / static_cast<double>(c.d), 0.25, 0.5})
      if (e >= 1.0 / static_cast<double>(c.d) - 1e-12 && std::find(eps.begin(), eps.end(), e) == eps.end())
        eps.push_back(e);
  }
  const RegretReport report = regret_report(run.trace, eps, 4);

  ojson s;
  s["schema"] = "phiregret.expert_summary/1";
  s["mode"] = "expert";
  s["algorithm"] = c.algorithm;
  s["generator"] = gen;
  s["d"] = c.d;
  s["T"] = c.T;
  s["seed"] = c.seed;
  s["parameters"] = learner->parameters();
  s["learner_loss"] = learner_loss(run.trace);
  ojson reg;
  reg["external"] = report.external;
  reg["internal"] = report.internal;
  reg["swap"] = report.swap;
  reg["swap_comparator"] = transform_json(report.swap_comparator);
  ojson q = ojson::object();
  for (const auto& [e, v] : report.quantile) q[eps_key(e)] = v;
  reg["quantile"] = q;
  s["regret"] = reg;

  const PriorFamily family(c.d);
  if (report.per_phi) {
    ojson rows = ojson::array();
    std::size_t n = 0;
    for (const auto& phi : enumerate_binary(c.d)) {
      rows.push_back({{"phi", transform_json(phi)},
                      {"regret", (*report.per_phi)[n++]},
                      {"log_inv_prior", -prior_log_mass(family, phi)},
                      {"complexity", complexity(phi).c}});
    }
    s["per_phi"] = rows;
  } else {
    s["per_phi"] = nullptr;
  }

  // Comparator bounds of the adaptive meta learners, checked over all of Phi_b.
  if ((c.algorithm == "meta1" || c.algorithm == "meta2") && c.d <= 6) {
    const Matrix g = cross_loss(run.trace);
    const std::size_t m = rate_grid_size(c.d);
    double min_slack = std::numeric_limits<double>::infinity();
    std::size_t violations = 0, checked = 0;
    BinaryTransform worst;
    for (const auto& phi : enumerate_binary(c.d)) {
      KahanSum r;
      for (std::size_t i = 0; i < c.d; ++i) r += g(i, i) - g(i, phi[i]);
      const double lip = -prior_log_mass(family, phi);
      const double bound = c.algorithm == "meta1" ? kernel_meta_bound(c.T, lip, m) : bm_meta_bound(c.T, lip, c.d);
      const double slack = bound - r.value();
      ++checked;
      if (slack < 0.0) ++violations;
      if (slack < min_slack) {
        min_slack = slack;
        worst = phi;
      }
    }
    s["bounds"] = {{"kind", c.algorithm == "meta1" ? "kernel_meta" : "bm_meta"},
                   {"comparators_checked", checked},
                   {"violations", violations},
                   {"min_slack", min_slack},
                   {"tightest_comparator", transform_json(worst)}};
  } else {
    s["bounds"] = nullptr;
  }
  s["max_stationary_residual"] = max_residual;
  run.summary = std::move(s);

  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    write_trace_csv(run.trace, c.out / "trace.csv");
    write_json(run.summary, c.out / "summary.json");
  }
  return run;
}

// ------------------------------------------------------------------ game run

std::size_t count_loss_difference_violations(const JointTrace& trace, double tol) {
  std::size_t violations = 0;
  const std::size_t n_players = trace.n_players();
  const double scale = static_cast<double>(n_players > 0 ? n_players - 1 : 0);
  for (std::size_t t = 1; t < trace.rounds(); ++t) {
    Vec moved(n_players);
    for (std::size_t j = 0; j < n_players; ++j) {
      const double m = l1_distance(trace.players[j].p[t].span(), trace.players[j].p[t - 1].span());
      moved[j] = m * m;
    }
    for (std::size_t n = 0; n < n_players; ++n) {
      Vec diff(trace.dim());
      for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = trace.players[n].loss[t][i] - trace.players[n].loss[t - 1][i];
      const double lhs = std::pow(linf_norm(diff), 2);
      double rhs = 0.0;
      for (std::size_t j = 0; j < n_players; ++j)
        if (j != n) rhs += moved[j];
      if (lhs > scale * rhs + tol) ++violations;
    }
  }
  return violations;
}

std::size_t count_stability_violations(const JointTrace& trace, double tol) {
  std::size_t violations = 0;
  for (const auto& series : trace.meta_weights)
    for (std::size_t t = 1; t < series.size(); ++t)
      for (std::size_t k = 0; k < series[t].size(); ++k) {
        const double prev = series[t - 1][k];
        const double now = series[t][k];
        if (now < 0.5 * prev * (1.0 - tol) || now > 2.0 * prev * (1.0 + tol)) ++violations;
      }
  return violations;
}

GameCheckpoint game_checkpoint(const JointTrace& trace, std::size_t t) {
  if (t == 0 || t > trace.rounds()) throw std::invalid_argument("game_checkpoint: round out of range");
  const EquilibriumGaps gaps = equilibrium_gaps(trace, t);
  double max_ext = -std::numeric_limits<double>::infinity();
  for (const auto& player : trace.players) {
    ExpertTrace pre;
    pre.p.assign(player.p.begin(), player.p.begin() + static_cast<std::ptrdiff_t>(t));
    pre.loss.assign(player.loss.begin(), player.loss.begin() + static_cast<std::ptrdiff_t>(t));
    max_ext = std::max(max_ext, best_external(pre).regret);
  }
  return {t, gaps.cce_gap, gaps.ce_gap, trace.path_length[t - 1], max_ext};
}

GameSpec make_game(const ExperimentConfig& c) {
  if (!c.game_file.empty()) return load_game(c.game_file);
  const std::string gen = c.resolved_generator();
  if (gen == "zero_sum") {
    if (c.N != 2) throw std::invalid_argument("gen zero_sum: N must be 2");
    return make_zero_sum(c.d, c.seed);
  }
  if (gen == "polymatrix") return make_constant_sum_polymatrix(c.N, c.d, c.seed);
  if (gen == "matching_pennies") {
    if (c.N != 2 || c.d != 2) throw std::invalid_argument("gen matching_pennies: requires N = 2 and d = 2");
    return make_matching_pennies();
  }
  if (gen == "random") return make_random_game(c.N, c.d, c.seed);
  throw std::invalid_argument("unknown game generator '" + gen + "'");
}

GameRun run_game_experiment(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.mode = "game";
  c.validate();
  GameRun run;
  run.game = make_game(c);
  SelfPlayOptions opts;
  opts.params = GameParams{c.eta, c.eta_meta, c.lambda};
  const ResolvedGameParams params = resolve(opts.params, run.game.n_players);
  run.trace = run_self_play(run.game, c.T, opts);

  ojson s;
  s["schema"] = "phiregret.game_summary/1";
  s["mode"] = "game";
  s["source"] = c.game_file.empty() ? c.resolved_generator() : c.game_file;
  s["N"] = run.game.n_players;
  s["d"] = run.game.d;
  s["T"] = c.T;
  s["seed"] = c.seed;
  s["tags"] = run.game.tags;
  s["parameters"] = {{"eta", params.base_eta}, {"eta_meta", params.meta_eta}, {"lambda", params.lambda}};

  std::vector<std::size_t> marks;
  for (std::size_t t : {c.T / 4, c.T / 2, c.T})
    if (t >= 1 && std::find(marks.begin(), marks.end(), t) == marks.end()) marks.push_back(t);
  ojson cps = ojson::array();
  for (std::size_t t : marks) {
    const GameCheckpoint cp = game_checkpoint(run.trace, t);
    cps.push_back({{"t", cp.t},
                   {"cce_gap", cp.cce_gap},
                   {"ce_gap", cp.ce_gap},
                   {"path_length", cp.path_length},
                   {"max_external_regret", cp.max_external}});
  }
  s["checkpoints"] = cps;
  s["path_length"] = run.trace.path_length.back();
  s["violations"] = {{"loss_difference", count_loss_difference_violations(run.trace)},
                     {"multiplicative_stability", count_stability_violations(run.trace)},
                     {"stability_precondition", params.meta_eta * (1.0 + 4.0 * params.lambda) <= 0.125}};
  s["max_stationary_residual"] = run.trace.max_stationary_residual;

  std::size_t joint = 0;
  try {
    joint = checked_profile_count(run.game.n_players, run.game.d, 10'000);
  } catch (const BudgetError&) {
    joint = 0;
  }
  if (joint != 0 && joint * c.T <= 50'000'000) {
    const EquilibriumGaps direct = equilibrium_gaps_direct(run.trace, run.game);
    const EquilibriumGaps fromtrace = equilibrium_gaps(run.trace);
    s["direct_gap_check"] = {{"cce_gap", direct.cce_gap},
                             {"ce_gap", direct.ce_gap},
                             {"max_abs_diff", std::max(std::abs(direct.cce_gap - fromtrace.cce_gap),
                                                       std::abs(direct.ce_gap - fromtrace.ce_gap))}};
  } else {
    s["direct_gap_check"] = nullptr;
  }
  run.summary = std::move(s);

  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    for (std::size_t n = 0; n < run.trace.n_players(); ++n)
      write_trace_csv(run.trace.players[n], c.out / ("player_" + std::to_string(n + 1) + ".csv"));
    std::ofstream pl(c.out / "path_length.csv");
    if (!pl) throw std::runtime_error("cannot write path_length.csv");
    pl << "t,path_length\n" << std::setprecision(17);
    for (std::size_t t = 0; t < run.trace.rounds(); ++t) pl << t + 1 << ',' << run.trace.path_length[t] << '\n';
    save_game(run.game, c.out / "game.json");
    write_json(run.summary, c.out / "summary.json");
  }
  return run;
}

// -------------------------------------------------------------------- sweep

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PHIREGRET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& job) {
  if (jobs == 0) return;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t workers = worker_count(jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

ojson run_sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.mode == "verify") throw std::invalid_argument("sweep: mode must be expert or game");
  std::vector<ojson> results(config.count);
  parallel_for(config.count, [&](std::size_t i) {
    ExperimentConfig c = config;
    c.seed = config.seed + i;
    if (!config.out.empty()) c.out = config.out / ("seed_" + std::to_string(c.seed));
    results[i] = c.mode == "game" ? run_game_experiment(c).summary : run_expert_experiment(c).summary;
  });

  ojson s;
  s["schema"] = "phiregret.sweep_summary/1";
  s["mode"] = config.mode;
  s["count"] = config.count;
  ojson runs = ojson::array();
  for (const auto& r : results) {
    if (config.mode == "game") {
      const auto& last = r["checkpoints"].back();
      runs.push_back({{"seed", r["seed"]},
                      {"cce_gap", last["cce_gap"]},
                      {"ce_gap", last["ce_gap"]},
                      {"path_length", r["path_length"]}});
    } else {
      runs.push_back({{"seed", r["seed"]},
                      {"external", r["regret"]["external"]},
                      {"internal", r["regret"]["internal"]},
                      {"swap", r["regret"]["swap"]}});
    }
  }
  s["runs"] = runs;
  if (!config.out.empty()) {
    std::filesystem::create_directories(config.out);
    write_json(s, config.out / "sweep.json");
  }
  return s;
}

}  // namespace phireg
