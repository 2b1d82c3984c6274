#include "phireg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "phireg/bm.hpp"
#include "phireg/game.hpp"
#include "phireg/harness.hpp"
#include "phireg/kernel.hpp"
#include "phireg/meta.hpp"
#include "phireg/mwu.hpp"
#include "phireg/priors.hpp"
#include "phireg/regret.hpp"
#include "phireg/rng.hpp"

namespace phireg {

namespace {

LossVector uniform_loss(CounterRng& rng, std::size_t d) {
  Vec l(d);
  for (double& x : l) x = rng.uniform();
  return LossVector(std::move(l));
}

LossVector mixed_loss(CounterRng& rng, std::size_t d, bool binary) {
  Vec l(d);
  for (double& x : l) x = binary ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : rng.uniform();
  return LossVector(std::move(l));
}

ProbVector random_prior(CounterRng& rng, std::size_t d) {
  Vec w(d);
  for (double& x : w) x = rng.uniform(0.01, 1.0);
  return ProbVector::from_weights(std::move(w));
}

double log_uniform(CounterRng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

void record(InequalityStats& s, double lhs, double rhs) {
  ++s.checks;
  const double excess = lhs - rhs;
  s.worst = std::max(s.worst, excess);
  if (excess > 1e-9) ++s.violations;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

}  // namespace

double kernel_equivalence_gap(std::size_t d, std::size_t rounds, double eta, std::uint64_t seed, bool include_naive,
                              bool include_fast) {
  const PriorFamily family(d);
  KernelizedMwu kernelized(family, eta);
  std::optional<NaiveEnumMwu> naive;
  std::optional<FastKernelMwu> fast;
  if (include_naive) naive.emplace(family, eta);
  if (include_fast && d >= 3) fast.emplace(d, eta);
  CounterRng rng = CounterRng(seed).split("kernel_equivalence").split(d);
  double worst = 0.0;
  for (std::size_t t = 0; t < rounds; ++t) {
    const StochasticMatrix ref = kernelized.propose();
    if (naive) worst = std::max(worst, max_abs_diff(naive->propose().matrix(), ref.matrix()));
    if (fast) worst = std::max(worst, max_abs_diff(fast->propose().matrix(), ref.matrix()));
    const ProbVector p = stationary_distribution(ref);
    const Matrix m = outer_product(p, uniform_loss(rng, d));
    kernelized.update(m);
    if (naive) naive->update(m);
    if (fast) fast->update(m);
  }
  return worst;
}

double prior_complexity_excess(std::size_t d) {
  const PriorFamily family(d);
  double worst = -1e300;
  for (const auto& phi : enumerate_binary(d)) {
    const double lhs = -prior_log_mass(family, phi);
    const double rhs = 2.0 + 2.0 * static_cast<double>(complexity(phi).c) * std::log(static_cast<double>(d));
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

InequalityStats mwu_inequality(std::size_t runs, std::uint64_t seed, double eta_max) {
  InequalityStats s;
  const CounterRng root = CounterRng(seed).split("mwu_inequality");
  for (std::size_t r = 0; r < runs; ++r) {
    CounterRng rng = root.split(r);
    const std::size_t d = 2 + rng.below(9);
    const std::size_t rounds = 1 + rng.below(500);
    const ProbVector prior = random_prior(rng, d);
    const double eta = log_uniform(rng, 0.01, eta_max);
    const bool binary = rng.bernoulli(0.5);
    Mwu mwu(prior, eta);
    KahanSum learner, sq;
    std::vector<KahanSum> expert(d);
    for (std::size_t t = 0; t < rounds; ++t) {
      const ProbVector x = mwu.current();
      const LossVector l = mixed_loss(rng, d, binary);
      learner += dot(x.span(), l.span());
      for (std::size_t i = 0; i < d; ++i) expert[i] += l[i];
      sq += std::pow(linf_norm(l.span()), 2);
      mwu.update(l);
    }
    for (std::size_t i = 0; i < d; ++i)
      record(s, learner.value() - expert[i].value(), -std::log(prior[i]) / eta + eta * sq.value());
    ++s.runs;
  }
  return s;
}

InequalityStats omwu_inequality(std::size_t runs, std::uint64_t seed, double eta_max) {
  InequalityStats s;
  const CounterRng root = CounterRng(seed).split("omwu_inequality");
  for (std::size_t r = 0; r < runs; ++r) {
    CounterRng rng = root.split(r);
    const std::size_t d = 2 + rng.below(9);
    const std::size_t rounds = 1 + rng.below(500);
    const ProbVector prior = random_prior(rng, d);
    const double eta = log_uniform(rng, 0.01, eta_max);
    const bool binary = rng.bernoulli(0.5);
    Omwu omwu(prior, eta);
    KahanSum learner, variation, movement;
    std::vector<KahanSum> expert(d);
    std::optional<ProbVector> prev_p;
    std::optional<LossVector> prev_l;
    for (std::size_t t = 0; t < rounds; ++t) {
      const ProbVector p = omwu.predict();
      const LossVector l = mixed_loss(rng, d, binary);
      learner += dot(p.span(), l.span());
      for (std::size_t i = 0; i < d; ++i) expert[i] += l[i];
      if (prev_l) {
        Vec diff(d);
        for (std::size_t i = 0; i < d; ++i) diff[i] = l[i] - (*prev_l)[i];
        variation += std::pow(linf_norm(diff), 2);
        movement += std::pow(l1_distance(p.span(), prev_p->span()), 2);
      }
      omwu.update(l);
      prev_p = p;
      prev_l = l;
    }
    for (std::size_t i = 0; i < d; ++i)
      record(s, learner.value() - expert[i].value(),
             -std::log(prior[i]) / eta + eta * variation.value() - movement.value() / (8.0 * eta));
    ++s.runs;
  }
  return s;
}

InequalityStats bm_inequality(std::size_t sequences, const std::vector<double>& etas, std::uint64_t seed) {
  constexpr std::size_t d = 3;
  InequalityStats s;
  const PriorFamily family(d);
  const CounterRng root = CounterRng(seed).split("bm_inequality");
  for (std::size_t q = 0; q < sequences; ++q) {
    for (std::size_t k = 0; k < family.count(); ++k)
      for (double eta : etas) {
        CounterRng rng = root.split(q);  // same loss sequence for every (k, eta)
        const std::size_t rounds = 100 + rng.below(201);
        BmReduction bm(family.psi(k), eta);
        std::vector<StochasticMatrix> phis;
        ExpertTrace trace;
        for (std::size_t t = 0; t < rounds; ++t) {
          const StochasticMatrix phi = bm.propose();
          const ProbVector p = stationary_distribution(phi);
          const LossVector l = uniform_loss(rng, d);
          bm.update(outer_product(p, l));
          phis.push_back(phi);
          trace.push(p, l);
        }
        // sum_t <phi_t, p_t l_t^T> once, then subtract each comparator.
        KahanSum played;
        for (std::size_t t = 0; t < rounds; ++t) played += transform_loss(phis[t], trace.p[t].span(), trace.loss[t].span());
        const Matrix g = cross_loss(trace);
        for (const auto& phi : enumerate_binary(d)) {
          double comparator = 0.0;
          for (std::size_t i = 0; i < d; ++i) comparator += g(i, phi[i]);
          const double rhs = -induced_log_mass(family.psi(k).matrix(), phi) / eta + eta * static_cast<double>(rounds);
          record(s, played.value() - comparator, rhs);
        }
        ++s.runs;
      }
  }
  return s;
}

// ------------------------------------------------------------------- suite

std::vector<CheckResult> run_verification_suite(const std::string& level, std::uint64_t seed) {
  if (level != "fast" && level != "full") throw std::invalid_argument("verify level must be fast or full");
  const bool full = level == "full";
  std::vector<CheckResult> out;

  auto timed = [&](const std::string& name, const std::function<CheckResult()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.name = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  };

  auto inequality = [](const InequalityStats& s) {
    CheckResult r;
    r.observed = s.worst;
    r.limit = 1e-9;
    r.passed = s.violations == 0;
    r.detail = std::to_string(s.runs) + " runs, " + std::to_string(s.checks) + " comparisons, " +
               std::to_string(s.violations) + " violations";
    return r;
  };

  timed("kernel_naive_vs_kernelized", [&] {
    CheckResult r; r.limit = 1e-9;
    const std::vector<std::size_t> dims = full ? std::vector<std::size_t>{2, 3, 4} : std::vector<std::size_t>{2, 3};
    for (std::size_t d : dims)
      r.observed = std::max(r.observed, kernel_equivalence_gap(d, full ? 50 : 20, 0.1, seed, true, true));
    r.passed = r.observed <= r.limit;
    r.detail = "max |delta phi| over rounds";
    return r;
  });

  timed("kernel_fast_vs_kernelized", [&] {
    CheckResult r; r.limit = 1e-9;
    for (std::size_t d = 3; d <= (full ? 8u : 5u); ++d)
      r.observed = std::max(r.observed, kernel_equivalence_gap(d, full ? 50 : 20, 0.1, seed, false, true));
    r.passed = r.observed <= r.limit;
    r.detail = "max |delta phi| over rounds";
    return r;
  });

  timed("prior_complexity_bound", [&] {
    CheckResult r; r.observed = -1e300; r.limit = 1e-9;
    for (std::size_t d = 3; d <= (full ? 5u : 4u); ++d) r.observed = std::max(r.observed, prior_complexity_excess(d));
    r.passed = r.observed <= r.limit;
    r.detail = "max ln(1/pi) - (2 + 2c ln d)";
    return r;
  });

  timed("mwu_regret_inequality", [&] { return inequality(mwu_inequality(full ? 100 : 20, seed)); });
  timed("omwu_rvu_inequality", [&] { return inequality(omwu_inequality(full ? 100 : 20, seed)); });
  timed("bm_reduction_bound", [&] { return inequality(bm_inequality(full ? 20 : 4, {0.05, 0.2}, seed)); });

  timed("stationary_residual", [&] {
    CheckResult r; r.limit = 1e-8;
    for (const char* alg : {"meta1", "meta2"}) {
      ExperimentConfig c;
      c.algorithm = alg;
      c.d = 3;
      c.T = full ? 1024 : 200;
      c.seed = seed;
      r.observed = std::max(r.observed, run_expert_experiment(c).summary["max_stationary_residual"].get<double>());
    }
    r.passed = r.observed <= r.limit;
    r.detail = "max ||p - phi^T p||_1";
    return r;
  });

  if (full) {
    for (const char* alg : {"meta1", "meta2"}) {
      timed(std::string("adaptive_bound_") + alg, [&] {
        ExperimentConfig c;
        c.algorithm = alg;
        c.d = 3;
        c.T = 4096;
        c.seed = seed;
        c.generator = "adversarial_swap_probe";
        const auto s = run_expert_experiment(c).summary;
        CheckResult r;
        r.observed = -s["bounds"]["min_slack"].get<double>();
        r.limit = 0.0;
        r.passed = s["bounds"]["violations"].get<std::size_t>() == 0;
        r.detail = "regret - bound, worst comparator of " + std::to_string(s["bounds"]["comparators_checked"].get<std::size_t>());
        return r;
      });
    }
    timed("quantile_bound", [&] {
      ExperimentConfig c;
      c.algorithm = "meta1";
      c.d = 16;
      c.T = 4096;
      c.seed = seed;
      c.generator = "adversarial_swap_probe";
      c.quantiles = {1.0 / 16.0, 0.25, 0.5};
      const ExpertRun run = run_expert_experiment(c);
      CheckResult r; r.observed = -1e300; r.limit = 0.0; r.passed = true;
      for (double eps : c.quantiles) {
        const double excess = quantile_regret(run.trace, eps) - quantile_bound(c.T, c.d, eps, rate_grid_size(c.d));
        r.observed = std::max(r.observed, excess);
        if (excess > 0.0) r.passed = false;
      }
      r.detail = "max quantile regret - bound";
      return r;
    });
  }

  timed("best_swap_vs_enumeration", [&] {
    CheckResult r; r.limit = 1e-12;
    std::size_t mismatches = 0;
    for (std::size_t d = 2; d <= 4; ++d)
      for (std::size_t n = 0; n < (full ? 50u : 10u); ++n) {
        CounterRng rng = CounterRng(seed).split("best_swap").split(d * 1000 + n);
        ExpertTrace trace;
        const std::size_t rounds = 1 + rng.below(40);
        for (std::size_t t = 0; t < rounds; ++t) trace.push(random_prior(rng, d), uniform_loss(rng, d));
        const SwapResult best = best_swap(trace);
        double brute = -1e300;
        for (const auto& phi : enumerate_binary(d)) brute = std::max(brute, regret_against(trace, phi));
        const double diff = std::abs(best.regret - brute);
        const double attained = std::abs(regret_against(trace, best.comparator) - brute);
        r.observed = std::max({r.observed, diff, attained});
        if (diff > r.limit || attained > r.limit) ++mismatches;
      }
    r.passed = mismatches == 0;
    r.detail = std::to_string(mismatches) + " mismatches";
    return r;
  });

  timed("equilibrium_gap_identity", [&] {
    CheckResult r; r.limit = 1e-9;
    for (std::size_t n = 0; n < (full ? 20u : 5u); ++n) {
      const GameSpec game = make_random_game(2, 2, seed * 7919 + n);
      const JointTrace trace = run_self_play(game, 200);
      const EquilibriumGaps a = equilibrium_gaps(trace);
      const EquilibriumGaps b = equilibrium_gaps_direct(trace, game);
      r.observed = std::max({r.observed, std::abs(a.cce_gap - b.cce_gap), std::abs(a.ce_gap - b.ce_gap)});
    }
    r.passed = r.observed <= r.limit;
    r.detail = "max |trace gap - enumerated gap|";
    return r;
  });

  timed("game_trace_invariants", [&] {
    ExperimentConfig c;
    c.mode = "game";
    c.d = 3;
    c.T = full ? 4096 : 400;
    c.seed = seed;
    const GameRun run = run_game_experiment(c);
    const auto& v = run.summary["violations"];
    const std::size_t bad = v["loss_difference"].get<std::size_t>() + v["multiplicative_stability"].get<std::size_t>();
    const auto& cps = run.summary["checkpoints"];
    const double first = cps.front()["cce_gap"].get<double>();
    const double last = cps.back()["cce_gap"].get<double>();
    const double residual = run.summary["max_stationary_residual"].get<double>();
    CheckResult r;
    r.observed = static_cast<double>(bad);
    r.limit = 0.0;
    r.passed = bad == 0 && residual <= 1e-8 && last < first;
    r.detail = "violations " + std::to_string(bad) + ", cce_gap " + fmt(first) + " -> " + fmt(last) +
               ", residual " + fmt(residual);
    return r;
  });

  return out;
}

}  // namespace phireg
