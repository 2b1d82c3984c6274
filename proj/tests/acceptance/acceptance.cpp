// One PASS/FAIL line per acceptance criterion. Reference values come from the
// brute-force helpers in tests/unit/oracles.hpp and from sums written out here;
// the library only supplies the learners under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phireg/bm.hpp"
#include "phireg/game.hpp"
#include "phireg/kernel.hpp"
#include "phireg/meta.hpp"
#include "phireg/mwu.hpp"
#include "phireg/priors.hpp"
#include "phireg/regret.hpp"
#include "phireg/rng.hpp"

using namespace phireg;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::printf("%s %2d %-28s %7.2fs  %s\n", o.passed ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Vec uniform_vec(CounterRng& rng, std::size_t d, double lo = 0.0, double hi = 1.0) {
  Vec v(d);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

ProbVector random_prior(CounterRng& rng, std::size_t d) {
  return ProbVector::from_weights(uniform_vec(rng, d, 0.05, 1.0));
}

double sq(double x) { return x * x; }

double linf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double l1(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// c = min(d - fixed points, d - largest preimage + 1).
std::size_t complexity_of(const std::vector<std::size_t>& m) {
  const std::size_t d = m.size();
  std::size_t self = 0;
  std::vector<std::size_t> count(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    self += m[i] == i;
    ++count[m[i]];
  }
  return std::min(d - self, d - *std::max_element(count.begin(), count.end()) + 1);
}

/// Sum over rounds of the learner loss, and the cross-loss G_ij = sum p_i l_j.
struct Tally {
  double learner = 0.0;
  Matrix g;
  Vec expert;
  explicit Tally(std::size_t d) : g(d, d), expert(d, 0.0) {}
  void add(const Vec& p, const Vec& l) {
    const std::size_t d = p.size();
    for (std::size_t i = 0; i < d; ++i) {
      learner += p[i] * l[i];
      expert[i] += l[i];
      for (std::size_t j = 0; j < d; ++j) g(i, j) += p[i] * l[j];
    }
  }
  double regret(const std::vector<std::size_t>& m) const {
    double r = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) r += g(i, i) - g(i, m[i]);
    return r;
  }
  double external() const { return learner - *std::min_element(expert.begin(), expert.end()); }
  double swap() const {
    double r = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double lo = g(i, i);
      for (std::size_t j = 0; j < g.cols(); ++j) lo = std::min(lo, g(i, j));
      r += g(i, i) - lo;
    }
    return r;
  }
};

/// Bernoulli(0.8) losses on experts holding at least 1/d mass, Bernoulli(0.2)
/// elsewhere: a fresh adversary written independently of the harness one.
Vec adversarial_loss(CounterRng& rng, const ProbVector& p) {
  const double cut = 1.0 / static_cast<double>(p.size()) - 1e-12;
  Vec l(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) l[i] = rng.uniform() < (p[i] >= cut ? 0.8 : 0.2) ? 1.0 : 0.0;
  return l;
}

Matrix random_loss_matrix(CounterRng& rng, const ProbVector& p) {
  return outer_product(p.values(), uniform_vec(rng, p.size()));
}

double grid_size(std::size_t d) { return 2.0 * std::ceil(std::log2(static_cast<double>(d))); }

// ------------------------------------------------------------------ games

struct GameRecord {
  JointTrace trace;
  std::size_t d;
};

/// Per-player tallies over the first `rounds` rounds.
std::vector<Tally> game_tallies(const JointTrace& tr, std::size_t rounds) {
  std::vector<Tally> out;
  for (const auto& pl : tr.players) {
    Tally t(tr.dim());
    for (std::size_t s = 0; s < rounds; ++s) t.add(pl.p[s].values(), pl.loss[s].values());
    out.push_back(t);
  }
  return out;
}

double max_external(const JointTrace& tr, std::size_t rounds) {
  double m = -1e300;
  for (const auto& t : game_tallies(tr, rounds)) m = std::max(m, t.external());
  return m;
}

double max_swap(const JointTrace& tr, std::size_t rounds) {
  double m = -1e300;
  for (const auto& t : game_tallies(tr, rounds)) m = std::max(m, t.swap());
  return m;
}

/// Summed path length over rounds 2..rounds, recomputed from the played p.
double path_length(const JointTrace& tr, std::size_t rounds) {
  double s = 0.0;
  for (const auto& pl : tr.players)
    for (std::size_t t = 1; t < rounds; ++t) s += sq(l1(pl.p[t].values(), pl.p[t - 1].values()));
  return s;
}

/// max_n max_phi E_t E_{a~p_t}[l_n(a) - l_n(phi(a_n), a_-n)] by enumeration.
double direct_gap(const JointTrace& tr, const GameSpec& g, bool swap_class) {
  const std::size_t n_pl = g.n_players, d = g.d, T = tr.rounds();
  double best = -1e300;
  for (std::size_t n = 0; n < n_pl; ++n) {
    // H(i, j) = sum_t sum_{a: a_n = i} P_t(a) l_n(j, a_-n).
    Matrix h(d, d);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t idx = 0; idx < g.profile_count(); ++idx) {
        std::vector<std::size_t> a(n_pl);
        std::size_t rest = idx;
        for (std::size_t k = n_pl; k-- > 0;) {
          a[k] = rest % d;
          rest /= d;
        }
        double prob = 1.0;
        for (std::size_t k = 0; k < n_pl; ++k) prob *= tr.players[k].p[t][a[k]];
        const std::size_t own = a[n];
        for (std::size_t j = 0; j < d; ++j) {
          a[n] = j;
          std::size_t dev = 0;
          for (std::size_t k = 0; k < n_pl; ++k) dev = dev * d + a[k];
          h(own, j) += prob * g.losses[n][dev];
        }
      }
    for (const auto& m : oracle::all_maps(d)) {
      if (!swap_class && std::any_of(m.begin(), m.end(), [&](std::size_t x) { return x != m[0]; })) continue;
      double v = 0.0;
      for (std::size_t i = 0; i < d; ++i) v += h(i, i) - h(i, m[i]);
      best = std::max(best, v / static_cast<double>(T));
    }
  }
  return best;
}

}  // namespace

int main() {
  std::printf("acceptance: one line per criterion\n");

  criterion(1, "kernel_naive_vs_kernelized", [] {
    double worst = 0.0;
    CounterRng root(101);
    for (std::size_t d = 2; d <= 4; ++d) {
      CounterRng rng = root.split(d);
      NaiveEnumMwu naive(PriorFamily(d), 0.1);
      KernelizedMwu kern(PriorFamily(d), 0.1);
      for (int t = 0; t < 50; ++t) {
        const StochasticMatrix a = naive.propose(), b = kern.propose();
        worst = std::max(worst, max_abs_diff(a.matrix(), b.matrix()));
        const Matrix m = random_loss_matrix(rng, stationary_distribution(b));
        naive.update(m);
        kern.update(m);
      }
    }
    return Outcome{worst <= 1e-9, fmt("max |diff| = %.2e (limit 1e-9)", worst)};
  });

  criterion(2, "kernel_fast_vs_kernelized", [] {
    double worst = 0.0;
    CounterRng root(202);
    for (std::size_t d = 3; d <= 8; ++d) {
      CounterRng rng = root.split(d);
      KernelizedMwu kern(PriorFamily(d), 0.1);
      FastKernelMwu fast(d, 0.1);
      for (int t = 0; t < 50; ++t) {
        const StochasticMatrix a = kern.propose(), b = fast.propose();
        worst = std::max(worst, max_abs_diff(a.matrix(), b.matrix()));
        const Matrix m = random_loss_matrix(rng, stationary_distribution(a));
        kern.update(m);
        fast.update(m);
      }
    }
    auto per_round = [](std::size_t d) {
      std::vector<double> samples;
      CounterRng rng(7);
      const Matrix m = random_loss_matrix(rng, ProbVector::uniform(d));
      for (int rep = 0; rep < 7; ++rep) {
        FastKernelMwu fast(d, 0.01);
        const int rounds = 200;
        const auto start = std::chrono::steady_clock::now();
        for (int t = 0; t < rounds; ++t) {
          (void)fast.propose();
          fast.update(m);
        }
        samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / rounds);
      }
      std::sort(samples.begin(), samples.end());
      return samples[samples.size() / 2];
    };
    per_round(32);
    const double t32 = per_round(32), t64 = per_round(64);
    const double ratio = t64 / t32;
    const bool ok = worst <= 1e-9 && ratio >= 3.0 && ratio <= 6.0;
    return Outcome{ok, fmt("max |diff| = %.2e; time ratio d=64/d=32 = %.2f (want [3, 6]; %.1f us vs %.1f us)", worst,
                           ratio, t64 * 1e6, t32 * 1e6)};
  });

  criterion(3, "prior_complexity_bound", [] {
    std::size_t violations = 0, checked = 0;
    double min_slack = 1e300;
    for (std::size_t d = 3; d <= 5; ++d)
      for (const auto& m : oracle::all_maps(d)) {
        const double lhs = -std::log(oracle::prior(d, m));
        const double rhs = 2.0 + 2.0 * static_cast<double>(complexity_of(m)) * std::log(static_cast<double>(d));
        min_slack = std::min(min_slack, rhs - lhs);
        violations += lhs > rhs + 1e-9;
        ++checked;
      }
    return Outcome{violations == 0,
                   fmt("%.0f maps, %.0f violations, min slack %.3f", double(checked), double(violations), min_slack)};
  });

  criterion(4, "mwu_regret_inequality", [] {
    std::size_t violations = 0;
    double worst = -1e300;
    CounterRng root(404);
    for (int run = 0; run < 100; ++run) {
      CounterRng rng = root.split(run);
      const std::size_t d = 2 + rng.below(9), T = 1 + rng.below(500);
      const ProbVector prior = random_prior(rng, d);
      const double eta = rng.uniform(0.01, 1.0);
      Mwu mwu(prior, eta);
      Tally tally(d);
      double sumsq = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const Vec l = uniform_vec(rng, d);
        tally.add(mwu.current().values(), l);
        sumsq += sq(linf(l));
        mwu.update(l);
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double lhs = tally.learner - tally.expert[i];
        const double rhs = -std::log(prior[i]) / eta + eta * sumsq;
        worst = std::max(worst, lhs - rhs);
        violations += lhs > rhs + 1e-9;
      }
    }
    return Outcome{violations == 0, fmt("%.0f violations, max(lhs - rhs) = %.3f", double(violations), worst)};
  });

  criterion(5, "omwu_rvu_inequality", [] {
    std::size_t violations = 0;
    double worst = -1e300;
    CounterRng root(505);
    for (int run = 0; run < 100; ++run) {
      CounterRng rng = root.split(run);
      const std::size_t d = 2 + rng.below(9), T = 1 + rng.below(500);
      const ProbVector prior = random_prior(rng, d);
      const double eta = rng.uniform(0.01, 1.0);
      const bool binary = run % 2 == 0;
      Omwu omwu(prior, eta);
      Tally tally(d);
      double variation = 0.0, movement = 0.0;
      Vec prev_l(d, 0.0), prev_p;
      for (std::size_t t = 0; t < T; ++t) {
        Vec l = uniform_vec(rng, d);
        if (binary)
          for (double& x : l) x = x < 0.5 ? 0.0 : 1.0;
        const Vec p = omwu.predict().values();
        tally.add(p, l);
        if (t > 0) {
          Vec diff(d);
          for (std::size_t i = 0; i < d; ++i) diff[i] = l[i] - prev_l[i];
          variation += sq(linf(diff));
          movement += sq(l1(p, prev_p));
        }
        omwu.update(l);
        prev_l = l;
        prev_p = p;
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double lhs = tally.learner - tally.expert[i];
        const double rhs = -std::log(prior[i]) / eta + eta * variation - movement / (8.0 * eta);
        worst = std::max(worst, lhs - rhs);
        violations += lhs > rhs + 1e-9;
      }
    }
    return Outcome{violations == 0, fmt("%.0f violations, max(lhs - rhs) = %.3f", double(violations), worst)};
  });

  criterion(6, "bm_reduction_bound", [] {
    constexpr std::size_t d = 3;
    std::size_t violations = 0, checked = 0;
    double worst = -1e300;
    const PriorFamily f(d);
    for (int seq = 0; seq < 20; ++seq)
      for (std::size_t k = 0; k <= d; ++k)
        for (double eta : {0.05, 0.2}) {
          CounterRng rng = CounterRng(606).split(seq);
          BmReduction bm(f.psi(k), eta);
          const std::size_t T = 200;
          double played = 0.0;
          Matrix g(d, d);
          for (std::size_t t = 0; t < T; ++t) {
            const StochasticMatrix phi = bm.propose();
            const Vec p = oracle::stationary(phi.matrix());
            const Vec l = uniform_vec(rng, d);
            for (std::size_t i = 0; i < d; ++i)
              for (std::size_t j = 0; j < d; ++j) {
                played += p[i] * phi(i, j) * l[j];
                g(i, j) += p[i] * l[j];
              }
            bm.update(outer_product(ProbVector::from_weights(p).values(), l));
          }
          for (const auto& m : oracle::all_maps(d)) {
            double cmp = 0.0, log_mass = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
              cmp += g(i, m[i]);
              log_mass += std::log(oracle::psi(d, k, i, m[i]));
            }
            const double lhs = played - cmp, rhs = -log_mass / eta + eta * static_cast<double>(T);
            worst = std::max(worst, lhs - rhs);
            violations += lhs > rhs + 1e-9;
            ++checked;
          }
        }
    return Outcome{violations == 0, fmt("%.0f comparisons, %.0f violations, max(lhs - rhs) = %.3f", double(checked),
                                        double(violations), worst)};
  });

  criterion(7, "adaptive_meta_bounds", [] {
    constexpr std::size_t d = 3, T = 4096;
    const double t = static_cast<double>(T), M = grid_size(d);
    std::size_t violations = 0;
    double slack1 = 1e300, slack2 = 1e300;
    for (int which = 0; which < 2; ++which)
      for (int adversarial = 0; adversarial < 2; ++adversarial) {
        CounterRng rng = CounterRng(707).split(static_cast<std::uint64_t>(which * 2 + adversarial));
        Tally tally(d);
        auto play = [&](auto meta) {
          for (std::size_t s = 0; s < T; ++s) {
            const ProbVector p = meta.propose();
            Vec l = adversarial ? adversarial_loss(rng, p) : uniform_vec(rng, d);
            if (!adversarial)
              for (double& x : l) x = x < 0.5 ? 0.0 : 1.0;
            tally.add(p.values(), l);
            meta.feed(LossVector(l));
          }
        };
        if (which == 0) play(make_kernel_meta(d, T));
        else play(make_bm_meta(d, T));
        for (const auto& m : oracle::all_maps(d)) {
          const double lip = -std::log(oracle::prior(d, m));
          const double bound = which == 0 ? 3 * std::sqrt(t * lip) + 2 * std::sqrt(2 * t) + 2 * std::sqrt(t * std::log(M))
                                          : 3 * std::sqrt(t * lip) + 2 * std::sqrt(t) + 4 * std::sqrt(t * std::log(double(d)));
          const double slack = bound - tally.regret(m);
          (which == 0 ? slack1 : slack2) = std::min(which == 0 ? slack1 : slack2, slack);
          violations += slack < 0;
        }
      }
    return Outcome{violations == 0, fmt("%.0f violations; min slack kernel meta %.1f, BM meta %.1f",
                                        double(violations), slack1, slack2)};
  });

  // Criteria 8-10 share three self-play runs.
  constexpr std::size_t game_T = 20000, half_T = 10000, quarter_T = 5000;
  std::vector<std::pair<GameSpec, JointTrace>> runs;
  std::string run_error;
  try {
    for (std::size_t d : {3, 5, 10}) {
      GameSpec g = make_zero_sum(d, 1);
      JointTrace tr = run_self_play(g, game_T);
      runs.emplace_back(std::move(g), std::move(tr));
    }
  } catch (const std::exception& e) {
    run_error = e.what();
  }

  criterion(8, "game_path_length_flat", [&] {
    if (!run_error.empty()) return Outcome{false, run_error};
    bool ok = true;
    std::string detail;
    for (const auto& [g, tr] : runs) {
      const double a = path_length(tr, half_T), b = path_length(tr, game_T);
      const double cap = 200.0 * 2.0 * std::log(double(g.d));
      const double growth = b / a - 1.0;
      ok = ok && growth < 0.05 && a < cap && b < cap;
      detail += fmt("d=%.0f: %.4f -> %.4f (+%.1f%%); ", double(g.d), a, b, 100 * growth);
    }
    return Outcome{ok, detail + "want growth < 5% and < 200 N ln d"};
  });

  criterion(9, "game_equilibrium_rates", [&] {
    if (!run_error.empty()) return Outcome{false, run_error};
    bool ok = true;
    std::string detail;
    for (const auto& [g, tr] : runs) {
      const double e1 = max_external(tr, half_T), e2 = max_external(tr, game_T);
      const double cce_q = max_external(tr, quarter_T) / quarter_T, cce_t = e2 / game_T;
      const double ce_q = max_swap(tr, quarter_T) / quarter_T, ce_t = max_swap(tr, game_T) / game_T;
      const bool flat = std::abs(e2 - e1) <= 0.10 * std::abs(e1);
      const bool cce_ok = cce_t <= cce_q / 2.0 * 1.25;
      const bool ce_ok = ce_t <= ce_q / 2.0;
      ok = ok && flat && cce_ok && ce_ok;
      detail += fmt("d=%.0f: ext %.3f->%.3f, ", double(g.d), e1, e2) +
                fmt("cce x%.2f, ce x%.2f; ", cce_q / cce_t, ce_q / ce_t);
    }
    return Outcome{ok, detail};
  });

  criterion(10, "game_trace_invariants", [&] {
    if (!run_error.empty()) return Outcome{false, run_error};
    std::size_t loss_diff = 0, stability = 0;
    for (const auto& [g, tr] : runs) {
      const std::size_t N = tr.n_players();
      for (std::size_t t = 1; t < tr.rounds(); ++t)
        for (std::size_t n = 0; n < N; ++n) {
          Vec diff(g.d);
          for (std::size_t a = 0; a < g.d; ++a) diff[a] = tr.players[n].loss[t][a] - tr.players[n].loss[t - 1][a];
          double moves = 0.0;
          for (std::size_t j = 0; j < N; ++j)
            if (j != n) moves += sq(l1(tr.players[j].p[t].values(), tr.players[j].p[t - 1].values()));
          loss_diff += sq(linf(diff)) > static_cast<double>(N - 1) * moves + 1e-12;
          const Vec& w = tr.meta_weights[n][t];
          const Vec& w0 = tr.meta_weights[n][t - 1];
          for (std::size_t k = 0; k < w.size(); ++k) stability += w[k] < 0.5 * w0[k] || w[k] > 2.0 * w0[k];
        }
    }
    return Outcome{loss_diff == 0 && stability == 0,
                   fmt("loss-difference violations %.0f, stability violations %.0f", double(loss_diff), double(stability))};
  });

  criterion(11, "quantile_regret_bound", [] {
    constexpr std::size_t d = 16, T = 4096;
    const double t = static_cast<double>(T), M = grid_size(d);
    CounterRng rng(1111);
    Tally tally(d);
    KernelMeta meta = make_kernel_meta(d, T);
    for (std::size_t s = 0; s < T; ++s) {
      const ProbVector p = meta.propose();
      const Vec l = adversarial_loss(rng, p);
      tally.add(p.values(), l);
      meta.feed(LossVector(l));
    }
    Vec sorted = tally.expert;
    std::sort(sorted.begin(), sorted.end());
    bool ok = true;
    std::string detail;
    for (double eps : {1.0 / 16, 0.25, 0.5}) {
      const double k = std::ceil(eps * d - 1e-9);
      const double reg = tally.learner - sorted[static_cast<std::size_t>(k) - 1];
      const double bound = 3 * std::sqrt(t * std::log(8.0 * d / k)) + 2 * std::sqrt(2 * t) + 2 * std::sqrt(t * std::log(M));
      ok = ok && reg <= bound;
      detail += fmt("eps=%.4f: %.1f <= %.1f; ", eps, reg, bound);
    }
    return Outcome{ok, detail};
  });

  criterion(12, "swap_and_gap_identities", [] {
    CounterRng rng(1212);
    double swap_gap = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t d = 2 + static_cast<std::size_t>(rep % 3);
      ExpertTrace tr;
      std::vector<Vec> ps, ls;
      for (int t = 0; t < 40; ++t) {
        const ProbVector p = random_prior(rng, d);
        const Vec l = uniform_vec(rng, d);
        tr.push(p, LossVector(l));
        ps.push_back(p.values());
        ls.push_back(l);
      }
      const double ref = oracle::brute_swap(ps, ls);
      const SwapResult s = best_swap(tr);
      Tally tally(d);
      for (std::size_t t = 0; t < ps.size(); ++t) tally.add(ps[t], ls[t]);
      swap_gap = std::max({swap_gap, std::abs(s.regret - ref), std::abs(tally.regret(s.comparator.map()) - ref)});
    }
    double gap_diff = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const GameSpec g = make_random_game(2, 2, 5000 + rep);
      const JointTrace tr = run_self_play(g, 100);
      const EquilibriumGaps lib = equilibrium_gaps(tr);
      gap_diff = std::max({gap_diff, std::abs(lib.cce_gap - direct_gap(tr, g, false)),
                           std::abs(lib.ce_gap - direct_gap(tr, g, true))});
    }
    return Outcome{swap_gap <= 1e-12 && gap_diff <= 1e-9,
                   fmt("best_swap vs enumeration %.2e (limit 1e-12); gap identity %.2e (limit 1e-9)", swap_gap, gap_diff)};
  });

  std::printf("%s: %d of 12 criteria failed\n", failures == 0 ? "ok" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
