#include "phireg/regret.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace phireg {

namespace {

void require_nonempty(const ExpertTrace& trace, const char* what) {
  if (trace.empty()) throw std::invalid_argument(std::string(what) + ": empty trace");
}

ExpertTrace prefix(const ExpertTrace& trace, std::size_t rounds) {
  if (rounds == 0 || rounds >= trace.rounds()) return trace;
  ExpertTrace out;
  out.p.assign(trace.p.begin(), trace.p.begin() + static_cast<std::ptrdiff_t>(rounds));
  out.loss.assign(trace.loss.begin(), trace.loss.begin() + static_cast<std::ptrdiff_t>(rounds));
  return out;
}

}  // namespace

double regret_against(const ExpertTrace& trace, const StochasticMatrix& phi) {
  trace.validate();
  const std::size_t d = trace.dim();
  if (!trace.empty() && phi.size() != d) throw std::invalid_argument("regret_against: dimension mismatch");
  KahanSum s;
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    const ProbVector moved = phi.apply(trace.p[t]);
    for (std::size_t j = 0; j < d; ++j) s += (trace.p[t][j] - moved[j]) * trace.loss[t][j];
  }
  return s.value();
}

double regret_against(const ExpertTrace& trace, const BinaryTransform& phi) {
  trace.validate();
  const std::size_t d = trace.dim();
  if (!trace.empty() && phi.size() != d) throw std::invalid_argument("regret_against: dimension mismatch");
  KahanSum s;
  for (std::size_t t = 0; t < trace.rounds(); ++t)
    for (std::size_t i = 0; i < d; ++i) s += trace.p[t][i] * (trace.loss[t][i] - trace.loss[t][phi[i]]);
  return s.value();
}

Matrix cross_loss(const ExpertTrace& trace) {
  trace.validate();
  const std::size_t d = trace.dim();
  std::vector<KahanSum> acc(d * d);
  for (std::size_t t = 0; t < trace.rounds(); ++t)
    for (std::size_t i = 0; i < d; ++i) {
      const double pi = trace.p[t][i];
      for (std::size_t j = 0; j < d; ++j) acc[i * d + j] += pi * trace.loss[t][j];
    }
  Matrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = acc[i * d + j].value();
  return g;
}

Vec cumulative_losses(const ExpertTrace& trace) {
  trace.validate();
  const std::size_t d = trace.dim();
  std::vector<KahanSum> acc(d);
  for (const auto& l : trace.loss)
    for (std::size_t i = 0; i < d; ++i) acc[i] += l[i];
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = acc[i].value();
  return out;
}

double learner_loss(const ExpertTrace& trace) {
  trace.validate();
  KahanSum s;
  for (std::size_t t = 0; t < trace.rounds(); ++t) s += dot(trace.p[t].span(), trace.loss[t].span());
  return s.value();
}

SwapResult best_swap(const ExpertTrace& trace) {
  require_nonempty(trace, "best_swap");
  const Matrix g = cross_loss(trace);
  const std::size_t d = trace.dim();
  std::vector<std::size_t> map(d);
  KahanSum regret;
  for (std::size_t i = 0; i < d; ++i) {
    auto row = g.row(i);
    map[i] = static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin());
    regret += row[i] - row[map[i]];
  }
  return {BinaryTransform(std::move(map)), regret.value()};
}

ExternalResult best_external(const ExpertTrace& trace) {
  require_nonempty(trace, "best_external");
  const Vec cum = cumulative_losses(trace);
  const auto best = static_cast<std::size_t>(std::min_element(cum.begin(), cum.end()) - cum.begin());
  return {best, learner_loss(trace) - cum[best]};
}

InternalResult best_internal(const ExpertTrace& trace) {
  require_nonempty(trace, "best_internal");
  const std::size_t d = trace.dim();
  if (d < 2) throw std::invalid_argument("best_internal: d must be at least 2");
  const Matrix g = cross_loss(trace);
  InternalResult best{0, 1, g(0, 0) - g(0, 1)};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      const double r = g(i, i) - g(i, j);
      if (r > best.regret) best = {i, j, r};
    }
  return best;
}

double quantile_regret(const ExpertTrace& trace, double eps) {
  require_nonempty(trace, "quantile_regret");
  const std::size_t d = trace.dim();
  const double dd = static_cast<double>(d);
  if (!(eps >= 1.0 / dd - 1e-12) || !(eps <= 1.0 + 1e-12))
    throw std::invalid_argument("quantile_regret: eps must lie in [1/d, 1]");
  const auto k = static_cast<std::size_t>(std::clamp(std::ceil(eps * dd - 1e-9), 1.0, dd));
  const Vec cum = cumulative_losses(trace);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cum[a] < cum[b]; });
  return learner_loss(trace) - cum[order[k - 1]];
}

RegretReport regret_report(const ExpertTrace& trace, const std::vector<double>& quantile_eps,
                           std::size_t per_phi_max_dim) {
  RegretReport r;
  r.external = best_external(trace).regret;
  r.internal = trace.dim() >= 2 ? best_internal(trace).regret : 0.0;
  auto sw = best_swap(trace);
  r.swap = sw.regret;
  r.swap_comparator = std::move(sw.comparator);
  if (trace.dim() <= per_phi_max_dim && trace.dim() <= kMaxEnumerationDim) {
    const Matrix g = cross_loss(trace);
    Vec per;
    for (const auto& phi : enumerate_binary(trace.dim())) {
      KahanSum s;
      for (std::size_t i = 0; i < phi.size(); ++i) s += g(i, i) - g(i, phi[i]);
      per.push_back(s.value());
    }
    r.per_phi = std::move(per);
  }
  for (double eps : quantile_eps) r.quantile[eps] = quantile_regret(trace, eps);
  return r;
}

// ----------------------------------------------------------- equilibrium

EquilibriumGaps equilibrium_gaps(const JointTrace& trace, std::size_t rounds) {
  if (trace.players.empty() || trace.rounds() == 0) throw std::invalid_argument("equilibrium_gaps: empty trace");
  const std::size_t t_used = rounds == 0 ? trace.rounds() : std::min(rounds, trace.rounds());
  EquilibriumGaps gaps{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& player : trace.players) {
    const ExpertTrace pre = prefix(player, t_used);
    gaps.cce_gap = std::max(gaps.cce_gap, best_external(pre).regret / static_cast<double>(t_used));
    gaps.ce_gap = std::max(gaps.ce_gap, best_swap(pre).regret / static_cast<double>(t_used));
  }
  return gaps;
}

EquilibriumGaps equilibrium_gaps_direct(const JointTrace& trace, const GameSpec& game, std::size_t rounds,
                                        std::size_t budget) {
  if (trace.players.empty() || trace.rounds() == 0)
    throw std::invalid_argument("equilibrium_gaps_direct: empty trace");
  if (trace.n_players() != game.n_players || trace.dim() != game.d)
    throw std::invalid_argument("equilibrium_gaps_direct: trace and game disagree");
  const std::size_t count = checked_profile_count(game.n_players, game.d, budget);
  const std::size_t t_used = rounds == 0 ? trace.rounds() : std::min(rounds, trace.rounds());
  const std::size_t d = game.d;
  const std::size_t n_players = game.n_players;

  // h[n](i, j): mass of joint actions with a_n = i, weighted by the loss player
  // n would get after deviating to j.
  std::vector<std::vector<KahanSum>> h(n_players, std::vector<KahanSum>(d * d));
  std::vector<std::size_t> stride(n_players, 1);
  for (std::size_t n = n_players - 1; n-- > 0;) stride[n] = stride[n + 1] * d;

  for (std::size_t t = 0; t < t_used; ++t)
    for (std::size_t idx = 0; idx < count; ++idx) {
      const auto a = game.actions(idx);
      double prob = 1.0;
      for (std::size_t n = 0; n < n_players && prob != 0.0; ++n) prob *= trace.players[n].p[t][a[n]];
      if (prob == 0.0) continue;
      for (std::size_t n = 0; n < n_players; ++n) {
        const std::size_t base = idx - a[n] * stride[n];
        for (std::size_t j = 0; j < d; ++j) h[n][a[n] * d + j] += prob * game.losses[n][base + j * stride[n]];
      }
    }

  EquilibriumGaps gaps{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const double inv_t = 1.0 / static_cast<double>(t_used);
  for (std::size_t n = 0; n < n_players; ++n) {
    auto at = [&](std::size_t i, std::size_t j) { return h[n][i * d + j].value(); };
    for (std::size_t b = 0; b < d; ++b) {
      KahanSum s;
      for (std::size_t i = 0; i < d; ++i) s += at(i, i) - at(i, b);
      gaps.cce_gap = std::max(gaps.cce_gap, s.value() * inv_t);
    }
    if (d <= kMaxEnumerationDim && std::pow(static_cast<double>(d), static_cast<double>(d)) <= 1e5) {
      for (const auto& phi : enumerate_binary(d)) {
        KahanSum s;
        for (std::size_t i = 0; i < d; ++i) s += at(i, i) - at(i, phi[i]);
        gaps.ce_gap = std::max(gaps.ce_gap, s.value() * inv_t);
      }
    } else {
      KahanSum s;
      for (std::size_t i = 0; i < d; ++i) {
        double best = 0.0;
        for (std::size_t j = 0; j < d; ++j) best = std::max(best, at(i, i) - at(i, j));
        s += best;
      }
      gaps.ce_gap = std::max(gaps.ce_gap, s.value() * inv_t);
    }
  }
  return gaps;
}

// --------------------------------------------------------------------- CSV

void write_trace_csv(const ExpertTrace& trace, const std::filesystem::path& path) {
  trace.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  const std::size_t d = trace.dim();
  out << 't';
  for (std::size_t i = 1; i <= d; ++i) out << ",p_" << i;
  for (std::size_t i = 1; i <= d; ++i) out << ",loss_" << i;
  out << '\n' << std::setprecision(17);
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    out << t + 1;
    for (double x : trace.p[t]) out << ',' << x;
    for (double x : trace.loss[t]) out << ',' << x;
    out << '\n';
  }
}

namespace {
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}
}  // namespace

ExpertTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace CSV: missing header");
  const auto header = split_csv(line);
  std::vector<std::size_t> p_col, l_col;
  for (std::size_t i = 1;; ++i) {
    auto pit = std::find(header.begin(), header.end(), "p_" + std::to_string(i));
    auto lit = std::find(header.begin(), header.end(), "loss_" + std::to_string(i));
    if (pit == header.end() || lit == header.end()) break;
    p_col.push_back(static_cast<std::size_t>(pit - header.begin()));
    l_col.push_back(static_cast<std::size_t>(lit - header.begin()));
  }
  if (p_col.empty()) throw std::invalid_argument("trace CSV: no p_1/loss_1 columns");
  ExpertTrace trace;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    auto cell = [&](std::size_t col) {
      if (col >= cells.size()) throw std::invalid_argument("trace CSV: short row " + std::to_string(row));
      try {
        return std::stod(cells[col]);
      } catch (const std::exception&) {
        throw std::invalid_argument("trace CSV: bad number on row " + std::to_string(row));
      }
    };
    Vec p, l;
    for (std::size_t c : p_col) p.push_back(cell(c));
    for (std::size_t c : l_col) l.push_back(cell(c));
    trace.push(ProbVector(std::move(p)), LossVector(std::move(l)));
  }
  return trace;
}

}  // namespace phireg
