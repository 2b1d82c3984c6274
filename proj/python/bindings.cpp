// Python module phiregret._core: thin wrappers over the C++ library. Matrices
// cross the boundary as lists of rows, vectors as lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "phireg/game.hpp"
#include "phireg/harness.hpp"
#include "phireg/meta.hpp"
#include "phireg/priors.hpp"
#include "phireg/regret.hpp"
#include "phireg/rng.hpp"
#include "phireg/verify.hpp"

namespace py = pybind11;
using namespace phireg;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const Matrix& m) {
  Rows out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

Matrix from_rows(const Rows& rows) {
  const std::size_t r = rows.size(), c = r ? rows.front().size() : 0;
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw std::invalid_argument("ragged matrix");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

ExperimentConfig config_from(const py::kwargs& kw, const std::string& mode) {
  ExperimentConfig c;
  c.mode = mode;
  for (const auto& [k, v] : kw) {
    std::string value;
    if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
    else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& x : v) value += (value.empty() ? "" : ",") + py::str(py::repr(x)).cast<std::string>();
    } else if (py::isinstance<py::float_>(v)) value = py::repr(v).cast<std::string>();
    else value = py::str(v).cast<std::string>();
    apply_config_value(c, k.cast<std::string>(), value);
  }
  c.validate();
  return c;
}

ExpertTrace trace_from(const Rows& p, const Rows& loss) {
  if (p.size() != loss.size()) throw std::invalid_argument("p and loss lengths differ");
  ExpertTrace tr;
  for (std::size_t t = 0; t < p.size(); ++t) tr.push(ProbVector(p[t]), LossVector(loss[t]));
  return tr;
}

py::dict game_dict(const GameSpec& g) {
  py::dict d;
  d["N"] = g.n_players;
  d["d"] = g.d;
  d["losses"] = g.losses;
  d["tags"] = g.tags;
  return d;
}

GameSpec game_from(const py::dict& d) {
  GameSpec g;
  g.n_players = d["N"].cast<std::size_t>();
  g.d = d["d"].cast<std::size_t>();
  g.losses = d["losses"].cast<std::vector<Vec>>();
  if (d.contains("tags")) g.tags = d["tags"].cast<std::vector<std::string>>();
  g.validate();
  return g;
}

template <class Meta>
void bind_meta(py::module_& m, const char* name, Meta (*factory)(std::size_t, std::size_t, std::optional<double>)) {
  py::class_<Meta>(m, name)
      .def(py::init([factory](std::size_t d, std::size_t horizon, std::optional<double> meta_eta) {
             return factory(d, horizon, meta_eta);
           }),
           py::arg("d"), py::arg("horizon"), py::arg("meta_eta") = py::none())
      .def("propose", [](Meta& s) { return s.propose().values(); })
      .def("feed", [](Meta& s, const Vec& loss) { s.feed(LossVector(loss)); }, py::arg("loss"))
      .def("weights", [](const Meta& s) { return s.weights().values(); })
      .def("aggregated", [](const Meta& s) { return to_rows(s.aggregated().matrix()); })
      .def_property_readonly("base_count", &Meta::base_count)
      .def_property_readonly("meta_eta", &Meta::meta_eta)
      .def_property_readonly("base_etas", &Meta::base_etas)
      .def_property_readonly("round", &Meta::round);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Comparator-adaptive swap-regret learners and game dynamics";

  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  m.def("stationary_distribution", [](const Rows& phi) { return stationary_distribution(from_rows(phi)).values(); },
        py::arg("phi"));

  m.def("prior_psi", [](std::size_t d, std::size_t k) { return to_rows(PriorFamily(d).psi(k).matrix()); },
        py::arg("d"), py::arg("k"));
  m.def("prior_weights", [](std::size_t d) { return PriorFamily(d).weights(); }, py::arg("d"));
  m.def("prior_marginal", [](std::size_t d) { return to_rows(PriorFamily(d).marginal()); }, py::arg("d"));
  m.def("prior_mass",
        [](const std::vector<std::size_t>& map) {
          return prior_mass(PriorFamily(map.size()), BinaryTransform(map));
        },
        py::arg("map"));
  m.def("complexity", [](const std::vector<std::size_t>& map) { return complexity(BinaryTransform(map)).c; },
        py::arg("map"));

  bind_meta<KernelMeta>(m, "KernelMeta", &make_kernel_meta);
  bind_meta<BmMeta>(m, "BmMeta", &make_bm_meta);

  m.def("best_swap",
        [](const Rows& p, const Rows& loss) {
          const SwapResult r = best_swap(trace_from(p, loss));
          return py::make_tuple(r.comparator.map(), r.regret);
        },
        py::arg("p"), py::arg("loss"));
  m.def("best_external",
        [](const Rows& p, const Rows& loss) {
          const ExternalResult r = best_external(trace_from(p, loss));
          return py::make_tuple(r.expert, r.regret);
        },
        py::arg("p"), py::arg("loss"));
  m.def("regret_against",
        [](const Rows& p, const Rows& loss, const Rows& phi) {
          return regret_against(trace_from(p, loss), StochasticMatrix(from_rows(phi)));
        },
        py::arg("p"), py::arg("loss"), py::arg("phi"));
  m.def("quantile_regret",
        [](const Rows& p, const Rows& loss, double eps) { return quantile_regret(trace_from(p, loss), eps); },
        py::arg("p"), py::arg("loss"), py::arg("eps"));

  m.def("make_zero_sum", [](std::size_t d, std::uint64_t seed) { return game_dict(make_zero_sum(d, seed)); },
        py::arg("d"), py::arg("seed"));
  m.def("make_polymatrix",
        [](std::size_t n, std::size_t d, std::uint64_t seed) {
          return game_dict(make_constant_sum_polymatrix(n, d, seed));
        },
        py::arg("N"), py::arg("d"), py::arg("seed"));
  m.def("make_matching_pennies", [] { return game_dict(make_matching_pennies()); });
  m.def("expected_loss_vectors",
        [](const py::dict& game, const Rows& profile) {
          std::vector<ProbVector> prof;
          for (const auto& p : profile) prof.emplace_back(p);
          std::vector<Vec> out;
          for (const auto& l : expected_loss_vectors(game_from(game), prof)) out.push_back(l.values());
          return out;
        },
        py::arg("game"), py::arg("profile"));
  m.def("self_play",
        [](const py::dict& game, std::size_t rounds) {
          const JointTrace tr = run_self_play(game_from(game), rounds);
          py::dict out;
          py::list ps, ls;
          for (const auto& pl : tr.players) {
            Rows p, l;
            for (std::size_t t = 0; t < pl.rounds(); ++t) {
              p.push_back(pl.p[t].values());
              l.push_back(pl.loss[t].values());
            }
            ps.append(p);
            ls.append(l);
          }
          out["p"] = ps;
          out["loss"] = ls;
          out["path_length"] = tr.path_length;
          const EquilibriumGaps g = equilibrium_gaps(tr);
          out["cce_gap"] = g.cce_gap;
          out["ce_gap"] = g.ce_gap;
          out["max_stationary_residual"] = tr.max_stationary_residual;
          return out;
        },
        py::arg("game"), py::arg("rounds"));

  // Experiment runners take the CLI option names as keyword arguments (with
  // '_' for '-') and return the summary as a JSON string.
  m.def("run_expert", [](const py::kwargs& kw) { return run_expert_experiment(config_from(kw, "expert")).summary.dump(); });
  m.def("run_game", [](const py::kwargs& kw) { return run_game_experiment(config_from(kw, "game")).summary.dump(); });
  m.def("run_sweep", [](const py::kwargs& kw) {
    const std::string mode = kw.contains("mode") ? kw["mode"].cast<std::string>() : "expert";
    return run_sweep(config_from(kw, mode)).dump();
  });
  m.def("verify",
        [](const std::string& level, std::uint64_t seed) {
          py::list out;
          for (const auto& r : run_verification_suite(level, seed)) {
            py::dict d;
            d["name"] = r.name;
            d["passed"] = r.passed;
            d["observed"] = r.observed;
            d["limit"] = r.limit;
            d["detail"] = r.detail;
            out.append(d);
          }
          return out;
        },
        py::arg("level") = "fast", py::arg("seed") = 1);

  py::class_<CounterRng>(m, "CounterRng")
      .def(py::init<std::uint64_t>(), py::arg("key"))
      .def("next", [](CounterRng& r) { return r(); })
      .def("uniform", [](CounterRng& r) { return r.uniform(); })
      .def("split", [](const CounterRng& r, const std::string& label) { return r.split(label); }, py::arg("label"))
      .def_property_readonly("key", &CounterRng::key)
      .def_property_readonly("counter", &CounterRng::counter);
}
