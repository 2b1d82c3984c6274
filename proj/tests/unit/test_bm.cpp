#include <doctest.h>

#include <cmath>

#include "phireg/bm.hpp"
#include "phireg/priors.hpp"
#include "phireg/rng.hpp"

using namespace phireg;

TEST_CASE("a fresh reduction proposes its prior") {
  const PriorFamily f(4);
  for (std::size_t k = 0; k < f.count(); ++k) {
    BmReduction bm(f.psi(k), 0.2);
    CHECK(max_abs_diff(bm.propose().matrix(), f.psi(k).matrix()) < 1e-15);
    for (int t = 0; t < 5; ++t) bm.update(Matrix(4, 4, 0.0));
    CHECK(max_abs_diff(bm.propose().matrix(), f.psi(k).matrix()) < 1e-15);
  }
}

TEST_CASE("per-row Hedge step with eta = ln 2") {
  BmReduction bm(StochasticMatrix::uniform(2), std::log(2.0));
  bm.update(Matrix{{1.0, 0.0}, {0.0, 1.0}});
  const StochasticMatrix phi = bm.propose();
  CHECK(phi(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(phi(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(phi(1, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(phi(1, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rows are decoupled") {
  const PriorFamily f(3);
  BmReduction a(f.psi(3), 0.4), b(f.psi(3), 0.4);
  Matrix m{{0.1, 0.2, 0.3}, {0.0, 0.5, 0.1}, {0.2, 0.2, 0.2}};
  Matrix m2 = m;
  m2(1, 0) = 0.9;
  a.update(m);
  b.update(m2);
  const auto pa = a.propose(), pb = b.propose();
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(pa(0, j) == pb(0, j));
    CHECK(pa(2, j) == pb(2, j));
  }
  CHECK(pa(1, 0) != pb(1, 0));
}

TEST_CASE("optimistic rows use the last row as the hint") {
  const PriorFamily f(3);
  BmReduction bm(f.psi(0), 0.5, SubKind::optimistic);
  const Matrix m{{0.2, 0.4, 0.0}, {0.0, 0.0, 0.6}, {0.3, 0.3, 0.3}};
  bm.update(m);
  const StochasticMatrix phi = bm.propose();
  for (std::size_t i = 0; i < 3; ++i) {
    Vec w(3);
    for (std::size_t j = 0; j < 3; ++j) w[j] = f.psi(0)(i, j) * std::exp(-2 * 0.5 * m(i, j));
    const ProbVector ref = ProbVector::from_weights(w);
    for (std::size_t j = 0; j < 3; ++j) CHECK(phi(i, j) == doctest::Approx(ref[j]));
  }
}

TEST_CASE("reduction regret obeys its prior bound and decomposes by rows") {
  const std::size_t d = 3;
  const PriorFamily f(d);
  CounterRng rng(21);
  for (std::size_t k = 0; k < f.count(); ++k)
    for (double eta : {0.05, 0.2}) {
      BmReduction bm(f.psi(k), eta);
      std::vector<Matrix> phis;
      std::vector<Vec> ps, ls;
      const int rounds = 150;
      for (int t = 0; t < rounds; ++t) {
        const StochasticMatrix phi = bm.propose();
        const ProbVector p = stationary_distribution(phi);
        Vec l(d);
        for (double& x : l) x = rng.uniform();
        bm.update(outer_product(p.values(), l));
        phis.push_back(phi.matrix());
        ps.push_back(p.values());
        ls.push_back(l);
      }
      for (const auto& cmp : enumerate_binary(d)) {
        double total = 0.0;
        std::vector<double> per_row(d, 0.0);
        for (int t = 0; t < rounds; ++t)
          for (std::size_t i = 0; i < d; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < d; ++j) row += phis[t](i, j) * ls[t][j];
            const double r = ps[t][i] * (row - ls[t][cmp[i]]);
            per_row[i] += r;
            total += r;
          }
        double summed = 0.0;
        for (double r : per_row) summed += r;
        CHECK(total == doctest::Approx(summed).epsilon(1e-12));
        const double bound = -induced_log_mass(f.psi(k).matrix(), cmp) / eta + eta * rounds;
        CHECK(total <= bound + 1e-9);
      }
    }
}

TEST_CASE("dimension errors") {
  BmReduction bm(StochasticMatrix::uniform(3), 0.1);
  CHECK_THROWS(bm.update(Matrix(2, 2)));
  Matrix nan(3, 3, 0.0);
  nan(0, 0) = std::nan("");
  CHECK_THROWS(bm.update(nan));
}
