#pragma once

// Self-checks behind `phiregret verify`: oracle equivalences and regret
// inequalities, each reported with its worst observed value.

#include <cstdint>
#include <string>
#include <vector>

#include "phireg/simplex.hpp"

namespace phireg {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Worst value seen: a max |difference| for equivalences, or the largest
  /// lhs - rhs for inequalities (negative means slack).
  double observed = 0.0;
  double limit = 0.0;
  std::string detail;
  double seconds = 0.0;
};

/// Max over rounds and entries of |naive - kernelized| and, for d >= 3,
/// |fast - kernelized| under i.i.d. uniform losses.
double kernel_equivalence_gap(std::size_t d, std::size_t rounds, double eta, std::uint64_t seed,
                              bool include_naive, bool include_fast);

/// Largest ln(1/pi(phi)) - (2 + 2 c_phi ln d) over all binary transforms.
double prior_complexity_excess(std::size_t d);

struct InequalityStats {
  std::size_t runs = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst = -1e300;  ///< largest lhs - rhs
};

/// Random MWU runs checked against KL(q, x_1)/eta + eta sum ||l_t||_inf^2 for every vertex q.
InequalityStats mwu_inequality(std::size_t runs, std::uint64_t seed, double eta_max = 1.0);
/// Random OMWU runs checked against the RVU bound with its negative stability term.
InequalityStats omwu_inequality(std::size_t runs, std::uint64_t seed, double eta_max = 1.0);
/// d = 3 BM-reduction with each psi^k prior against all 27 comparators.
InequalityStats bm_inequality(std::size_t sequences, const std::vector<double>& etas, std::uint64_t seed);

/// "fast" or "full".
std::vector<CheckResult> run_verification_suite(const std::string& level, std::uint64_t seed = 1);

}  // namespace phireg
