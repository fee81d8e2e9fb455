#pragma once

#include "wzk/dist/enumerate.hpp"
#include "wzk/inverters/inverter.hpp"
#include "wzk/owf/candidate.hpp"

namespace wzk {

struct ReductionOutcome {
  bool accept = false;
  bool fallback = false;  // an inverter answer was unusable somewhere in the run
};

// r <- Gen; rho <- A(r, 1); accept iff f_x(rho) = (r, 1).
inline ReductionOutcome nizk_reduce(const NizkSpec& spec, const BitString& x, const Inverter& inv,
                                    CoinSource& coins) {
  const BitString r = coins.bits(spec.crs_bits);
  const Outcome y = nizk_output(r, true);
  auto rho = inv.answer(y, coins);
  if (!inv.inverts(y, rho)) return {false, true};
  // The preimage check implies the simulated pair verifies.
  auto [sr, pi] = spec.simulator(x, (*rho)[0]);
  if (sr != r || !spec.verifier(x, sr, pi, 0)) {
    throw ContractViolation("nizk_reduce: preimage check passed on a rejecting transcript");
  }
  return {true, false};
}

inline Probability nizk_reduce_exact(const NizkSpec& spec, const BitString& x, const Inverter& inv,
                                     EnumerationBudget budget = {}) {
  return enumerate_probability([&](CoinSource& c) { return nizk_reduce(spec, x, inv, c).accept; },
                               budget);
}

}  // namespace wzk
