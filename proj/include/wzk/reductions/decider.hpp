#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wzk/inverters/inverter.hpp"
#include "wzk/reductions/nizk.hpp"

namespace wzk {

struct Decision {
  bool output = true;
  std::string branch;       // "check-failed" or "reduce"
  std::size_t level = 0;    // failing level for the k-oracle variant, else 0
  bool fallback = false;
};

using ReduceFn = std::function<ReductionOutcome(CoinSource&)>;

// k-oracle variant: the same check for each level in order, then the reduction.
inline Decision one_sided_decide_levels(const std::vector<const Inverter*>& invs, const ReduceFn& reduce,
                                        CoinSource& coins) {
  for (std::size_t i = 0; i < invs.size(); ++i) {
    const Inverter& inv = *invs[i];
    const auto& f = inv.target();
    const Outcome y = f(f.domain.sample(coins));
    if (!inv.inverts(y, inv.answer(y, coins))) {
      return {true, "check-failed", invs.size() > 1 ? i + 1 : 0, false};
    }
  }
  ReductionOutcome r = reduce(coins);
  return {r.accept, "reduce", 0, r.fallback};
}

// A single check: y <- f_x(U), r <- A_x(y); output 1 unless f_x(r) = y, in
// which case defer to the reduction. inv must target f_x (for instance a
// RestrictedInverter over the lifted function).
inline Decision one_sided_decide(const Inverter& inv, const ReduceFn& reduce, CoinSource& coins) {
  return one_sided_decide_levels({&inv}, reduce, coins);
}

}  // namespace wzk
