#pragma once

#include <optional>

#include "wzk/inverters/inverter.hpp"
#include "wzk/owf/candidate.hpp"
#include "wzk/owf/cr.hpp"
#include "wzk/reductions/nizk.hpp"

namespace wzk {

struct RvBResult {
  Estimate value = Estimate::zero();
  std::optional<BitString> proof;
  std::vector<SearchRecord> trace;
};

// Decreasing search over a/q: invert (r, a/q), re-estimate the simulated
// proof's acceptance from q fresh verifier coins, keep the first a within tau.
inline RvBResult rv_B(const NizkSpec& spec, const BitString& x, const Inverter& inv,
                      const ReductionParams& params, const BitString& r, CoinSource& coins,
                      bool keep_trace = false) {
  const std::uint64_t q = params.q;
  RvBResult out;
  for (std::uint64_t a = q; a >= 1; --a) {
    SearchRecord rec;
    rec.a = a;
    const Outcome y = rv_output(r, Estimate(a, q));
    auto ans = inv.answer(y, coins);
    rec.inverted = inv.inverts(y, ans);
    BitString pi;
    if (rec.inverted) {
      pi = spec.simulator(x, (*ans)[0]).second;
      std::uint64_t hits = 0;
      for (std::uint64_t j = 0; j < q; ++j) hits += spec.verifier(x, r, pi, coins.draw(spec.verifier_coins()));
      rec.est_hat = Estimate(hits, q);
      const std::uint64_t diff = hits > a ? hits - a : a - hits;
      rec.accepted = make_rational(static_cast<std::int64_t>(diff), q) < params.tau.value();
    }
    if (keep_trace) out.trace.push_back(rec);
    if (rec.accepted) {
      out.value = Estimate(a, q);
      out.proof = std::move(pi);
      return out;
    }
  }
  return out;
}

// r <- Gen, pi <- B_2(x; r), then the verifier's randomized decision.
inline ReductionOutcome rv_reduce(const NizkSpec& spec, const BitString& x, const Inverter& inv,
                                  const ReductionParams& params, CoinSource& coins) {
  if (!spec.randomized_verifier()) throw ContractViolation("rv_reduce needs a randomized verifier");
  params.validate(1);
  const BitString r = coins.bits(spec.crs_bits);
  RvBResult b = rv_B(spec, x, inv, params, r, coins);
  const bool fallback = !b.proof;
  const BitString pi = b.proof ? *b.proof : spec.simulator(x, 0).second;
  return {spec.verifier(x, r, pi, coins.draw(spec.verifier_coins())), fallback};
}

}  // namespace wzk
