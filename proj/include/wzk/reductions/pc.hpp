#pragma once

#include "wzk/dist/enumerate.hpp"
#include "wzk/inverters/inverter.hpp"
#include "wzk/owf/candidate.hpp"
#include "wzk/protocol/measure.hpp"
#include "wzk/reductions/nizk.hpp"

namespace wzk {

// Round i: rho <- A(r_1, pi_1, ..., r_i, 1), reply with the simulator's
// 2i-th message under rho. A bottom answer falls back to rho = 0.
class InverterProver final : public ProverStrategy {
 public:
  InverterProver(const PublicCoinSpec& spec, BitString x, InverterPtr inv)
      : spec_(spec), x_(std::move(x)), inv_(std::move(inv)) {}

  ProverMove respond(const Transcript& prefix, CoinSource& coins) override {
    const Outcome y = pc_output(prefix, 1);
    auto ans = inv_->answer(y, coins);
    last_inverted_ = inv_->inverts(y, ans);
    const bool usable = ans && ans->size() == 2 && ans->at(1) < spec_.sim_coins;
    const std::uint64_t rho = usable ? (*ans)[1] : 0;
    return {spec_.simulator(x_, rho)[prefix.size()], !usable};
  }

  bool last_inverted() const noexcept { return last_inverted_; }

 private:
  const PublicCoinSpec& spec_;
  BitString x_;
  InverterPtr inv_;
  bool last_inverted_ = false;
};

inline ReductionOutcome pc_reduce(const PublicCoinSpec& spec, const BitString& x, InverterPtr inv,
                                  CoinSource& coins) {
  InverterProver prover(spec, x, std::move(inv));
  RunResult run = run_protocol(spec, x, prover, coins);
  if (prover.last_inverted() && !run.accept) {
    throw ContractViolation("pc_reduce: final preimage check passed on a rejecting transcript");
  }
  return {run.accept, run.fallback};
}

inline Probability pc_reduce_exact(const PublicCoinSpec& spec, const BitString& x, InverterPtr inv,
                                   EnumerationBudget budget = {}) {
  return enumerate_probability([&](CoinSource& c) { return pc_reduce(spec, x, inv, c).accept; },
                               budget);
}

}  // namespace wzk
