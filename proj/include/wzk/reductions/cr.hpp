#pragma once

#include <cmath>
#include <optional>

#include "wzk/dist/enumerate.hpp"
#include "wzk/dist/estimate.hpp"
#include "wzk/owf/cr.hpp"
#include "wzk/protocol/measure.hpp"
#include "wzk/reductions/nizk.hpp"

namespace wzk {

// Round i answers with B_{i,2}; bottom falls back to Sim_{2i}(x; 0).
class CrProver final : public ProverStrategy {
 public:
  explicit CrProver(const CrStack& stack) : stack_(stack) {}

  ProverMove respond(const Transcript& prefix, CoinSource& coins) override {
    const std::size_t i = (prefix.size() + 1) / 2;
    BResult b = stack_.B(i, prefix, coins);
    if (b.message) return {std::move(*b.message), false};
    return {stack_.spec().simulator(stack_.x(), 0)[prefix.size()], true};
  }

 private:
  const CrStack& stack_;
};

inline ReductionOutcome cr_reduce(const CrStack& stack, CoinSource& coins) {
  CrProver prover(stack);
  RunResult run = run_protocol(stack.spec(), stack.x(), prover, coins);
  return {run.accept, run.fallback};
}

struct BValue {
  double value = 0;
  std::optional<Probability> exact;
  std::uint64_t trials = 0;
  double radius = 0;  // 3-sigma half-width; 0 when exact
};

// E over r_1 of B_{1,1}(x; r_1).
inline BValue b_value_mc(const CrStack& stack, std::uint64_t trials, SeededRng rng) {
  if (trials == 0) throw ContractViolation("B value needs at least one trial");
  const std::uint64_t g = stack.grid(1);
  std::uint64_t sum = 0;  // in units of 1/g
  for (std::uint64_t t = 0; t < trials; ++t) {
    RngCoins coins(rng.child(t));
    Transcript prefix;
    prefix.push(coins.bits(stack.spec().coin_bits[0]));
    sum += stack.B(1, prefix, coins).value.on_grid(g).numerator();
  }
  BValue out;
  out.trials = trials;
  out.value = static_cast<double>(sum) / (static_cast<double>(g) * static_cast<double>(trials));
  out.radius = three_sigma(trials);
  return out;
}

// Exact only for k = 1, where B_1 is a single inversion.
inline BValue b_value_exact(const CrStack& stack, EnumerationBudget budget = {}) {
  if (stack.k() != 1) throw BudgetError("exact B value is only enumerable for k = 1");
  auto p = enumerate_probability(
      [&](CoinSource& coins) {
        Transcript prefix;
        prefix.push(coins.bits(stack.spec().coin_bits[0]));
        return stack.B_rd(1, prefix, coins.draw(stack.rd_range(1))).value.numerator() == 1;
      },
      budget);
  BValue out;
  out.exact = p;
  out.value = p.to_double();
  return out;
}

}  // namespace wzk
