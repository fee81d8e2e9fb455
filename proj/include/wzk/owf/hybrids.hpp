#pragma once

#include <string>

#include "wzk/dist/enumerate.hpp"
#include "wzk/reductions/pc.hpp"

namespace wzk {

// S, P, I: simulator / honest / inverter-prover runs ending in a flag.
// S_i, P_i, M_i: first messages from the simulator, the honest prover, or
// the simulator through r_i; later prover messages from the inverter prover.
// P_full is the honest run with the verifier's bit (same as P).
enum class HybridKind { S, P, I, S_i, P_i, M_i, P_full };

inline std::string to_string(HybridKind k) {
  switch (k) {
    case HybridKind::S: return "S";
    case HybridKind::P: return "P";
    case HybridKind::I: return "I";
    case HybridKind::S_i: return "S_i";
    case HybridKind::P_i: return "P_i";
    case HybridKind::M_i: return "M_i";
    case HybridKind::P_full: return "P_full";
  }
  return "?";
}

inline HybridKind parse_hybrid_kind(const std::string& s) {
  for (auto k : {HybridKind::S, HybridKind::P, HybridKind::I, HybridKind::S_i, HybridKind::P_i,
                 HybridKind::M_i, HybridKind::P_full}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown hybrid kind '" + s + "'");
}

inline constexpr const char* kHybridSchema = "hybrid";

namespace detail {

// Output (r_1, pi_1, ..., r_k, flag).
inline Outcome hybrid_output(const Transcript& t, std::size_t k, bool flag) {
  return pc_output(t.prefix(2 * k - 1), flag ? 1 : 0);
}

inline Outcome sample_hybrid(const PublicCoinSpec& spec, const BitString& x, const BitString& w,
                             const InverterPtr& inv, std::size_t i, HybridKind kind,
                             CoinSource& coins) {
  const std::size_t k = spec.k;
  switch (kind) {
    case HybridKind::S: {
      Transcript t = spec.simulator(x, coins.draw(spec.sim_coins));
      return hybrid_output(t, k, spec.verifier(x, t));
    }
    case HybridKind::P:
    case HybridKind::P_full: {
      Transcript t = honest_transcript(spec, x, w, coins);
      return hybrid_output(t, k, spec.verifier(x, t));
    }
    default:
      break;
  }

  Transcript t;
  std::size_t start = 1;  // first round whose prover message comes from the inverter prover
  if (kind == HybridKind::S_i) {
    t = spec.simulator(x, coins.draw(spec.sim_coins)).prefix(2 * (i - 1));
    start = i;
  } else if (kind == HybridKind::P_i) {
    const std::uint64_t pc = coins.draw(spec.prover_coins);
    for (std::size_t j = 1; j < i; ++j) {
      t.push(coins.bits(spec.coin_bits[j - 1]));
      t.push(spec.prover(x, w, t, pc));
    }
    start = i;
  } else if (kind == HybridKind::M_i) {
    t = spec.simulator(x, coins.draw(spec.sim_coins)).prefix(2 * i - 1);
    start = i;
  }
  std::optional<InverterProver> prover;
  if (k > 1) {
    if (!inv) throw ContractViolation("hybrid " + to_string(kind) + " needs an inverter");
    prover.emplace(spec, x, inv);
  }
  for (std::size_t j = start; j < k; ++j) {
    if (t.size() < 2 * j - 1) t.push(coins.bits(spec.coin_bits[j - 1]));
    t.push(prover->respond(t, coins).message);
  }
  if (t.size() < 2 * k - 1) t.push(coins.bits(spec.coin_bits[k - 1]));
  return hybrid_output(t, k, true);
}

}  // namespace detail

// Exact distribution of a hybrid; i is ignored by S, P, I and P_full.
inline FiniteDistribution hybrid_distribution(const PublicCoinSpec& spec, const BitString& x,
                                              const BitString& w, const InverterPtr& inv,
                                              std::size_t i, HybridKind kind,
                                              EnumerationBudget budget = {}) {
  if (kind == HybridKind::S_i || kind == HybridKind::P_i || kind == HybridKind::M_i) {
    if (i < 1 || i > spec.k) throw DomainError("hybrid level " + std::to_string(i) + " out of range");
  }
  if (kind != HybridKind::S && kind != HybridKind::I) require_witness(spec, x, w);
  return enumerate_distribution(
      [&](CoinSource& coins) { return detail::sample_hybrid(spec, x, w, inv, i, kind, coins); },
      kHybridSchema, budget);
}

inline FiniteDistribution hybrid_distribution(const NizkSpec& spec, const BitString& x,
                                              const BitString& w, HybridKind kind,
                                              EnumerationBudget budget = {}) {
  return hybrid_distribution(as_public_coin(spec), x, w, nullptr, 1, kind, budget);
}

}  // namespace wzk
