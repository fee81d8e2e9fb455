#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "wzk/dist/distribution.hpp"
#include "wzk/dist/enumerate.hpp"
#include "wzk/protocol/spec.hpp"

namespace wzk {

inline constexpr const char* kTranscriptSchema = "transcript";

// --- public-coin protocols -------------------------------------------------

inline Transcript honest_transcript(const PublicCoinSpec& spec, const BitString& x,
                                    const BitString& w, CoinSource& coins) {
  const std::uint64_t pc = coins.draw(spec.prover_coins);
  Transcript t;
  for (std::size_t i = 0; i < spec.k; ++i) {
    t.push(coins.bits(spec.coin_bits[i]));
    t.push(spec.prover(x, w, t, pc));
  }
  spec.check_schedule(t);
  return t;
}

inline void require_witness(const PublicCoinSpec& spec, const BitString& x, const BitString& w) {
  if (!spec.relation(x, w)) {
    throw RelationError(spec.name + ": witness " + w.str() + " is not valid for " + x.str());
  }
}

inline FiniteDistribution view_distribution(const PublicCoinSpec& spec, const BitString& x,
                                            const BitString& w, EnumerationBudget budget = {}) {
  require_witness(spec, x, w);
  return enumerate_distribution(
      [&](CoinSource& coins) { return honest_transcript(spec, x, w, coins).encode(); },
      kTranscriptSchema, budget);
}

inline FiniteDistribution sim_distribution(const PublicCoinSpec& spec, const BitString& x,
                                           EnumerationBudget budget = {}) {
  return enumerate_distribution(
      [&](CoinSource& coins) {
        auto t = spec.simulator(x, coins.draw(spec.sim_coins));
        spec.check_schedule(t);
        return t.encode();
      },
      kTranscriptSchema, budget);
}

// First j messages of Sim(x; rho). Counts include the empty r_1 of a
// prover-first protocol, so j ranges over 0..2k.
inline Transcript sim_project(const PublicCoinSpec& spec, const BitString& x, std::uint64_t rho,
                              std::size_t j) {
  if (j > 2 * spec.k) {
    throw ScheduleError(spec.name + ": cannot project onto " + std::to_string(j) +
                        " messages of a " + std::to_string(spec.k) + "-round protocol");
  }
  if (rho >= spec.sim_coins) throw DomainError(spec.name + ": simulator coin out of range");
  return spec.simulator(x, rho).prefix(j);
}

inline Probability honest_acceptance(const PublicCoinSpec& spec, const BitString& x,
                                     const BitString& w, EnumerationBudget budget = {}) {
  require_witness(spec, x, w);
  return enumerate_probability(
      [&](CoinSource& coins) { return spec.verifier(x, honest_transcript(spec, x, w, coins)); },
      budget);
}

struct SoundnessMeasurement {
  Probability value;
  bool exhaustive = true;  // false when the analytic witness was used
};

namespace detail {

inline std::uint64_t game_tree_leaves(const std::vector<std::size_t>& widths) {
  std::uint64_t leaves = 1;
  for (auto bits : widths) {
    if (bits >= 63 || leaves > (UINT64_MAX >> bits)) return UINT64_MAX;
    leaves <<= bits;
  }
  return leaves;
}

inline Rational best_response(const PublicCoinSpec& spec, const BitString& x, Transcript& t) {
  const std::size_t round = t.size() / 2;
  const std::uint64_t coin_range = std::uint64_t{1} << spec.coin_bits[round];
  const std::uint64_t msg_range = std::uint64_t{1} << spec.proof_bits[round];
  const bool last = round + 1 == spec.k;
  Rational total = 0;
  for (std::uint64_t r = 0; r < coin_range; ++r) {
    t.push(BitString::from_uint(r, spec.coin_bits[round]));
    Rational best = 0;
    for (std::uint64_t pi = 0; pi < msg_range && best < 1; ++pi) {
      t.push(BitString::from_uint(pi, spec.proof_bits[round]));
      if (last) {
        if (spec.verifier(x, t)) best = 1;
      } else {
        Rational v = best_response(spec, x, t);
        if (v > best) best = v;
      }
      t.pop();
    }
    total += best;
    t.pop();
  }
  return total / coin_range;
}

}  // namespace detail

// Maximum acceptance over all prover strategies: for each verifier coin the
// prover picks the message maximizing the continuation value.
inline SoundnessMeasurement best_prover_acceptance(const PublicCoinSpec& spec, const BitString& x,
                                                   EnumerationBudget budget = {}) {
  std::vector<std::size_t> widths;
  bool small_messages = true;
  for (std::size_t i = 0; i < spec.k; ++i) {
    widths.push_back(spec.coin_bits[i]);
    widths.push_back(spec.proof_bits[i]);
    if (spec.proof_bits[i] > 16) small_messages = false;
  }
  if (!small_messages || detail::game_tree_leaves(widths) > budget.max_assignments) {
    if (spec.analytic_soundness) {
      if (auto v = spec.analytic_soundness(x)) return {*v, false};
    }
    throw BudgetError(spec.name + ": best-prover search exceeds budget and no analytic bound given");
  }
  Transcript t;
  return {Probability(detail::best_response(spec, x, t)), true};
}

inline ErrorProfile measure_error_profile(const PublicCoinSpec& spec, const BitString& x_yes,
                                          const BitString& w, const BitString& x_no,
                                          EnumerationBudget budget = {}) {
  if (!spec.membership(x_yes)) throw DomainError(spec.name + ": yes-instance not in the language");
  if (spec.membership(x_no)) throw DomainError(spec.name + ": no-instance is in the language");
  ErrorProfile out;
  out.eps_c = honest_acceptance(spec, x_yes, w, budget).complement();
  out.eps_z = stat_distance(sim_distribution(spec, x_yes, budget),
                            view_distribution(spec, x_yes, w, budget));
  out.eps_s = best_prover_acceptance(spec, x_no, budget).value;
  return out;
}

// --- running the protocol ----------------------------------------------------

struct ProverMove {
  BitString message;
  bool fallback = false;  // strategy could not follow its rule and used a default
};

class ProverStrategy {
 public:
  virtual ~ProverStrategy() = default;
  // Called once per run, before the first message.
  virtual void begin(CoinSource&) {}
  // prefix ends with r_i.
  virtual ProverMove respond(const Transcript& prefix, CoinSource& coins) = 0;
};

class HonestProver final : public ProverStrategy {
 public:
  HonestProver(const PublicCoinSpec& spec, BitString x, BitString w)
      : spec_(spec), x_(std::move(x)), w_(std::move(w)) {}

  void begin(CoinSource& coins) override { coin_ = coins.draw(spec_.prover_coins); }
  ProverMove respond(const Transcript& prefix, CoinSource&) override {
    return {spec_.prover(x_, w_, prefix, coin_), false};
  }

 private:
  const PublicCoinSpec& spec_;
  BitString x_, w_;
  std::uint64_t coin_ = 0;
};

struct RunResult {
  Transcript transcript;
  bool accept = false;
  bool fallback = false;
};

inline RunResult run_protocol(const PublicCoinSpec& spec, const BitString& x,
                              ProverStrategy& strategy, CoinSource& coins) {
  RunResult out;
  strategy.begin(coins);
  for (std::size_t i = 0; i < spec.k; ++i) {
    out.transcript.push(coins.bits(spec.coin_bits[i]));
    ProverMove move = strategy.respond(out.transcript, coins);
    if (move.message.size() != spec.proof_bits[i]) {
      throw ScheduleError(spec.name + ": prover message " + std::to_string(i + 1) + " has " +
                          std::to_string(move.message.size()) + " bits, expected " +
                          std::to_string(spec.proof_bits[i]));
    }
    out.fallback = out.fallback || move.fallback;
    out.transcript.push(std::move(move.message));
  }
  out.accept = spec.verifier(x, out.transcript);
  return out;
}

// --- NIZK --------------------------------------------------------------------

inline void require_witness(const NizkSpec& spec, const BitString& x, const BitString& w) {
  if (!spec.relation(x, w)) {
    throw RelationError(spec.name + ": witness " + w.str() + " is not valid for " + x.str());
  }
}

inline Outcome encode_pair(const BitString& r, const BitString& pi) {
  return std::move(Encoder().bits(r).bits(pi)).finish();
}

inline FiniteDistribution view_distribution(const NizkSpec& spec, const BitString& x,
                                            const BitString& w, EnumerationBudget budget = {}) {
  require_witness(spec, x, w);
  return enumerate_distribution(
      [&](CoinSource& coins) {
        auto r = coins.bits(spec.crs_bits);
        return encode_pair(r, spec.prover(x, w, r));
      },
      kTranscriptSchema, budget);
}

inline FiniteDistribution sim_distribution(const NizkSpec& spec, const BitString& x,
                                           EnumerationBudget budget = {}) {
  return enumerate_distribution(
      [&](CoinSource& coins) {
        auto [r, pi] = spec.simulator(x, coins.draw(spec.sim_coins));
        return encode_pair(r, pi);
      },
      kTranscriptSchema, budget);
}

// Pr_sigma[V(x; r, pi, sigma) = 1].
inline Rational verifier_acceptance(const NizkSpec& spec, const BitString& x, const BitString& r,
                                    const BitString& pi) {
  if (!spec.randomized_verifier()) return spec.verifier(x, r, pi, 0) ? 1 : 0;
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < spec.verifier_coins(); ++s) hits += spec.verifier(x, r, pi, s);
  return make_rational(static_cast<std::int64_t>(hits), spec.verifier_coins());
}

inline Probability honest_acceptance(const NizkSpec& spec, const BitString& x, const BitString& w,
                                     EnumerationBudget budget = {}) {
  require_witness(spec, x, w);
  const std::uint64_t crs = std::uint64_t{1} << spec.crs_bits;
  if (crs > budget.max_assignments) throw BudgetError(spec.name + ": CRS space exceeds budget");
  Rational total = 0;
  for (std::uint64_t r = 0; r < crs; ++r) {
    auto rb = BitString::from_uint(r, spec.crs_bits);
    total += verifier_acceptance(spec, x, rb, spec.prover(x, w, rb));
  }
  return Probability(total / crs);
}

inline SoundnessMeasurement best_prover_acceptance(const NizkSpec& spec, const BitString& x,
                                                   EnumerationBudget budget = {}) {
  if (spec.proof_bits > 16) throw BudgetError(spec.name + ": proof space too large to search");
  const std::size_t bits = spec.crs_bits + spec.proof_bits + spec.verifier_coin_bits;
  if (detail::game_tree_leaves({bits}) > budget.max_assignments) {
    throw BudgetError(spec.name + ": best-prover search exceeds budget");
  }
  const std::uint64_t crs = std::uint64_t{1} << spec.crs_bits;
  const std::uint64_t proofs = std::uint64_t{1} << spec.proof_bits;
  Rational total = 0;
  for (std::uint64_t r = 0; r < crs; ++r) {
    auto rb = BitString::from_uint(r, spec.crs_bits);
    Rational best = 0;
    for (std::uint64_t pi = 0; pi < proofs && best < 1; ++pi) {
      Rational v = verifier_acceptance(spec, x, rb, BitString::from_uint(pi, spec.proof_bits));
      if (v > best) best = v;
    }
    total += best;
  }
  return {Probability(total / crs), true};
}

inline ErrorProfile measure_error_profile(const NizkSpec& spec, const BitString& x_yes,
                                          const BitString& w, const BitString& x_no,
                                          EnumerationBudget budget = {}) {
  if (!spec.membership(x_yes)) throw DomainError(spec.name + ": yes-instance not in the language");
  if (spec.membership(x_no)) throw DomainError(spec.name + ": no-instance is in the language");
  ErrorProfile out;
  out.eps_c = honest_acceptance(spec, x_yes, w, budget).complement();
  out.eps_z = stat_distance(sim_distribution(spec, x_yes, budget),
                            view_distribution(spec, x_yes, w, budget));
  out.eps_s = best_prover_acceptance(spec, x_no, budget).value;
  return out;
}

}  // namespace wzk
