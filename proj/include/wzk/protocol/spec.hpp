#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wzk/dist/bitstring.hpp"
#include "wzk/dist/encoding.hpp"
#include "wzk/dist/rational.hpp"
#include "wzk/errors.hpp"

namespace wzk {

// Alternating (r_1, pi_1, ..., r_k, pi_k). A prover-first protocol keeps an
// empty r_1, so message j always means the same slot in every protocol.
class Transcript {
 public:
  Transcript() = default;
  explicit Transcript(std::vector<BitString> messages) : messages_(std::move(messages)) {}

  std::size_t size() const noexcept { return messages_.size(); }
  bool empty() const noexcept { return messages_.empty(); }
  const BitString& operator[](std::size_t j) const { return messages_.at(j); }
  const std::vector<BitString>& messages() const noexcept { return messages_; }

  void push(BitString m) { messages_.push_back(std::move(m)); }
  void pop() { messages_.pop_back(); }

  Transcript prefix(std::size_t j) const {
    if (j > messages_.size()) {
      throw ScheduleError("prefix of " + std::to_string(j) + " messages from a transcript of " +
                          std::to_string(messages_.size()));
    }
    return Transcript(std::vector<BitString>(messages_.begin(), messages_.begin() + j));
  }

  Transcript with(BitString m) const {
    Transcript t = *this;
    t.push(std::move(m));
    return t;
  }

  // Verifier coins r_1 ... r_i concatenated, for the rounds present.
  BitString coins() const {
    BitString out;
    for (std::size_t j = 0; j < messages_.size(); j += 2) out = out.concat(messages_[j]);
    return out;
  }

  Encoder& encode(Encoder& enc) const { return enc.all(messages_); }
  Outcome encode() const {
    Encoder enc;
    encode(enc);
    return std::move(enc).finish();
  }

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<BitString> messages_;
};

struct ErrorProfile {
  Probability eps_c;
  Probability eps_s;
  Probability eps_z;

  std::string str() const {
    return "(" + eps_c.str() + ", " + eps_s.str() + ", " + eps_z.str() + ")";
  }
  friend bool operator==(const ErrorProfile&, const ErrorProfile&) = default;
};

using Membership = std::function<bool(const BitString& x)>;
using Relation = std::function<bool(const BitString& x, const BitString& w)>;

struct PublicCoinSpec {
  std::string name;
  std::size_t n = 0;                    // instance bits
  std::size_t k = 1;                    // rounds
  std::vector<std::size_t> coin_bits;   // m_1..m_k; m_1 = 0 for prover-first
  std::vector<std::size_t> proof_bits;  // |pi_1|..|pi_k|
  std::uint64_t sim_coins = 1;          // rho ranges over [0, sim_coins)
  std::uint64_t prover_coins = 1;       // one draw shared by all rounds
  Membership membership;
  Relation relation;
  // pi_i from the prefix (r_1, ..., r_i); the coin is the same in every round.
  std::function<BitString(const BitString& x, const BitString& w, const Transcript& prefix,
                          std::uint64_t coin)>
      prover;
  std::function<bool(const BitString& x, const Transcript& full)> verifier;
  std::function<Transcript(const BitString& x, std::uint64_t rho)> simulator;
  // Used by the best-prover search when the message space is too large.
  std::function<std::optional<Probability>(const BitString& x)> analytic_soundness;

  bool prover_first() const { return !coin_bits.empty() && coin_bits.front() == 0; }
  std::size_t messages() const { return prover_first() ? 2 * k - 1 : 2 * k; }

  void validate() const {
    if (k == 0) throw ScheduleError(name + ": protocol needs at least one round");
    if (coin_bits.size() != k || proof_bits.size() != k) {
      throw ScheduleError(name + ": schedule lists do not have k entries");
    }
    if (sim_coins == 0 || prover_coins == 0) throw ScheduleError(name + ": empty coin space");
    if (!membership || !relation || !prover || !verifier || !simulator) {
      throw ScheduleError(name + ": incomplete protocol");
    }
  }

  std::size_t expected_length(std::size_t j) const {
    return j % 2 == 0 ? coin_bits.at(j / 2) : proof_bits.at(j / 2);
  }

  void check_schedule(const Transcript& t) const {
    if (t.size() > 2 * k) throw ScheduleError(name + ": transcript longer than 2k messages");
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j].size() != expected_length(j)) {
        throw ScheduleError(name + ": message " + std::to_string(j + 1) + " has " +
                            std::to_string(t[j].size()) + " bits, expected " +
                            std::to_string(expected_length(j)));
      }
    }
  }
};

struct NizkSpec {
  std::string name;
  std::size_t n = 0;
  std::size_t crs_bits = 0;
  std::size_t proof_bits = 0;
  std::size_t verifier_coin_bits = 0;  // 0 for a deterministic verifier
  std::uint64_t sim_coins = 1;
  Membership membership;
  Relation relation;
  std::function<BitString(const BitString& x, const BitString& w, const BitString& r)> prover;
  std::function<bool(const BitString& x, const BitString& r, const BitString& pi,
                     std::uint64_t sigma)>
      verifier;
  std::function<std::pair<BitString, BitString>(const BitString& x, std::uint64_t rho)> simulator;

  bool randomized_verifier() const { return verifier_coin_bits > 0; }
  std::uint64_t verifier_coins() const { return std::uint64_t{1} << verifier_coin_bits; }

  void validate() const {
    if (sim_coins == 0) throw ScheduleError(name + ": empty simulator coin space");
    if (crs_bits > 62 || verifier_coin_bits > 62) throw ScheduleError(name + ": coin length too large");
    if (!membership || !relation || !prover || !verifier || !simulator) {
      throw ScheduleError(name + ": incomplete protocol");
    }
  }
};

// One-round view of a deterministic-verifier NIZK: r_1 is the CRS.
inline PublicCoinSpec as_public_coin(const NizkSpec& nizk) {
  if (nizk.randomized_verifier()) {
    throw ContractViolation(nizk.name + ": randomized verifier has no public-coin form");
  }
  nizk.validate();
  PublicCoinSpec pc;
  pc.name = nizk.name;
  pc.n = nizk.n;
  pc.k = 1;
  pc.coin_bits = {nizk.crs_bits};
  pc.proof_bits = {nizk.proof_bits};
  pc.sim_coins = nizk.sim_coins;
  pc.membership = nizk.membership;
  pc.relation = nizk.relation;
  pc.prover = [p = nizk.prover](const BitString& x, const BitString& w, const Transcript& prefix,
                                std::uint64_t) { return p(x, w, prefix[0]); };
  pc.verifier = [v = nizk.verifier](const BitString& x, const Transcript& t) {
    return v(x, t[0], t[1], 0);
  };
  pc.simulator = [s = nizk.simulator](const BitString& x, std::uint64_t rho) {
    auto [r, pi] = s(x, rho);
    return Transcript({std::move(r), std::move(pi)});
  };
  return pc;
}

}  // namespace wzk
