#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wzk/dist/estimate.hpp"
#include "wzk/inverters/inverter.hpp"
#include "wzk/owf/candidate.hpp"

namespace wzk {

// Largest estimate grid q^(k-i) the decreasing search will walk.
inline constexpr std::uint64_t kGridCap = std::uint64_t{1} << 20;

// Randomness of B_i for i < k, and of B_k when A_k's own rd space is larger.
inline constexpr std::uint64_t kBSeedRange = std::uint64_t{1} << 32;

struct ReductionParams {
  std::uint64_t p = 8;
  std::uint64_t q = 16;
  Probability tau = Probability::ratio(1, 8);

  // q = n p^2, tau = 1/p.
  static ReductionParams standard_preset(std::uint64_t n, std::uint64_t p) {
    if (p == 0) throw ConfigError("p must be positive");
    ReductionParams out;
    out.p = p;
    out.q = n * p * p;
    out.tau = Probability::ratio(1, p);
    return out;
  }

  // Grid used by B_i: q^(k-i).
  std::uint64_t grid(std::size_t k, std::size_t i) const {
    return checked_pow(q, static_cast<unsigned>(k - i));
  }

  void validate(std::size_t k) const {
    if (p == 0) throw ConfigError("p must be positive");
    if (q == 0) throw ConfigError("q must be positive");
    if (tau.value() <= 0) throw ConfigError("tau must be positive");
    if (k > 1) {
      const std::uint64_t g = grid(k, 1);
      if (g > kGridCap) {
        throw GridError("estimate grid q^(k-1) = " + std::to_string(g) + " exceeds the cap 2^20");
      }
    }
  }
};

struct SearchRecord {
  std::uint64_t a = 0;
  bool inverted = false;
  std::optional<Estimate> est_hat;
  bool accepted = false;
};

struct BResult {
  Estimate value = Estimate::zero();
  std::optional<BitString> message;  // nullopt is bottom
  std::vector<SearchRecord> trace;
};

// f_{i,x} output: (r_1, pi_1, ..., r_i, est).
inline Outcome cr_output(const Transcript& prefix, const Estimate& est) {
  Encoder enc;
  prefix.encode(enc);
  est.encode(enc);
  return std::move(enc).finish();
}

// Builds A_i for f_{i,x}; called from level k down to level 1.
using InverterFactory = std::function<InverterPtr(std::size_t level, const CandidateFunction& f)>;

// The recursive family f_{k,x}, ..., f_{1,x} together with the oracles
// A_k, ..., A_1 and the algorithms B_i and Est_i built from them. Level i
// blocks pack (sigma, rd) as sigma * R_{i+1} + rd, where R_{i+1} is the range
// of B_{i+1}'s randomness. Copies share state; functions handed out refer to
// it and must not outlive every copy of the stack.
class CrStack {
 public:
  // Inner values of f_{i,x} are tabulated when rho_range * block_range stays
  // below this.
  static constexpr std::uint64_t kMemoCap = std::uint64_t{1} << 22;

  CrStack(PublicCoinSpec spec, BitString x, ReductionParams params, const InverterFactory& factory,
          EnumerationBudget budget = {})
      : core_(std::make_shared<Core>()) {
    spec.validate();
    params.validate(spec.k);
    core_->spec = std::move(spec);
    core_->x = std::move(x);
    core_->params = params;
    core_->levels.resize(core_->spec.k + 1);
    for (std::size_t i = core_->spec.k; i >= 1; --i) {
      build_level(i, budget);
      auto& lv = core_->levels[i];
      lv.inverter = factory(i, lv.function);
      if (!lv.inverter) throw ContractViolation("inverter factory returned nothing for level " + std::to_string(i));
      lv.rd_range = b_rd_range(i);
    }
  }

  const PublicCoinSpec& spec() const noexcept { return core_->spec; }
  const BitString& x() const noexcept { return core_->x; }
  const ReductionParams& params() const noexcept { return core_->params; }
  std::size_t k() const noexcept { return core_->spec.k; }

  const CandidateFunction& function(std::size_t i) const { return level(i).function; }
  const InverterPtr& inverter(std::size_t i) const { return level(i).inverter; }
  std::uint64_t rd_range(std::size_t i) const { return level(i).rd_range; }
  std::uint64_t grid(std::size_t i) const { return core_->params.grid(k(), i); }

  // B_i(x; r_1, pi_1, ..., r_i) with its randomness drawn from coins.
  BResult B(std::size_t i, const Transcript& prefix, CoinSource& coins, bool keep_trace = false) const {
    return core_->B(i, prefix, coins, keep_trace);
  }

  // B_i with explicit randomness rd in [0, rd_range(i)).
  BResult B_rd(std::size_t i, const Transcript& prefix, std::uint64_t rd) const {
    return core_->B_rd(i, prefix, rd);
  }

  // One iteration of B_i's loop without the final closeness check: the
  // re-estimate for target est, or nullopt if the inversion check fails.
  std::optional<Estimate> B_hat(std::size_t i, const Transcript& prefix, const Estimate& est,
                                CoinSource& coins) const {
    return core_->iterate(i, prefix, est.on_grid(grid(i)).numerator(), coins).record.est_hat;
  }

  // Est_i on a prefix with 2i messages: q fresh draws of B_{i+1,1}.
  Estimate Est(std::size_t i, const Transcript& prefix, CoinSource& coins) const {
    if (i < 1 || i >= k()) throw DomainError("Est_i needs 1 <= i < k");
    if (prefix.size() != 2 * i) throw ScheduleError("Est_i expects a prefix of 2i messages");
    const auto& next = level(i + 1);
    const std::size_t m = core_->spec.coin_bits[i];
    std::uint64_t sum = 0;
    for (std::uint64_t j = 0; j < core_->params.q; ++j) {
      Transcript t = prefix.with(coins.bits(m));
      sum += core_->B_rd(i + 1, t, coins.draw(next.rd_range)).value.on_grid(grid(i + 1)).numerator();
    }
    return Estimate(sum, grid(i));
  }

 private:
  struct Level {
    CandidateFunction function;
    InverterPtr inverter;
    std::uint64_t rd_range = 1;
    std::uint64_t block_range = 1;
    std::vector<std::uint32_t> memo;  // inner numerators, rho-major; empty if not tabulated
  };

  struct Core {
    PublicCoinSpec spec;
    BitString x;
    ReductionParams params;
    std::vector<Level> levels;

    std::uint64_t grid(std::size_t i) const { return params.grid(spec.k, i); }

    // B_{i+1,1} on Sim(x; rho) through 2i messages extended by the block's sigma.
    Estimate inner(std::size_t i, std::uint64_t rho, std::uint64_t block) const {
      const Level& lv = levels[i];
      if (!lv.memo.empty()) return Estimate(lv.memo[rho * lv.block_range + block], grid(i + 1));
      return inner_direct(i, rho, block);
    }

    Estimate inner_direct(std::size_t i, std::uint64_t rho, std::uint64_t block) const {
      const std::uint64_t r_next = levels[i + 1].rd_range;
      const std::size_t m = spec.coin_bits[i];
      Transcript t = spec.simulator(x, rho).prefix(2 * i);
      t.push(BitString::from_uint(block / r_next, m));
      return B_rd(i + 1, t, block % r_next).value;
    }

    BResult B_rd(std::size_t i, const Transcript& prefix, std::uint64_t rd) const {
      const Level& lv = levels[i];
      if (rd >= lv.rd_range) throw DomainError("B_" + std::to_string(i) + ": rd out of range");
      if (i == spec.k) {
        const auto inv_range = lv.inverter->rd_range();
        if (inv_range && *inv_range <= kBSeedRange) return B_top(prefix, lv.inverter->answer_rd(pc_output(prefix, 1), rd), false);
      }
      RngCoins coins(SeededRng{rd});
      return B(i, prefix, coins, false);
    }

    BResult B(std::size_t i, const Transcript& prefix, CoinSource& coins, bool keep_trace) const {
      if (prefix.size() != 2 * i - 1) {
        throw ScheduleError("B_" + std::to_string(i) + " expects a prefix of 2i-1 messages");
      }
      const Level& lv = levels[i];
      if (i == spec.k) {
        const auto inv_range = lv.inverter->rd_range();
        if (inv_range && *inv_range <= kBSeedRange) {
          return B_top(prefix, lv.inverter->answer_rd(pc_output(prefix, 1), coins.draw(*inv_range)), keep_trace);
        }
        const std::uint64_t seed = coins.draw(kBSeedRange);
        RngCoins inner_coins(SeededRng{seed});
        return B_top(prefix, lv.inverter->answer(pc_output(prefix, 1), inner_coins), keep_trace);
      }
      BResult out;
      const std::uint64_t g = grid(i);
      for (std::uint64_t a = g; a >= 1; --a) {
        Step step = iterate(i, prefix, a, coins);
        if (keep_trace) out.trace.push_back(step.record);
        if (step.record.accepted) {
          out.value = Estimate(a, g);
          out.message = std::move(step.message);
          return out;
        }
      }
      return out;
    }

    BResult B_top(const Transcript& prefix, const std::optional<Input>& ans, bool keep_trace) const {
      const Level& lv = levels[spec.k];
      const Outcome y = pc_output(prefix, 1);
      BResult out;
      const bool ok = lv.inverter->inverts(y, ans);
      if (keep_trace) out.trace.push_back({1, ok, std::nullopt, ok});
      if (!ok) return out;
      Transcript full = spec.simulator(x, (*ans)[0]);
      BitString pi = full[2 * spec.k - 1];
      if (!spec.verifier(x, prefix.with(pi))) {
        throw ContractViolation("B_k: preimage check passed on a rejecting transcript");
      }
      out.value = Estimate(1, 1);
      out.message = std::move(pi);
      return out;
    }

    struct Step {
      SearchRecord record;
      std::optional<BitString> message;
    };

    // One pass of B_i's loop body for target a / q^(k-i).
    Step iterate(std::size_t i, const Transcript& prefix, std::uint64_t a, CoinSource& coins) const {
      if (i < 1 || i >= spec.k) throw DomainError("B_i loop needs 1 <= i < k");
      const Level& lv = levels[i];
      const std::uint64_t g = grid(i);
      Step step;
      SearchRecord& rec = step.record;
      rec.a = a;
      const Outcome y = cr_output(prefix, Estimate(a, g));
      auto ans = lv.inverter->answer(y, coins);
      rec.inverted = lv.inverter->inverts(y, ans);
      if (!rec.inverted) return step;
      const std::uint64_t rho = (*ans)[0];
      const std::uint64_t gi = grid(i + 1);
      std::uint64_t sum = 0;
      for (std::uint64_t j = 0; j < params.q; ++j) {
        sum += inner(i, rho, coins.draw(lv.block_range)).on_grid(gi).numerator();
      }
      rec.est_hat = Estimate(sum, g);
      const std::uint64_t diff = sum > a ? sum - a : a - sum;
      rec.accepted = make_rational(static_cast<std::int64_t>(diff), g) < params.tau.value();
      if (rec.accepted) step.message = spec.simulator(x, rho)[2 * i - 1];
      return step;
    }
  };

  const Level& level(std::size_t i) const {
    if (i < 1 || i > k()) throw DomainError("level " + std::to_string(i) + " out of range");
    return core_->levels[i];
  }

  std::uint64_t b_rd_range(std::size_t i) const {
    if (i < k()) return kBSeedRange;
    const auto r = core_->levels[i].inverter->rd_range();
    return r && *r <= kBSeedRange ? *r : kBSeedRange;
  }

  void build_level(std::size_t i, EnumerationBudget budget) {
    Core* core = core_.get();
    Level& lv = core->levels[i];
    const auto& spec = core->spec;
    if (i == spec.k) {
      lv.function.label = "cr-level-" + std::to_string(i);
      lv.function.domain = Domain({{"rho", spec.sim_coins}});
      lv.function.eval_fn = [core](const Input& in) {
        Transcript t = core->spec.simulator(core->x, in[0]);
        const bool a = core->spec.verifier(core->x, t);
        return pc_output(t.prefix(2 * core->spec.k - 1), a ? 1 : 0);
      };
      return;
    }
    const std::size_t m = spec.coin_bits[i];
    if (m > 62) throw BudgetError("level " + std::to_string(i) + ": coin block wider than 62 bits");
    const std::uint64_t sigmas = std::uint64_t{1} << m;
    const std::uint64_t r_next = core->levels[i + 1].rd_range;
    if (r_next > UINT64_MAX / sigmas) throw BudgetError("level " + std::to_string(i) + ": block range overflows");
    lv.block_range = sigmas * r_next;
    const std::uint64_t q = core->params.q;

    auto layer = std::make_shared<EstimateLayer>();
    layer->rho_range = spec.sim_coins;
    layer->q = q;
    layer->block_range = lv.block_range;
    layer->inner_grid = core->grid(i + 1);
    layer->prefix = [core, i](std::uint64_t rho) {
      Encoder enc;
      core->spec.simulator(core->x, rho).prefix(2 * i - 1).encode(enc);
      return std::move(enc).finish();
    };
    layer->inner = [core, i](std::uint64_t rho, std::uint64_t block) { return core->inner(i, rho, block); };

    if (spec.sim_coins <= kMemoCap / lv.block_range && spec.sim_coins * lv.block_range <= budget.max_assignments) {
      std::vector<std::uint32_t> memo(spec.sim_coins * lv.block_range);
      const std::uint64_t gi = core->grid(i + 1);
      for (std::uint64_t rho = 0; rho < spec.sim_coins; ++rho) {
        for (std::uint64_t b = 0; b < lv.block_range; ++b) {
          memo[rho * lv.block_range + b] =
              static_cast<std::uint32_t>(core->inner_direct(i, rho, b).on_grid(gi).numerator());
        }
      }
      lv.memo = std::move(memo);
    }

    std::vector<Domain::Component> comps{{"rho", spec.sim_coins}};
    for (std::uint64_t j = 0; j < q; ++j) comps.push_back({"block" + std::to_string(j + 1), lv.block_range});
    lv.function.label = "cr-level-" + std::to_string(i);
    lv.function.domain = Domain(std::move(comps));
    lv.function.layer = layer;
    lv.function.eval_fn = [layer](const Input& in) { return layer->output(in[0], layer->estimate(in[0], in)); };
  }

  std::shared_ptr<Core> core_;
};

}  // namespace wzk
