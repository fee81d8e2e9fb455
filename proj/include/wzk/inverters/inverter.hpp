#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wzk/dist/distribution.hpp"
#include "wzk/dist/enumerate.hpp"
#include "wzk/owf/candidate.hpp"

namespace wzk {

// Range of the seed handed to inverters whose randomness is a generator seed.
inline constexpr std::uint64_t kSeedRange = std::uint64_t{1} << 62;

// Reads an integer rd as mixed-radix digits, least significant first. Exact
// when rd is uniform over a multiple of the product of the drawn ranges.
class RdCoins final : public CoinSource {
 public:
  explicit RdCoins(std::uint64_t rd) : rd_(rd) {}
  std::uint64_t draw(std::uint64_t range) override {
    const std::uint64_t v = rd_ % range;
    rd_ /= range;
    return v;
  }

 private:
  std::uint64_t rd_;
};

class Inverter {
 public:
  explicit Inverter(CandidateFunction target) : target_(std::move(target)) {}
  virtual ~Inverter() = default;

  const CandidateFunction& target() const noexcept { return target_; }
  virtual std::string kind() const = 0;

  // Size of the explicit randomness rd; nullopt if it does not fit 64 bits.
  virtual std::optional<std::uint64_t> rd_range() const = 0;

  // True when every non-bottom answer is an exact uniform preimage, so the
  // distributional deviation equals the failure probability.
  virtual bool exact_on_success() const { return false; }

  virtual std::optional<Input> answer(const Outcome& y, CoinSource& coins) const = 0;

  virtual std::optional<Input> answer_rd(const Outcome& y, std::uint64_t rd) const {
    const auto range = rd_range();
    if (!range) throw ContractViolation(kind() + " inverter has no finite rd range");
    if (rd >= *range) throw DomainError(kind() + " inverter: rd out of range");
    RdCoins coins(rd);
    return answer(y, coins);
  }

  bool inverts(const Outcome& y, const std::optional<Input>& ans) const {
    return ans && target_.domain.contains(*ans) && target_(*ans) == y;
  }

 private:
  CandidateFunction target_;
};

using InverterPtr = std::shared_ptr<const Inverter>;

namespace detail {

inline std::uint64_t enumerable_size(const CandidateFunction& f, EnumerationBudget budget) {
  auto card = f.domain.cardinality();
  if (!card || *card > budget.max_assignments) {
    throw BudgetError(f.label + ": domain too large to tabulate");
  }
  return *card;
}

inline std::optional<std::uint64_t> lcm_checked(std::optional<std::uint64_t> a, std::uint64_t b) {
  if (!a) return std::nullopt;
  const std::uint64_t g = std::gcd(*a, b);
  const std::uint64_t step = b / g;
  if (*a > UINT64_MAX / step) return std::nullopt;
  return *a * step;
}

// Inverse image of each output of an estimate-layer function's prefix.
inline std::unordered_map<Outcome, std::vector<std::uint64_t>> prefix_index(
    const EstimateLayer& layer, EnumerationBudget budget) {
  if (layer.rho_range > budget.max_assignments) {
    throw BudgetError("simulator coin space too large to index");
  }
  std::unordered_map<Outcome, std::vector<std::uint64_t>> index;
  for (std::uint64_t rho = 0; rho < layer.rho_range; ++rho) index[layer.prefix(rho)].push_back(rho);
  return index;
}

// Splits (prefix, estimate) at the trailing estimate field.
inline std::optional<std::pair<Outcome, Estimate>> split_estimate(const Outcome& y) {
  constexpr std::size_t kField = 17;
  if (y.size() < kField || y[y.size() - kField] != 'e') return std::nullopt;
  Decoder dec(std::string_view(y).substr(y.size() - kField));
  const auto field = std::get<EstimateField>(dec.next());
  if (field.denominator == 0 || field.numerator > field.denominator) return std::nullopt;
  return std::make_pair(y.substr(0, y.size() - kField),
                        Estimate(field.numerator, field.denominator));
}

}  // namespace detail

// Lexicographically least preimage.
class CanonicalInverter final : public Inverter {
 public:
  explicit CanonicalInverter(CandidateFunction f, EnumerationBudget budget = {})
      : Inverter(std::move(f)) {
    const auto card = detail::enumerable_size(target(), budget);
    for (std::uint64_t u = 0; u < card; ++u) table_.try_emplace(target()(target().domain.unrank(u)), u);
  }

  std::string kind() const override { return "canonical"; }
  std::optional<std::uint64_t> rd_range() const override { return 1; }

  std::optional<Input> answer(const Outcome& y, CoinSource&) const override {
    auto it = table_.find(y);
    if (it == table_.end()) return std::nullopt;
    return target().domain.unrank(it->second);
  }

 private:
  std::unordered_map<Outcome, std::uint64_t> table_;
};

// Uniform preimage from precomputed preimage sets.
class TableInverter final : public Inverter {
 public:
  explicit TableInverter(CandidateFunction f, EnumerationBudget budget = {})
      : Inverter(std::move(f)) {
    const auto card = detail::enumerable_size(target(), budget);
    for (std::uint64_t u = 0; u < card; ++u) table_[target()(target().domain.unrank(u))].push_back(u);
    rd_range_ = 1;
    for (const auto& [y, pre] : table_) rd_range_ = detail::lcm_checked(rd_range_, pre.size());
  }

  std::string kind() const override { return "distributional"; }
  std::optional<std::uint64_t> rd_range() const override { return rd_range_; }
  bool exact_on_success() const override { return true; }

  std::optional<Input> answer(const Outcome& y, CoinSource& coins) const override {
    auto it = table_.find(y);
    if (it == table_.end()) return std::nullopt;
    return target().domain.unrank(it->second[coins.draw(it->second.size())]);
  }

  std::size_t preimage_count(const Outcome& y) const {
    auto it = table_.find(y);
    return it == table_.end() ? 0 : it->second.size();
  }

 private:
  std::unordered_map<Outcome, std::vector<std::uint64_t>> table_;
  std::optional<std::uint64_t> rd_range_;
};

// Exact uniform preimage for estimate-layer functions with 0/1 inner values,
// without enumerating the q-fold block space: rho is drawn with weight
// s^c (B-s)^(q-c), where s of the B blocks give inner value 1 and c is the
// target count, then a uniform c-subset of positions receives accepting blocks.
class LayerInverter final : public Inverter {
 public:
  explicit LayerInverter(CandidateFunction f, EnumerationBudget budget = {})
      : Inverter(std::move(f)) {
    if (!target().layer) throw DomainError(target().label + ": no estimate layer");
    const auto& layer = *target().layer;
    if (layer.inner_grid != 1) throw DomainError(target().label + ": inner values are not 0/1");
    if (layer.block_range > budget.max_assignments / layer.rho_range) {
      throw BudgetError(target().label + ": block space too large to index");
    }
    index_ = detail::prefix_index(layer, budget);
    accept_.resize(layer.rho_range);
    reject_.resize(layer.rho_range);
    for (std::uint64_t rho = 0; rho < layer.rho_range; ++rho) {
      for (std::uint64_t b = 0; b < layer.block_range; ++b) {
        (layer.inner(rho, b).numerator() ? accept_ : reject_)[rho].push_back(b);
      }
    }
  }

  std::string kind() const override { return "distributional"; }
  std::optional<std::uint64_t> rd_range() const override { return kSeedRange; }
  bool exact_on_success() const override { return true; }

  std::optional<Input> answer_rd(const Outcome& y, std::uint64_t rd) const override {
    RngCoins coins(rd);
    return answer(y, coins);
  }

  std::optional<Input> answer(const Outcome& y, CoinSource& coins) const override {
    const auto& layer = *target().layer;
    auto split = detail::split_estimate(y);
    if (!split || split->second.denominator() != layer.grid()) return std::nullopt;
    auto it = index_.find(split->first);
    if (it == index_.end()) return std::nullopt;
    const std::uint64_t c = split->second.numerator();
    const std::uint64_t q = layer.q;

    std::vector<mpz_class> weights;
    weights.reserve(it->second.size());
    for (auto rho : it->second) {
      mpz_class a, r;
      mpz_ui_pow_ui(a.get_mpz_t(), accept_[rho].size(), c);
      mpz_ui_pow_ui(r.get_mpz_t(), reject_[rho].size(), q - c);
      weights.push_back(a * r);
    }
    auto pick = weighted_index(weights, coins);
    if (!pick) return std::nullopt;
    const std::uint64_t rho = it->second[*pick];

    std::vector<std::uint64_t> order(q);
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    for (std::uint64_t j = 0; j < c; ++j) std::swap(order[j], order[j + coins.draw(q - j)]);
    Input out(1 + q);
    out[0] = rho;
    for (std::uint64_t j = 0; j < q; ++j) {
      const auto& pool = j < c ? accept_[rho] : reject_[rho];
      out[1 + order[j]] = pool[coins.draw(pool.size())];
    }
    return out;
  }

 private:
  std::unordered_map<Outcome, std::vector<std::uint64_t>> index_;
  std::vector<std::vector<std::uint64_t>> accept_, reject_;
};

// Uniform simulator coin among those matching the prefix, then rejection
// sampling of the blocks until the estimate matches; bottom after retry_cap.
class ConditionalInverter final : public Inverter {
 public:
  static constexpr std::uint64_t kDefaultRetryCap = std::uint64_t{1} << 14;

  ConditionalInverter(CandidateFunction f, std::uint64_t retry_cap = kDefaultRetryCap,
                      EnumerationBudget budget = {})
      : Inverter(std::move(f)), retry_cap_(retry_cap) {
    if (!target().layer) throw DomainError(target().label + ": no estimate layer");
    index_ = detail::prefix_index(*target().layer, budget);
  }

  std::string kind() const override { return "conditional"; }
  std::optional<std::uint64_t> rd_range() const override { return kSeedRange; }
  bool exact_on_success() const override { return true; }
  std::uint64_t retry_cap() const noexcept { return retry_cap_; }

  std::optional<Input> answer_rd(const Outcome& y, std::uint64_t rd) const override {
    RngCoins coins(rd);
    return answer(y, coins);
  }

  std::optional<Input> answer(const Outcome& y, CoinSource& coins) const override {
    const auto& layer = *target().layer;
    auto split = detail::split_estimate(y);
    if (!split || split->second.denominator() != layer.grid()) return std::nullopt;
    auto it = index_.find(split->first);
    if (it == index_.end()) return std::nullopt;
    const std::uint64_t goal = split->second.numerator();
    const std::uint64_t g = layer.inner_grid;

    Input out(1 + layer.q);
    for (std::uint64_t attempt = 0; attempt < retry_cap_; ++attempt) {
      out[0] = it->second[coins.draw(it->second.size())];
      std::uint64_t sum = 0;
      bool alive = true;
      for (std::uint64_t j = 0; j < layer.q; ++j) {
        out[1 + j] = coins.draw(layer.block_range);
        if (!alive) continue;  // keep the draw count fixed per attempt
        sum += layer.inner(out[0], out[1 + j]).on_grid(g).numerator();
        const std::uint64_t left = layer.q - j - 1;
        if (sum > goal || sum + left * g < goal) alive = false;
      }
      if (alive && sum == goal) return out;
    }
    return std::nullopt;
  }

 private:
  std::uint64_t retry_cap_;
  std::unordered_map<Outcome, std::vector<std::uint64_t>> index_;
};

// With probability delta returns a uniform domain element instead of asking
// the base inverter.
class NoisyInverter final : public Inverter {
 public:
  NoisyInverter(InverterPtr base, const Probability& delta)
      : Inverter(base->target()), base_(std::move(base)), delta_(delta) {
    const Rational& d = delta.value();
    const mpz_class den = d.get_den();
    if (mpz_popcount(den.get_mpz_t()) != 1) throw GridError("noise " + delta.str() + " is not dyadic");
    noise_bits_ = mpz_sizeinbase(den.get_mpz_t(), 2) - 1;
    if (noise_bits_ > 32) throw GridError("noise grid finer than 2^-32");
    noise_hits_ = d.get_num().get_ui();
    auto card = target().domain.cardinality();
    auto inner = card ? detail::lcm_checked(base_->rd_range(), *card) : std::nullopt;
    const std::uint64_t scale = std::uint64_t{1} << noise_bits_;
    if (inner && *inner <= UINT64_MAX / scale) rd_range_ = *inner * scale;
  }

  std::string kind() const override { return "noisy"; }
  std::optional<std::uint64_t> rd_range() const override { return rd_range_; }
  const Probability& delta() const noexcept { return delta_; }

  std::optional<Input> answer(const Outcome& y, CoinSource& coins) const override {
    if (coins.draw(std::uint64_t{1} << noise_bits_) < noise_hits_) {
      return target().domain.sample(coins);
    }
    return base_->answer(y, coins);
  }

 private:
  InverterPtr base_;
  Probability delta_;
  std::size_t noise_bits_ = 0;
  std::uint64_t noise_hits_ = 0;
  std::optional<std::uint64_t> rd_range_;
};

// Answers bottom on every query.
class NullInverter final : public Inverter {
 public:
  using Inverter::Inverter;
  std::string kind() const override { return "null"; }
  std::optional<std::uint64_t> rd_range() const override { return 1; }
  std::optional<Input> answer(const Outcome&, CoinSource&) const override { return std::nullopt; }
};

// A_x: asks an inverter of the lifted function on (x, y) and keeps the
// answer only if it names x.
class RestrictedInverter final : public Inverter {
 public:
  RestrictedInverter(InverterPtr lifted, const LiftedFamily& family, const BitString& x,
                     CandidateFunction member)
      : Inverter(std::move(member)),
        lifted_(std::move(lifted)),
        x_(x),
        index_(family.index_of(x)) {}

  std::string kind() const override { return "restricted-" + lifted_->kind(); }
  std::optional<std::uint64_t> rd_range() const override { return lifted_->rd_range(); }
  bool exact_on_success() const override { return lifted_->exact_on_success(); }

  std::optional<Input> answer(const Outcome& y, CoinSource& coins) const override {
    return restrict(lifted_->answer(lifted_output(x_, y), coins));
  }
  std::optional<Input> answer_rd(const Outcome& y, std::uint64_t rd) const override {
    return restrict(lifted_->answer_rd(lifted_output(x_, y), rd));
  }

 private:
  std::optional<Input> restrict(std::optional<Input> ans) const {
    if (!ans || ans->empty() || (*ans)[0] != index_) return std::nullopt;
    return Input(ans->begin() + 1, ans->end());
  }

  InverterPtr lifted_;
  BitString x_;
  std::uint64_t index_;
};

inline InverterPtr canonical_inverter(const CandidateFunction& f, EnumerationBudget budget = {}) {
  return std::make_shared<CanonicalInverter>(f, budget);
}

// Exact uniform-preimage inverter: a preimage table when the domain can be
// tabulated, otherwise the block-structured sampler for estimate layers.
inline InverterPtr distributional_inverter(const CandidateFunction& f, EnumerationBudget budget = {}) {
  auto card = f.domain.cardinality();
  if (card && *card <= budget.max_assignments) return std::make_shared<TableInverter>(f, budget);
  if (f.layer) return std::make_shared<LayerInverter>(f, budget);
  throw BudgetError(f.label + ": domain too large for an exact inverter");
}

inline InverterPtr null_inverter(const CandidateFunction& f) {
  return std::make_shared<NullInverter>(f);
}

inline InverterPtr noisy_inverter(InverterPtr base, const Probability& delta) {
  return std::make_shared<NoisyInverter>(std::move(base), delta);
}

inline InverterPtr conditional_inverter(const CandidateFunction& f,
                                        std::uint64_t retry_cap = ConditionalInverter::kDefaultRetryCap,
                                        EnumerationBudget budget = {}) {
  return std::make_shared<ConditionalInverter>(f, retry_cap, budget);
}

// --- quality ------------------------------------------------------------------

struct DeviationReport {
  std::string method;  // exact | monte-carlo
  double success_rate = 0;
  double deviation = 0;
  std::optional<Probability> exact_success;
  std::optional<Probability> exact_deviation;
  std::uint64_t trials = 0;
  double radius = 0;
};

inline Outcome encode_input(const std::optional<Input>& in) {
  Encoder enc;
  if (!in) {
    enc.bottom();
  } else {
    for (auto v : *in) enc.uint(v);
  }
  return std::move(enc).finish();
}

// Delta((U, f(U)); (A(f(U)), f(U))) and Pr[f(A(f(U))) = f(U)], enumerating
// both the domain and the inverter's coins.
inline DeviationReport measure_deviation_exact(const Inverter& inv, EnumerationBudget budget = {}) {
  const auto& f = inv.target();
  const auto card = detail::enumerable_size(f, budget);
  const auto& domain = f.domain;

  DistributionBuilder honest("inversion");
  for (std::uint64_t u = 0; u < card; ++u) {
    Input in = domain.unrank(u);
    honest.add_leaf(encode_input(in) + f(in), card);
  }
  DistributionBuilder inverted("inversion");
  std::map<std::uint64_t, std::uint64_t> hits;
  for_each_coin_path(
      [&](CoinSource& coins) {
        Input in = domain.unrank(coins.draw(card));
        Outcome y = f(in);
        auto ans = inv.answer(y, coins);
        return std::make_pair(encode_input(ans) + y, inv.inverts(y, ans));
      },
      [&](const std::pair<Outcome, bool>& leaf, std::uint64_t den) {
        inverted.add_leaf(leaf.first, den);
        if (leaf.second) ++hits[den];
      },
      budget);
  Rational success = 0;
  for (auto [den, n] : hits) success += make_rational(static_cast<std::int64_t>(n), den);

  DeviationReport out;
  out.method = "exact";
  out.exact_success = Probability(success);
  out.exact_deviation = stat_distance(std::move(honest).build(), std::move(inverted).build());
  out.success_rate = out.exact_success->to_double();
  out.deviation = out.exact_deviation->to_double();
  return out;
}

// Monte Carlo estimate of the failure rate, which equals the deviation for
// inverters that are exact on success. radius is the 3-sigma half-width.
inline DeviationReport measure_deviation_mc(const Inverter& inv, std::uint64_t trials,
                                            SeededRng rng) {
  if (!inv.exact_on_success()) {
    throw ContractViolation(inv.kind() +
                            " inverter: Monte Carlo deviation needs an inverter exact on success");
  }
  if (trials == 0) throw ContractViolation("Monte Carlo deviation needs at least one trial");
  const auto& f = inv.target();
  std::uint64_t ok = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    RngCoins coins(rng.child(t));
    Input in = f.domain.sample(coins);
    Outcome y = f(in);
    ok += inv.inverts(y, inv.answer(y, coins));
  }
  DeviationReport out;
  out.method = "monte-carlo";
  out.trials = trials;
  out.success_rate = static_cast<double>(ok) / static_cast<double>(trials);
  out.deviation = 1.0 - out.success_rate;
  out.radius = three_sigma(trials);
  return out;
}

}  // namespace wzk
