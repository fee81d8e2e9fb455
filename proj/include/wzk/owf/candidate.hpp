#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wzk/dist/encoding.hpp"
#include "wzk/dist/estimate.hpp"
#include "wzk/dist/rng.hpp"
#include "wzk/errors.hpp"
#include "wzk/protocol/measure.hpp"

namespace wzk {

using Input = std::vector<std::uint64_t>;

// Product of integer ranges; inputs are enumerated lexicographically with the
// first component most significant.
class Domain {
 public:
  struct Component {
    std::string name;
    std::uint64_t range;
  };

  Domain() = default;
  explicit Domain(std::vector<Component> components) : components_(std::move(components)) {
    for (const auto& c : components_) {
      if (c.range == 0) throw DomainError("domain component '" + c.name + "' is empty");
    }
  }

  const std::vector<Component>& components() const noexcept { return components_; }
  std::size_t arity() const noexcept { return components_.size(); }

  std::optional<std::uint64_t> cardinality() const {
    std::uint64_t total = 1;
    for (const auto& c : components_) {
      if (total > UINT64_MAX / c.range) return std::nullopt;
      total *= c.range;
    }
    return total;
  }

  bool contains(const Input& in) const {
    if (in.size() != components_.size()) return false;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i] >= components_[i].range) return false;
    }
    return true;
  }

  Input unrank(std::uint64_t index) const {
    Input out(components_.size());
    for (std::size_t i = components_.size(); i-- > 0;) {
      out[i] = index % components_[i].range;
      index /= components_[i].range;
    }
    return out;
  }

  std::uint64_t rank(const Input& in) const {
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < in.size(); ++i) r = r * components_[i].range + in[i];
    return r;
  }

  Input sample(CoinSource& coins) const {
    Input out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(coins.draw(c.range));
    return out;
  }

  bool same_shape(const Domain& other) const {
    if (other.arity() != arity()) return false;
    for (std::size_t i = 0; i < arity(); ++i) {
      if (components_[i].range != other.components_[i].range) return false;
    }
    return true;
  }

 private:
  std::vector<Component> components_;
};

// Functions of the form (rho, b_1..b_q) -> (prefix(rho), (1/q) sum inner(rho, b_j)),
// exposed so inverters can exploit the block structure.
struct EstimateLayer {
  std::uint64_t rho_range = 1;
  std::uint64_t q = 1;
  std::uint64_t block_range = 1;
  std::uint64_t inner_grid = 1;  // inner values lie on this grid
  std::function<Outcome(std::uint64_t rho)> prefix;
  std::function<Estimate(std::uint64_t rho, std::uint64_t block)> inner;

  std::uint64_t grid() const { return q * inner_grid; }

  Estimate estimate(std::uint64_t rho, const Input& in) const {
    std::uint64_t sum = 0;
    for (std::uint64_t j = 0; j < q; ++j) sum += inner(rho, in[1 + j]).on_grid(inner_grid).numerator();
    return Estimate(sum, grid());
  }

  Outcome output(std::uint64_t rho, const Estimate& est) const {
    Encoder enc;
    est.encode(enc);
    return prefix(rho) + std::move(enc).finish();
  }
};

struct CandidateFunction {
  std::string label;  // nizk | pc | cr-level-i | rv | lifted
  Domain domain;
  std::function<Outcome(const Input&)> eval_fn;
  std::shared_ptr<const EstimateLayer> layer;

  Outcome operator()(const Input& in) const {
    if (!domain.contains(in)) throw DomainError(label + ": input outside the domain");
    return eval_fn(in);
  }
};

// --- constructions -------------------------------------------------------------

inline Outcome nizk_output(const BitString& r, bool a) {
  return std::move(Encoder().bits(r).uint(a ? 1 : 0)).finish();
}

inline CandidateFunction nizk_candidate(const NizkSpec& spec, const BitString& x) {
  if (spec.randomized_verifier()) {
    throw ContractViolation(spec.name + ": randomized verifier needs rv_candidate");
  }
  CandidateFunction f;
  f.label = "nizk";
  f.domain = Domain({{"rho", spec.sim_coins}});
  f.eval_fn = [spec, x](const Input& in) {
    auto [r, pi] = spec.simulator(x, in[0]);
    return nizk_output(r, spec.verifier(x, r, pi, 0));
  };
  return f;
}

// (r_1, pi_1, ..., r_i, flag) where the transcript prefix has 2i - 1 messages.
inline Outcome pc_output(const Transcript& prefix, std::uint64_t flag) {
  Encoder enc;
  prefix.encode(enc);
  enc.uint(flag);
  return std::move(enc).finish();
}

// Input (i - 1, rho). Outputs of different levels differ in field count, so
// the encoding needs no extra padding.
inline CandidateFunction pc_candidate(const PublicCoinSpec& spec, const BitString& x) {
  spec.validate();
  CandidateFunction f;
  f.label = "pc";
  f.domain = Domain({{"i", spec.k}, {"rho", spec.sim_coins}});
  f.eval_fn = [spec, x](const Input& in) {
    const std::size_t i = in[0] + 1;
    Transcript t = spec.simulator(x, in[1]);
    const bool flag = i == spec.k ? spec.verifier(x, t) : true;
    return pc_output(t.prefix(2 * i - 1), flag ? 1 : 0);
  };
  return f;
}

// (r, (1/q) sum_j V(x; r, pi, sigma_j)).
inline CandidateFunction rv_candidate(const NizkSpec& spec, const BitString& x, std::uint64_t q) {
  if (!spec.randomized_verifier()) {
    throw ContractViolation(spec.name + ": deterministic verifier needs nizk_candidate");
  }
  if (q == 0) throw ContractViolation("rv_candidate needs q >= 1");
  auto layer = std::make_shared<EstimateLayer>();
  layer->rho_range = spec.sim_coins;
  layer->q = q;
  layer->block_range = spec.verifier_coins();
  layer->prefix = [spec, x](std::uint64_t rho) {
    return std::move(Encoder().bits(spec.simulator(x, rho).first)).finish();
  };
  layer->inner = [spec, x](std::uint64_t rho, std::uint64_t sigma) {
    auto [r, pi] = spec.simulator(x, rho);
    return Estimate(spec.verifier(x, r, pi, sigma) ? 1 : 0, 1);
  };

  CandidateFunction f;
  f.label = "rv";
  std::vector<Domain::Component> comps{{"rho", spec.sim_coins}};
  for (std::uint64_t j = 0; j < q; ++j) {
    comps.push_back({"sigma" + std::to_string(j + 1), spec.verifier_coins()});
  }
  f.domain = Domain(std::move(comps));
  f.layer = layer;
  f.eval_fn = [spec, x, q](const Input& in) {
    auto [r, pi] = spec.simulator(x, in[0]);
    std::uint64_t hits = 0;
    for (std::uint64_t j = 0; j < q; ++j) hits += spec.verifier(x, r, pi, in[1 + j]);
    Encoder enc;
    enc.bits(r);
    Estimate(hits, q).encode(enc);
    return std::move(enc).finish();
  };
  return f;
}

inline Outcome rv_output(const BitString& r, const Estimate& est) {
  Encoder enc;
  enc.bits(r);
  est.encode(enc);
  return std::move(enc).finish();
}

// f(x, r) = (x, f_x(r)); input (index of x in the family, r...).
struct LiftedFamily {
  std::vector<BitString> instances;
  CandidateFunction function;

  std::size_t index_of(const BitString& x) const {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (instances[i] == x) return i;
    }
    throw DomainError("instance " + x.str() + " is not in the lifted family");
  }
};

inline Outcome lifted_output(const BitString& x, const Outcome& inner) {
  return std::move(Encoder().bits(x)).finish() + inner;
}

inline LiftedFamily lift_candidate(const std::vector<std::pair<BitString, CandidateFunction>>& family) {
  if (family.empty()) throw DomainError("lift_candidate needs at least one member");
  const Domain& shape = family.front().second.domain;
  std::vector<Domain::Component> comps{{"x", family.size()}};
  for (const auto& [x, f] : family) {
    if (!f.domain.same_shape(shape)) throw DomainError("lifted family members differ in domain shape");
  }
  for (const auto& c : shape.components()) comps.push_back(c);

  LiftedFamily out;
  std::vector<CandidateFunction> members;
  for (const auto& [x, f] : family) {
    out.instances.push_back(x);
    members.push_back(f);
  }
  out.function.label = "lifted";
  out.function.domain = Domain(std::move(comps));
  out.function.eval_fn = [xs = out.instances, members](const Input& in) {
    Input rest(in.begin() + 1, in.end());
    return lifted_output(xs[in[0]], members[in[0]](rest));
  };
  return out;
}

}  // namespace wzk
