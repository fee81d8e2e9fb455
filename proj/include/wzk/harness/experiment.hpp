#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "wzk/harness/config.hpp"
#include "wzk/inverters/inverter.hpp"
#include "wzk/owf/cr.hpp"
#include "wzk/reductions/cr.hpp"
#include "wzk/reductions/decider.hpp"
#include "wzk/reductions/nizk.hpp"
#include "wzk/reductions/pc.hpp"
#include "wzk/reductions/rv.hpp"
#include "wzk/zoo/dial.hpp"
#include "wzk/zoo/graph_iso.hpp"

namespace wzk {

inline constexpr int kResultSchemaVersion = 1;

inline const std::set<std::string>& config_schema() {
  static const std::set<std::string> keys = {
      "protocol.kind",     "protocol.eps_c",      "protocol.eps_s",   "protocol.eps_z",
      "protocol.m",        "protocol.ell_z",      "protocol.tag_seed", "protocol.tag_bits",
      "protocol.k",        "protocol.m_list",     "protocol.noise",   "protocol.noise_bits",
      "protocol.yes",      "protocol.no",         "graphs.yes",       "graphs.no",
      "construction",      "decider.reduction",   "inverter.kind",    "inverter.delta",
      "inverter.retry_cap", "inverter.level.*",   "params.p",         "params.q",
      "params.tau",        "params.preset_n",     "run.trials",       "run.seed",
      "run.mode",          "run.threads",         "run.budget_log2",  "deviation.trials",
      "b_value.trials",    "output.dir",          "output.format"};
  return keys;
}

// --- protocol selection ---------------------------------------------------------

struct ProtocolSetup {
  std::string kind;
  std::optional<NizkSpec> nizk;
  std::optional<PublicCoinSpec> pc_yes;
  std::optional<PublicCoinSpec> pc_no;
  BitString x_yes;
  BitString x_no;
  BitString witness;

  bool public_coin() const { return pc_yes.has_value(); }
};

inline std::pair<Graph, Graph> resolve_graph_pair(const std::string& ref) {
  if (ref == "builtin:c4-pair") return isomorphic_c4_pair();
  if (ref == "builtin:c4-paw") return non_isomorphic_c4_pair();
  return load_graph_pair(ref);
}

inline DialProfile dial_profile_from(const KeyValueConfig& cfg) {
  DialProfile p;
  p.eps_c = Probability(cfg.get_rational_or("protocol.eps_c", 0));
  p.eps_s = Probability(cfg.get_rational_or("protocol.eps_s", 0));
  p.eps_z = Probability(cfg.get_rational_or("protocol.eps_z", 0));
  p.m = cfg.get_u64_or("protocol.m", p.m);
  p.ell_z = cfg.get_u64_or("protocol.ell_z", p.ell_z);
  p.tag_seed = cfg.get_u64_or("protocol.tag_seed", p.tag_seed);
  p.tag_bits = cfg.get_u64_or("protocol.tag_bits", p.tag_bits);
  return p;
}

inline ProtocolSetup make_protocol(const KeyValueConfig& cfg) {
  ProtocolSetup s;
  s.kind = cfg.get_or("protocol.kind", "dial-nizk");
  if (s.kind == "graph-iso") {
    auto [g0, g1] = resolve_graph_pair(cfg.get_or("graphs.yes", "builtin:c4-pair"));
    auto [h0, h1] = resolve_graph_pair(cfg.get_or("graphs.no", "builtin:c4-paw"));
    auto phi = find_isomorphism(g0, g1);
    if (!phi) throw ConfigError("graphs.yes is not an isomorphic pair");
    if (find_isomorphism(h0, h1)) throw ConfigError("graphs.no is an isomorphic pair");
    s.pc_yes = make_graph_iso(g0, g1);
    s.pc_no = make_graph_iso(h0, h1);
    s.x_yes = encode_graph_pair(g0, g1);
    s.x_no = encode_graph_pair(h0, h1);
    s.witness = encode_witness(*phi);
    return s;
  }
  const DialProfile profile = dial_profile_from(cfg);
  s.x_yes = BitString::from_string(cfg.get_or("protocol.yes", dial_yes_instance().str()));
  s.x_no = BitString::from_string(cfg.get_or("protocol.no", dial_no_instance().str()));
  if (!dial_member(s.x_yes) || dial_member(s.x_no)) {
    throw ConfigError("protocol.yes must start with 1 and protocol.no with 0");
  }
  s.witness = s.x_yes;
  if (s.kind == "dial-nizk") {
    s.nizk = make_dial_nizk(profile);
  } else if (s.kind == "dial-nizk-noisy") {
    s.nizk = make_dial_nizk_noisy(profile, Probability(cfg.get_rational("protocol.noise")),
                                  cfg.get_u64_or("protocol.noise_bits", 2));
  } else if (s.kind == "dial-pc") {
    const auto k = cfg.get_u64_or("protocol.k", 2);
    std::vector<std::size_t> m_list;
    if (cfg.has("protocol.m_list")) {
      for (auto v : cfg.get_u64_list("protocol.m_list")) m_list.push_back(v);
    } else {
      m_list.assign(k, profile.m / k);
      m_list.back() += profile.m % k;
    }
    s.pc_yes = make_dial_pc(profile, k, m_list);
    s.pc_no = s.pc_yes;
  } else {
    throw ConfigError("unknown protocol.kind '" + s.kind + "'");
  }
  return s;
}

inline ErrorProfile measure_profile(const ProtocolSetup& s, EnumerationBudget budget) {
  if (s.nizk) return measure_error_profile(*s.nizk, s.x_yes, s.witness, s.x_no, budget);
  ErrorProfile yes = measure_error_profile(*s.pc_yes, s.x_yes, s.witness, s.x_no, budget);
  if (s.kind != "graph-iso") return yes;
  // Soundness is measured against the no-instance's own spec.
  yes.eps_s = best_prover_acceptance(*s.pc_no, s.x_no, budget).value;
  return yes;
}

// --- inverters ------------------------------------------------------------------

inline InverterPtr make_inverter(const KeyValueConfig& cfg, const CandidateFunction& f,
                                 std::optional<std::size_t> level, EnumerationBudget budget) {
  std::string prefix = "inverter.";
  if (level && cfg.has("inverter.level." + std::to_string(*level) + ".kind")) {
    prefix = "inverter.level." + std::to_string(*level) + ".";
  }
  const std::string kind = cfg.get_or(prefix + "kind", "distributional");
  if (kind == "canonical") return canonical_inverter(f, budget);
  if (kind == "distributional") return distributional_inverter(f, budget);
  if (kind == "null") return null_inverter(f);
  if (kind == "noisy") {
    return noisy_inverter(distributional_inverter(f, budget), Probability(cfg.get_rational(prefix + "delta")));
  }
  if (kind == "conditional") return conditional_inverter(f, cfg.get_u64_or(prefix + "retry_cap", 1U << 14));
  throw ConfigError("unknown inverter kind '" + kind + "'");
}

// Exact when enumerable, Monte Carlo when the inverter allows it.
inline std::optional<DeviationReport> inverter_quality(const Inverter& inv, EnumerationBudget budget,
                                                       std::uint64_t trials, SeededRng rng) {
  try {
    return measure_deviation_exact(inv, budget);
  } catch (const BudgetError&) {
  }
  if (!inv.exact_on_success() || trials == 0) return std::nullopt;
  return measure_deviation_mc(inv, trials, rng);
}

// --- results ----------------------------------------------------------------------

enum class Direction { AtLeast, AtMost };

inline std::string to_string(Direction r) { return r == Direction::AtLeast ? "ge" : "le"; }

struct Arm {
  std::string name;
  Direction relation = Direction::AtLeast;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  std::uint64_t fallbacks = 0;
  double estimate = 0;
  double radius = 0;
  std::optional<std::string> exact;        // rational, exact mode only
  double bound = 0;
  std::optional<std::string> bound_exact;  // rational when every term is
  std::string verdict;

  friend bool operator==(const Arm&, const Arm&) = default;
};

struct Metric {
  std::string name;
  double value = 0;
  std::optional<std::string> exact;

  friend bool operator==(const Metric&, const Metric&) = default;
};

struct ExperimentResult {
  int schema_version = kResultSchemaVersion;
  std::string config;  // canonical serialized config
  std::string config_hash;
  std::string construction;
  std::string mode;
  std::uint64_t seed = 0;
  std::string eps_c, eps_s, eps_z;
  std::vector<Arm> arms;
  std::vector<Metric> metrics;
  std::string verdict;

  const Arm& arm(const std::string& name) const {
    for (const auto& a : arms) {
      if (a.name == name) return a;
    }
    throw DomainError("no arm '" + name + "'");
  }
  const Metric& metric(const std::string& name) const {
    for (const auto& m : metrics) {
      if (m.name == name) return m;
    }
    throw DomainError("no metric '" + name + "'");
  }

  friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

struct TrialRecord {
  std::string arm;
  std::uint64_t index = 0;
  bool accept = false;
  bool fallback = false;
};

struct ExperimentRun {
  ExperimentResult result;
  std::vector<TrialRecord> trials;
  double wall_seconds = 0;  // informational, never persisted
};

inline constexpr const char* kHolds = "bound-holds";
inline constexpr const char* kViolated = "bound-violated";
inline constexpr const char* kInconclusive = "inconclusive";

// Exact: direct comparison. Monte Carlo: violated only when the whole 3-sigma
// band lies on the wrong side of the bound; no evidence at all is
// inconclusive.
inline std::string judge(const Arm& a, const std::optional<Rational>& exact,
                         const std::optional<Rational>& bound_exact) {
  const bool lower = a.relation == Direction::AtLeast;
  if (exact) {
    const bool ok = bound_exact ? (lower ? *exact >= *bound_exact : *exact <= *bound_exact)
                                : (lower ? exact->get_d() >= a.bound : exact->get_d() <= a.bound);
    return ok ? kHolds : kViolated;
  }
  if (a.trials == 0) return kInconclusive;
  const double gap = lower ? a.estimate - a.bound : a.bound - a.estimate;
  return gap + a.radius >= 0 ? kHolds : kViolated;
}

inline std::string overall_verdict(const std::vector<Arm>& arms) {
  std::string out = kHolds;
  for (const auto& a : arms) {
    if (a.verdict == kViolated) return kViolated;
    if (a.verdict == kInconclusive) out = kInconclusive;
  }
  return out;
}

inline std::string config_hash(const KeyValueConfig& cfg) {
  std::string text;
  for (const auto& [k, v] : cfg.values()) {
    if (k == "run.threads" || k.rfind("output.", 0) == 0) continue;
    text += k + " = " + v + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(text)));
  return buf;
}

// --- trial execution ----------------------------------------------------------------

using TrialFn = std::function<ReductionOutcome(CoinSource&)>;

// Trial t of an arm draws from rng.child(arm).child(t), so results do not
// depend on the thread count.
inline std::vector<std::pair<bool, bool>> run_trials(const TrialFn& trial, std::uint64_t n,
                                                     SeededRng arm_rng, unsigned threads) {
  std::vector<std::pair<bool, bool>> out(n);
  auto work = [&](unsigned tid, unsigned stride) {
    for (std::uint64_t t = tid; t < n; t += stride) {
      RngCoins coins(arm_rng.child(t));
      auto r = trial(coins);
      out[t] = {r.accept, r.fallback};
    }
  };
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(n, 1))));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned tid = 0; tid < threads; ++tid) {
      pool.emplace_back([&, tid] {
        try {
          work(tid, threads);
        } catch (...) {
          errors[tid] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

struct ArmSpec {
  std::string name;
  Direction relation;
  TrialFn trial;
  double bound;
  std::optional<Rational> bound_exact;
};

// --- the experiment ---------------------------------------------------------------------

class Experiment {
 public:
  explicit Experiment(KeyValueConfig cfg) : cfg_(std::move(cfg)) {
    auto unknown = cfg_.unknown_keys(config_schema());
    if (!unknown.empty()) throw ConfigError("unknown config key '" + unknown.front() + "'");
    construction_ = cfg_.get_or("construction", "nizk");
    mode_ = cfg_.get_or("run.mode", "mc");
    if (mode_ != "exact" && mode_ != "mc") throw ConfigError("run.mode must be exact or mc");
    trials_ = cfg_.get_u64_or("run.trials", mode_ == "exact" ? 0 : 1000);
    seed_ = cfg_.get_u64_or("run.seed", 1);
    threads_ = static_cast<unsigned>(cfg_.get_u64_or("run.threads", 1));
    const auto budget_log2 = cfg_.get_u64_or("run.budget_log2", 24);
    if (budget_log2 > 40) throw ConfigError("run.budget_log2 above 40");
    budget_.max_assignments = std::uint64_t{1} << budget_log2;
    if (cfg_.has("params.preset_n")) {
      params_ = ReductionParams::standard_preset(cfg_.get_u64("params.preset_n"), cfg_.get_u64_or("params.p", 8));
    } else {
      params_.p = cfg_.get_u64_or("params.p", params_.p);
      params_.q = cfg_.get_u64_or("params.q", params_.q);
      params_.tau = Probability(cfg_.get_rational_or("params.tau", params_.tau.value()));
    }
    setup_ = make_protocol(cfg_);
    params_.validate(setup_.public_coin() ? setup_.pc_yes->k : 1);
  }

  const KeyValueConfig& config() const noexcept { return cfg_; }
  const ProtocolSetup& setup() const noexcept { return setup_; }
  const ReductionParams& params() const noexcept { return params_; }
  EnumerationBudget budget() const noexcept { return budget_; }

  ExperimentRun run() {
    const auto start = std::chrono::steady_clock::now();
    ExperimentRun out;
    auto& res = out.result;
    res.config = cfg_.serialize();
    res.config_hash = config_hash(cfg_);
    res.construction = construction_;
    res.mode = mode_;
    res.seed = seed_;

    profile_ = measure_profile(setup_, budget_);
    res.eps_c = profile_.eps_c.str();
    res.eps_s = profile_.eps_s.str();
    res.eps_z = profile_.eps_z.str();
    metrics_.clear();

    std::vector<ArmSpec> arms;
    if (construction_ == "nizk") {
      arms = nizk_arms();
    } else if (construction_ == "pc") {
      arms = pc_arms();
    } else if (construction_ == "cr") {
      arms = cr_arms();
    } else if (construction_ == "rv") {
      arms = rv_arms();
    } else if (construction_ == "decider") {
      arms = decider_arms();
    } else {
      throw ConfigError("unknown construction '" + construction_ + "'");
    }

    const SeededRng root(seed_);
    for (const auto& spec : arms) {
      Arm a;
      a.name = spec.name;
      a.relation = spec.relation;
      a.bound = spec.bound;
      if (spec.bound_exact) a.bound_exact = spec.bound_exact->get_str();
      std::optional<Rational> exact;
      if (mode_ == "exact") {
        try {
          exact = enumerate_probability([&](CoinSource& c) { return spec.trial(c).accept; }, budget_).value();
        } catch (const BudgetError& e) {
          throw BudgetError(construction_ + " arm '" + spec.name + "' is not enumerable (" + e.what() +
                            "); use run.mode = mc");
        }
        a.exact = exact->get_str();
        a.estimate = exact->get_d();
      }
      if (trials_ > 0 && spec.trial) {
        auto flags = run_trials(spec.trial, trials_, root.child(spec.name), threads_);
        for (std::uint64_t t = 0; t < flags.size(); ++t) {
          a.hits += flags[t].first;
          a.fallbacks += flags[t].second;
          out.trials.push_back({spec.name, t, flags[t].first, flags[t].second});
        }
        a.trials = trials_;
        if (!exact) {
          a.estimate = static_cast<double>(a.hits) / static_cast<double>(trials_);
          a.radius = three_sigma(trials_);
        }
      }
      a.verdict = judge(a, exact, spec.bound_exact);
      res.arms.push_back(std::move(a));
    }
    finish_derived(res);
    res.metrics = metrics_;
    res.verdict = overall_verdict(res.arms);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

 private:
  void metric(const std::string& name, double v, std::optional<Rational> exact = std::nullopt) {
    Metric m;
    m.name = name;
    m.value = v;
    if (exact) m.exact = exact->get_str();
    metrics_.push_back(std::move(m));
  }
  void metric(const std::string& name, const Rational& v) { metric(name, v.get_d(), v); }

  std::uint64_t deviation_trials() const { return cfg_.get_u64_or("deviation.trials", 2000); }

  // Success and deviation of an inverter; failure rate 1 when unmeasurable.
  struct Quality {
    double failure = 1;
    double deviation = 1;
    std::optional<Rational> exact_failure;
    std::optional<Rational> exact_deviation;
  };
  Quality quality(const std::string& tag, const Inverter& inv) {
    Quality q;
    auto rep = inverter_quality(inv, budget_, deviation_trials(), SeededRng(seed_).child("deviation").child(tag));
    if (!rep) {
      metric(tag + ".deviation_unmeasured", 1);
      return q;
    }
    q.failure = 1 - rep->success_rate;
    q.deviation = rep->deviation;
    if (rep->exact_success) {
      q.exact_failure = 1 - rep->exact_success->value();
      q.exact_deviation = rep->exact_deviation->value();
      metric(tag + ".success", rep->exact_success->value());
      metric(tag + ".deviation", *q.exact_deviation);
    } else {
      metric(tag + ".success", rep->success_rate);
      metric(tag + ".deviation", rep->deviation);
      metric(tag + ".deviation_radius", rep->radius);
    }
    return q;
  }

  Rational ec() const { return profile_.eps_c.value(); }
  Rational es() const { return profile_.eps_s.value(); }
  Rational ez() const { return profile_.eps_z.value(); }
  Rational inv_p() const { return make_rational(1, params_.p); }

  const NizkSpec& nizk_spec() const {
    if (!setup_.nizk) throw ConfigError(construction_ + " needs a NIZK protocol");
    return *setup_.nizk;
  }
  PublicCoinSpec pc_spec(bool yes) const {
    if (setup_.public_coin()) return yes ? *setup_.pc_yes : *setup_.pc_no;
    return as_public_coin(nizk_spec());
  }

  // Lower bound: 1 - eps_c - eps_z - Pr[A fails on f(U)].
  std::vector<ArmSpec> nizk_arms() {
    const NizkSpec& spec = nizk_spec();
    auto iy = make_inverter(cfg_, nizk_candidate(spec, setup_.x_yes), std::nullopt, budget_);
    auto in = make_inverter(cfg_, nizk_candidate(spec, setup_.x_no), std::nullopt, budget_);
    Quality qy = quality("inverter.yes", *iy);
    std::optional<Rational> lb;
    if (qy.exact_failure) lb = 1 - ec() - ez() - *qy.exact_failure;
    const double lbd = lb ? lb->get_d() : 1 - profile_.eps_c.to_double() - profile_.eps_z.to_double() - qy.failure;
    const BitString xy = setup_.x_yes, xn = setup_.x_no;
    return {
        {"yes", Direction::AtLeast, [spec, xy, iy](CoinSource& c) { return nizk_reduce(spec, xy, *iy, c); }, lbd, lb},
        {"no", Direction::AtMost, [spec, xn, in](CoinSource& c) { return nizk_reduce(spec, xn, *in, c); },
         es().get_d(), es()},
    };
  }

  // 1 - eps_c - (t-1) eps_z - k/p, valid when the inverter's deviation is at
  // most 1/p; the t/p form is reported as a metric.
  std::vector<ArmSpec> pc_arms() {
    const auto sy = pc_spec(true), sn = pc_spec(false);
    auto iy = make_inverter(cfg_, pc_candidate(sy, setup_.x_yes), std::nullopt, budget_);
    auto in = make_inverter(cfg_, pc_candidate(sn, setup_.x_no), std::nullopt, budget_);
    Quality qy = quality("inverter.yes", *iy);
    const std::uint64_t t = sy.messages(), k = sy.k;
    const Rational base = 1 - ec() - make_rational(static_cast<std::int64_t>(t - 1), 1) * ez();
    const Rational lb = base - make_rational(static_cast<std::int64_t>(k), params_.p);
    metric("bound.t_over_p", base - make_rational(static_cast<std::int64_t>(t), params_.p));
    metric("hypothesis.deviation_le_1_over_p", qy.deviation <= inv_p().get_d() ? 1 : 0);
    const BitString xy = setup_.x_yes, xn = setup_.x_no;
    return {
        {"yes", Direction::AtLeast, [sy, xy, iy](CoinSource& c) { return pc_reduce(sy, xy, iy, c); }, lb.get_d(), lb},
        {"no", Direction::AtMost, [sn, xn, in](CoinSource& c) { return pc_reduce(sn, xn, in, c); }, es().get_d(),
         es()},
    };
  }

  InverterFactory cr_factory() const {
    return [this](std::size_t level, const CandidateFunction& f) { return make_inverter(cfg_, f, level, budget_); };
  }

  // Largest deviation over the levels of a stack.
  double stack_deviation(const std::string& tag, const CrStack& stack) {
    double dev = 0;
    for (std::size_t i = 1; i <= stack.k(); ++i) {
      dev = std::max(dev, quality(tag + ".level" + std::to_string(i), *stack.inverter(i)).deviation);
    }
    return dev;
  }

  std::vector<ArmSpec> cr_arms() {
    auto sy = std::make_shared<CrStack>(pc_spec(true), setup_.x_yes, params_, cr_factory(), budget_);
    auto sn = std::make_shared<CrStack>(pc_spec(false), setup_.x_no, params_, cr_factory(), budget_);
    const double k = static_cast<double>(sy->k());
    const double dev = stack_deviation("inverter.yes", *sy);
    const double tau = params_.tau.to_double();
    const double tail = hoeffding_tail(params_.tau.value(), params_.q);
    const double p = static_cast<double>(params_.p);
    const double base = 1 - profile_.eps_c.to_double() - k * profile_.eps_z.to_double() - k * (1 / p + dev);
    metric("inverter.max_deviation", dev);
    metric("hoeffding_tail", tail);
    metric("bound.b_value", base - tail);
    metric("bound.gap", 2 * (k - 1) * tau + tail);

    // B value arm and the gap |B - acceptance| are filled in after the trials.
    b_stack_ = sy;
    b_bound_ = base - tail;
    gap_bound_ = 2 * (k - 1) * tau + tail;
    return {
        {"yes", Direction::AtLeast, [sy](CoinSource& c) { return cr_reduce(*sy, c); },
         base - 2 * (k - 1) * (tau + tail), std::nullopt},
        {"no", Direction::AtMost, [sn](CoinSource& c) { return cr_reduce(*sn, c); }, es().get_d(), es()},
    };
  }

  std::vector<ArmSpec> rv_arms() {
    const NizkSpec& spec = nizk_spec();
    if (!spec.randomized_verifier()) throw ConfigError("rv needs a protocol with a randomized verifier");
    auto iy = make_inverter(cfg_, rv_candidate(spec, setup_.x_yes, params_.q), std::nullopt, budget_);
    auto in = make_inverter(cfg_, rv_candidate(spec, setup_.x_no, params_.q), std::nullopt, budget_);
    quality("inverter.yes", *iy);
    const double tail = hoeffding_tail(inv_p(), params_.q);
    metric("hoeffding_tail", tail);
    const double lb = 1 - profile_.eps_c.to_double() - profile_.eps_z.to_double() - 3.0 / static_cast<double>(params_.p) - tail;
    const BitString xy = setup_.x_yes, xn = setup_.x_no;
    const ReductionParams pr = params_;
    return {
        {"yes", Direction::AtLeast, [spec, xy, iy, pr](CoinSource& c) { return rv_reduce(spec, xy, *iy, pr, c); }, lb,
         std::nullopt},
        {"no", Direction::AtMost, [spec, xn, in, pr](CoinSource& c) { return rv_reduce(spec, xn, *in, pr, c); },
         es().get_d(), es()},
    };
  }

  // Per-instance inverters drive both the checks and the reduction. The
  // no-arm bound adds the union of the check failure rates to eps_s; the
  // 2/p form is reported as a metric.
  std::vector<ArmSpec> decider_arms() {
    const std::string red = cfg_.get_or("decider.reduction", "nizk");
    struct Side {
      std::vector<InverterPtr> levels;
      ReduceFn reduce;
      std::optional<Rational> fail_exact = Rational(0);
      double fail = 0;
    };
    auto side = [&](bool yes) {
      Side s;
      const BitString x = yes ? setup_.x_yes : setup_.x_no;
      const std::string tag = std::string("inverter.") + (yes ? "yes" : "no");
      if (red == "nizk") {
        const NizkSpec& spec = nizk_spec();
        auto inv = make_inverter(cfg_, nizk_candidate(spec, x), std::nullopt, budget_);
        s.levels = {inv};
        s.reduce = [spec, x, inv](CoinSource& c) { return nizk_reduce(spec, x, *inv, c); };
      } else if (red == "pc") {
        auto spec = pc_spec(yes);
        auto inv = make_inverter(cfg_, pc_candidate(spec, x), std::nullopt, budget_);
        s.levels = {inv};
        s.reduce = [spec, x, inv](CoinSource& c) { return pc_reduce(spec, x, inv, c); };
      } else if (red == "rv") {
        const NizkSpec& spec = nizk_spec();
        auto inv = make_inverter(cfg_, rv_candidate(spec, x, params_.q), std::nullopt, budget_);
        s.levels = {inv};
        const ReductionParams pr = params_;
        s.reduce = [spec, x, inv, pr](CoinSource& c) { return rv_reduce(spec, x, *inv, pr, c); };
      } else if (red == "cr") {
        auto stack = std::make_shared<CrStack>(pc_spec(yes), x, params_, cr_factory(), budget_);
        for (std::size_t i = 1; i <= stack->k(); ++i) s.levels.push_back(stack->inverter(i));
        s.reduce = [stack](CoinSource& c) { return cr_reduce(*stack, c); };
      } else {
        throw ConfigError("unknown decider.reduction '" + red + "'");
      }
      for (std::size_t i = 0; i < s.levels.size(); ++i) {
        Quality q = quality(tag + (s.levels.size() > 1 ? ".level" + std::to_string(i + 1) : ""), *s.levels[i]);
        s.fail += q.failure;
        if (s.fail_exact && q.exact_failure) {
          *s.fail_exact += *q.exact_failure;
        } else {
          s.fail_exact.reset();
        }
      }
      return s;
    };
    Side y = side(true), n = side(false);

    const double levels = static_cast<double>(n.levels.size());
    metric("bound.no_two_over_p", 2 * levels / static_cast<double>(params_.p) + profile_.eps_s.to_double());
    std::optional<Rational> ub;
    if (n.fail_exact) {
      Rational u = es() + *n.fail_exact;
      ub = u > 1 ? Rational(1) : u;
    }
    const double ubd = ub ? ub->get_d() : std::min(1.0, profile_.eps_s.to_double() + n.fail);

    // Yes side: the output is 1 whenever the reduction accepts, so the
    // reduction's own guarantee carries over.
    std::optional<Rational> lb;
    double lbd = 0;
    if (red == "nizk" || red == "pc") {
      const auto t = red == "nizk" ? 2 : pc_spec(true).messages();
      const Rational z = make_rational(static_cast<std::int64_t>(t - 1), 1) * ez();
      if (y.fail_exact) lb = 1 - ec() - z - *y.fail_exact;
      lbd = lb ? lb->get_d() : 1 - ec().get_d() - z.get_d() - y.fail;
    } else {
      lbd = 1 - ec().get_d() - levels * ez().get_d() - levels * y.fail - 3.0 / static_cast<double>(params_.p) -
            hoeffding_tail(inv_p(), params_.q);
    }
    auto as_trial = [](std::vector<InverterPtr> levels, ReduceFn reduce) {
      return [levels, reduce](CoinSource& c) {
        std::vector<const Inverter*> raw;
        for (const auto& l : levels) raw.push_back(l.get());
        Decision d = one_sided_decide_levels(raw, reduce, c);
        return ReductionOutcome{d.output, d.fallback};
      };
    };
    return {
        {"yes", Direction::AtLeast, as_trial(y.levels, y.reduce), lbd, lb},
        {"no", Direction::AtMost, as_trial(n.levels, n.reduce), ubd, ub},
    };
  }

  // Arms computed from other arms (cr only).
  void finish_derived(ExperimentResult& res) {
    if (!b_stack_) return;
    const auto n = cfg_.get_u64_or("b_value.trials", std::max<std::uint64_t>(trials_, 1));
    BValue bv = b_value_mc(*b_stack_, n, SeededRng(seed_).child("b-value"));
    Arm b;
    b.name = "b-value";
    b.relation = Direction::AtLeast;
    b.trials = n;
    b.estimate = bv.value;
    b.radius = bv.radius;
    b.bound = b_bound_;
    b.verdict = judge(b, std::nullopt, std::nullopt);
    res.arms.push_back(b);

    const Arm& yes = res.arm("yes");
    Arm g;
    g.name = "b-gap";
    g.relation = Direction::AtMost;
    g.trials = yes.trials;
    g.estimate = std::abs(bv.value - yes.estimate);
    g.radius = three_sigma(yes.trials);
    g.bound = gap_bound_;
    g.verdict = judge(g, std::nullopt, std::nullopt);
    res.arms.push_back(g);
  }

  KeyValueConfig cfg_;
  std::string construction_;
  std::string mode_;
  std::uint64_t trials_ = 0;
  std::uint64_t seed_ = 1;
  unsigned threads_ = 1;
  EnumerationBudget budget_;
  ReductionParams params_;
  ProtocolSetup setup_;
  ErrorProfile profile_;
  std::vector<Metric> metrics_;
  std::shared_ptr<CrStack> b_stack_;
  double b_bound_ = 0;
  double gap_bound_ = 0;
};

inline ExperimentRun run_experiment(const KeyValueConfig& cfg) { return Experiment(cfg).run(); }

}  // namespace wzk
