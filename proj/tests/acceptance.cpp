// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "test_util.hpp"
#include "wzk/harness/report.hpp"
#include "wzk/owf/hybrids.hpp"

namespace {

using namespace wzk;

const std::string kSource = WZK_SOURCE_DIR;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, const std::string& title, double limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > limit_s) {
    c.ok = false;
    c.detail << " [runtime " << secs << " s over " << limit_s << " s]";
  }
  if (!c.ok) ++failures;
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.2f", secs);
  std::cout << "criterion " << n << ": " << (c.ok ? "PASS" : "FAIL") << "  " << title << ":" << c.detail.str()
            << " (" << timing << " s)" << std::endl;
}

DialProfile dial(std::uint64_t c, std::uint64_t s, std::uint64_t z, std::size_t m, std::size_t ell_z) {
  DialProfile p;
  p.eps_c = Probability::ratio(c, std::uint64_t{1} << m);
  p.eps_s = Probability::ratio(s, std::uint64_t{1} << m);
  p.eps_z = Probability::ratio(z, std::uint64_t{1} << ell_z);
  p.m = m;
  p.ell_z = ell_z;
  return p;
}

ExperimentResult run_config(const std::string& name) {
  return run_experiment(KeyValueConfig::load(kSource + "/configs/" + name)).result;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// --- 1 --------------------------------------------------------------------------

void dial_exactness(Check& c) {
  SeededRng rng = SeededRng(2024).child("dial-profiles");
  int exact = 0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    const std::size_t m = 1 + rng.below(12);
    const std::size_t ell = 1 + rng.below(6);
    const std::uint64_t full = std::uint64_t{1} << m;
    const std::uint64_t cc = rng.below(full + 1);
    const std::uint64_t ss = rng.below(full - cc + 1);
    const std::uint64_t zz = rng.below((std::uint64_t{1} << ell) + 1);
    DialProfile p = dial(cc, ss, zz, m, ell);
    p.tag_seed = rng.below(1U << 30);
    auto spec = make_dial_nizk(p);
    auto got = measure_error_profile(spec, dial_yes_instance(), dial_yes_instance(), dial_no_instance());
    if (got.eps_c == p.eps_c && got.eps_s == p.eps_s && got.eps_z == p.eps_z) {
      ++exact;
    } else {
      c.detail << " mismatch m=" << m << " ell_z=" << ell << " want (" << p.eps_c.str() << ", " << p.eps_s.str()
               << ", " << p.eps_z.str() << ") got " << got.str();
    }
  }
  c.detail << " " << exact << "/" << n << " profiles reproduced exactly";
  c.require(exact == n, "every profile exact");
}

// --- 2 --------------------------------------------------------------------------

void nizk_bound(Check& c) {
  auto r = run_config("dial_nizk.cfg");
  const auto& yes = r.arm("yes");
  const auto& no = r.arm("no");
  c.detail << " profile (" << r.eps_c << ", " << r.eps_s << ", " << r.eps_z << "), yes " << *yes.exact
           << " >= " << *yes.bound_exact << ", no " << *no.exact << " <= " << *no.bound_exact;
  c.require(r.eps_c == "1/16" && r.eps_s == "1/8" && r.eps_z == "1/4", "measured profile");
  c.require(parse_rational(*yes.exact) >= make_rational(11, 16), "yes >= 11/16");
  c.require(*yes.bound_exact == "11/16", "bound is 11/16");
  c.require(parse_rational(*no.exact) <= make_rational(1, 8), "no <= 1/8");
}

// --- 3 --------------------------------------------------------------------------

void pc_bound(Check& c) {
  auto r = run_config("gi_pc.cfg");
  const auto& yes = r.arm("yes");
  const auto& no = r.arm("no");
  const double sigma3 = three_sigma(yes.trials);
  c.detail << " N=" << yes.trials << ", yes " << num(yes.estimate) << " >= " << num(yes.bound) << " - "
           << num(sigma3) << ", no " << num(no.estimate) << " <= 0.5 + " << num(three_sigma(no.trials))
           << ", inverter deviation " << r.metric("inverter.yes.deviation").exact.value_or("?");
  c.require(yes.trials == 100000 && no.trials == 100000, "N = 10^5");
  c.require(yes.bound == 0.75, "bound 1 - k/p = 0.75");
  c.require(r.metric("inverter.yes.deviation").exact == "0", "exact inverter");
  c.require(yes.estimate >= yes.bound - sigma3, "yes arm");
  c.require(no.estimate <= 0.5 + three_sigma(no.trials), "no arm");
}

// --- 4 --------------------------------------------------------------------------

void hybrid_ladder(Check& c) {
  auto spec = make_dial_pc(dial(1, 2, 1, 4, 2), 2, {2, 2});
  const auto x = dial_yes_instance();
  auto prof = measure_error_profile(spec, x, x, dial_no_instance());
  auto inv = distributional_inverter(pc_candidate(spec, x));
  const Rational ez = prof.eps_z.value(), ecp = prof.eps_c.value();
  for (std::size_t i = 1; i <= spec.k; ++i) {
    auto s = hybrid_distribution(spec, x, x, inv, i, HybridKind::S_i);
    auto p = hybrid_distribution(spec, x, x, inv, i, HybridKind::P_i);
    auto m = hybrid_distribution(spec, x, x, inv, i, HybridKind::M_i);
    const auto dsp = stat_distance(s, p), dmp = stat_distance(m, p);
    c.detail << " i=" << i << ": d(S,P)=" << dsp.str() << " d(M,P)=" << dmp.str() << ";";
    c.require(dsp.value() <= ez, "d(S_i, P_i) <= eps_z");
    c.require(dmp.value() <= ez, "d(M_i, P_i) <= eps_z");
  }
  auto dp = hybrid_distribution(spec, x, x, inv, 0, HybridKind::P_full);
  auto dpk = hybrid_distribution(spec, x, x, inv, spec.k, HybridKind::P_i);
  const auto d = stat_distance(dp, dpk);
  c.detail << " d(P, P^(k))=" << d.str() << " eps=(" << prof.eps_c.str() << ", " << prof.eps_z.str() << ");";
  c.require(d.value() <= ecp, "d(P, P_k) <= eps_c");

  auto [g0, g1] = isomorphic_c4_pair();
  auto gi = make_graph_iso(g0, g1);
  auto gx = encode_graph_pair(g0, g1);
  auto gw = encode_witness(*find_isomorphism(g0, g1));
  auto ginv = distributional_inverter(pc_candidate(gi, gx));
  const auto g = stat_distance(hybrid_distribution(gi, gx, gw, ginv, 1, HybridKind::M_i),
                               hybrid_distribution(gi, gx, gw, ginv, 1, HybridKind::P_i));
  c.detail << " GI d(M^(1), P^(1))=" << g.str();
  c.require(g == Probability::zero(), "GI d(M_1, P_1) = 0");
}

// --- 5, 6 --------------------------------------------------------------------------

const ExperimentResult& gi_k2() {
  static const ExperimentResult r = run_config("gi_k2.cfg");
  return r;
}

void cr_gap(Check& c) {
  const auto& r = gi_k2();
  const auto& b = r.arm("b-value");
  const auto& yes = r.arm("yes");
  const auto& gap = r.arm("b-gap");
  const double rhs = r.metric("bound.gap").value + three_sigma(yes.trials);
  c.detail << " N=" << yes.trials << ", |B " << num(b.estimate) << " - acc " << num(yes.estimate)
           << "| = " << num(gap.estimate) << " <= 2(k-1)tau + tail + 3sigma = " << num(rhs);
  c.require(yes.trials == 10000, "N = 10^4");
  c.require(gap.estimate <= rhs, "gap");
}

void cr_b_value(Check& c) {
  const auto& r = gi_k2();
  const auto& b = r.arm("b-value");
  c.detail << " B=" << num(b.estimate) << " (radius " << num(b.radius) << ") >= " << num(b.bound)
           << " = 1 - eps_c - k eps_z - k(1/p + dev) - tail with eps=(" << r.eps_c << ", " << r.eps_z
           << "), dev=" << num(r.metric("inverter.max_deviation").value) << ", tail="
           << num(r.metric("hoeffding_tail").value);
  c.require(b.estimate + b.radius >= b.bound, "B value bound");
  c.require(r.arm("yes").verdict == kHolds && r.arm("no").verdict == kHolds, "both arms hold");
}

// --- 7 --------------------------------------------------------------------------

void rv_bound(Check& c) {
  auto r = run_config("dial_rv.cfg");
  const auto& yes = r.arm("yes");
  const auto& no = r.arm("no");
  const double s3 = three_sigma(yes.trials);
  c.detail << " profile (" << r.eps_c << ", " << r.eps_s << ", " << r.eps_z << "), yes " << num(yes.estimate)
           << " >= " << num(yes.bound) << " - " << num(s3) << ", no " << num(no.estimate) << " <= "
           << num(no.bound) << " + " << num(s3);
  c.require(yes.trials == 10000, "N = 10^4");
  c.require(std::abs(r.metric("hoeffding_tail").value - hoeffding_tail(make_rational(1, 8), 64)) < 1e-15,
            "tail at (1/p, 64)");
  c.require(yes.estimate >= yes.bound - s3, "yes arm");
  c.require(no.estimate <= no.bound + s3, "no arm");
}

// --- 8 --------------------------------------------------------------------------

void properties(Check& c) {
  // DPI and triangle inequality, exact.
  SeededRng rng = SeededRng(8).child("properties");
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t universe = 2 + rng.below(7);
    auto x = testing::random_distribution(rng, universe);
    auto y = testing::random_distribution(rng, universe);
    auto z = testing::random_distribution(rng, universe);
    std::vector<std::uint64_t> table(universe);
    for (auto& v : table) v = rng.below(1 + rng.below(universe));
    auto f = [&](const Outcome& o) -> std::optional<Outcome> {
      return testing::small_outcome(table[std::get<BitString>(Decoder(o).next()).to_uint()]);
    };
    const auto dxy = stat_distance(x, y);
    bad += !(stat_distance(x, z).value() <= dxy.value() + stat_distance(y, z).value());
    bad += !(stat_distance(push_forward(x, f, "img"), push_forward(y, f, "img")).value() <= dxy.value());
  }
  c.detail << " DPI/triangle violations " << bad << "/2000;";
  c.require(bad == 0, "DPI and triangle");

  // Distributional inverters are exact on the zoo's candidates.
  std::vector<CandidateFunction> fs;
  auto nizk = make_dial_nizk(dial(64, 128, 4, 10, 4));
  fs.push_back(nizk_candidate(nizk, dial_yes_instance()));
  fs.push_back(nizk_candidate(nizk, dial_no_instance()));
  auto dpc = make_dial_pc(dial(1, 2, 1, 4, 2), 2, {2, 2});
  fs.push_back(pc_candidate(dpc, dial_yes_instance()));
  auto [g0, g1] = isomorphic_c4_pair();
  auto [h0, h1] = non_isomorphic_c4_pair();
  auto gi_yes = make_graph_iso(g0, g1);
  auto gi_no = make_graph_iso(h0, h1);
  fs.push_back(pc_candidate(gi_yes, encode_graph_pair(g0, g1)));
  fs.push_back(pc_candidate(gi_no, encode_graph_pair(h0, h1)));
  int nonzero = 0;
  for (const auto& f : fs) {
    auto rep = measure_deviation_exact(*distributional_inverter(f));
    nonzero += *rep.exact_deviation != Probability::zero();
  }
  c.detail << " nonzero distributional deviations " << nonzero << "/" << fs.size() << ";";
  c.require(nonzero == 0, "distributional deviation 0");

  // Hoeffding concentration for Bernoulli(1/2) means.
  struct Setting {
    std::int64_t tau_den;
    std::uint64_t q;
  };
  for (auto [den, q] : {Setting{8, 64}, Setting{4, 16}, Setting{16, 256}}) {
    const Rational tau = make_rational(1, den);
    RngCoins coins(SeededRng(8).child("hoeffding").child(q));
    const int runs = 20000;
    int far = 0;
    for (int r = 0; r < runs; ++r) {
      auto est = empirical_mean([](CoinSource& cs) { return cs.draw(2) == 1; }, q, coins);
      far += std::abs(est.to_double() - 0.5) > tau.get_d();
    }
    const double freq = static_cast<double>(far) / runs;
    c.detail << " tail(1/" << den << "," << q << ") " << num(freq) << " <= " << num(hoeffding_tail(tau, q)) << ";";
    c.require(freq <= hoeffding_tail(tau, q), "Hoeffding");
  }

  // Soundness ceiling: exact no-instance acceptance of every enumerable
  // reduction, under every enumerable inverter, stays below eps_s.
  int checked = 0, over = 0;
  auto inverters = [](const CandidateFunction& f) {
    return std::vector<InverterPtr>{canonical_inverter(f), distributional_inverter(f),
                                    noisy_inverter(distributional_inverter(f), Probability::ratio(1, 2)),
                                    null_inverter(f)};
  };
  SeededRng prng = SeededRng(8).child("zoo");
  for (int t = 0; t < 8; ++t) {
    const std::size_t m = 2 + prng.below(6);
    const std::uint64_t full = std::uint64_t{1} << m;
    const std::uint64_t cc = prng.below(full / 2 + 1);
    DialProfile p = dial(cc, prng.below(full - cc + 1), prng.below(5), m, 2);
    auto spec = make_dial_nizk(p);
    const auto xn = dial_no_instance();
    auto es = measure_error_profile(spec, dial_yes_instance(), dial_yes_instance(), xn).eps_s;
    for (const auto& inv : inverters(nizk_candidate(spec, xn))) {
      ++checked;
      over += nizk_reduce_exact(spec, xn, *inv).value() > es.value();
    }
    if (m > 5) continue;  // keeps the two-round game tree enumerable
    auto pc = make_dial_pc(p, 2, {m / 2, m - m / 2});
    auto pes = measure_error_profile(pc, dial_yes_instance(), dial_yes_instance(), xn).eps_s;
    for (const auto& inv : inverters(pc_candidate(pc, xn))) {
      ++checked;
      over += pc_reduce_exact(pc, xn, inv).value() > pes.value();
    }
  }
  const auto xg = encode_graph_pair(h0, h1);
  const auto ges = best_prover_acceptance(gi_no, xg).value;
  for (const auto& inv : inverters(pc_candidate(gi_no, xg))) {
    ++checked;
    over += pc_reduce_exact(gi_no, xg, inv).value() > ges.value();
  }
  c.detail << " soundness ceiling exceeded " << over << "/" << checked;
  c.require(over == 0, "soundness ceiling");
}

}  // namespace

int main() {
  criterion(1, "dial exactness", 60, dial_exactness);
  criterion(2, "NIZK reduction bound (exact)", 10, nizk_bound);
  criterion(3, "public-coin reduction on graph isomorphism", 300, pc_bound);
  criterion(4, "hybrid ladder (exact)", 120, hybrid_ladder);
  criterion(5, "constant-round estimate gap", 600, cr_gap);
  criterion(6, "constant-round B value bound", 600, cr_b_value);
  criterion(7, "randomized-verifier reduction", 300, rv_bound);
  criterion(8, "property suites", 300, properties);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
