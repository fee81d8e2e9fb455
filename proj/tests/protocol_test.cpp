#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "wzk/dist/estimate.hpp"
#include "wzk/protocol/measure.hpp"
#include "wzk/zoo/dial.hpp"
#include "wzk/zoo/graph_iso.hpp"

namespace wzk {
namespace {

DialProfile profile(std::uint64_t c, std::uint64_t s, std::uint64_t z, std::size_t m = 10,
                    std::size_t ell_z = 4) {
  DialProfile p;
  p.eps_c = Probability::ratio(c, std::uint64_t{1} << m);
  p.eps_s = Probability::ratio(s, std::uint64_t{1} << m);
  p.eps_z = Probability::ratio(z, std::uint64_t{1} << ell_z);
  p.m = m;
  p.ell_z = ell_z;
  return p;
}

const BitString kYes = dial_yes_instance();
const BitString kNo = dial_no_instance();

TEST(DialNizk, PerfectProfile) {
  auto spec = make_dial_nizk(profile(0, 0, 0));
  auto prof = measure_error_profile(spec, kYes, kYes, kNo);
  EXPECT_EQ(prof, (ErrorProfile{Probability::zero(), Probability::zero(), Probability::zero()}));
}

TEST(DialNizk, ReferenceProfileIsExact) {
  // (1/16, 1/8, 1/4) with m = 10, ell_z = 4
  auto spec = make_dial_nizk(profile(64, 128, 4));
  auto prof = measure_error_profile(spec, kYes, kYes, kNo);
  EXPECT_EQ(prof.eps_c, Probability::ratio(1, 16));
  EXPECT_EQ(prof.eps_s, Probability::ratio(1, 8));
  EXPECT_EQ(prof.eps_z, Probability::ratio(1, 4));
}

TEST(DialNizk, SimulatedRejectionCombinesRegions) {
  auto spec = make_dial_nizk(profile(64, 128, 4));
  auto reject = enumerate_probability([&](CoinSource& c) {
    auto [r, pi] = spec.simulator(kYes, c.draw(spec.sim_coins));
    return !spec.verifier(kYes, r, pi, 0);
  });
  const Rational ec = make_rational(1, 16), ez = make_rational(1, 4);
  EXPECT_EQ(reject.value(), ez + ec - ez * ec);
}

TEST(DialNizk, NonDyadicProfileIsGridError) {
  DialProfile p;
  p.eps_c = Probability(make_rational(1, 3));
  EXPECT_THROW(make_dial_nizk(p), GridError);
  DialProfile q;
  q.eps_c = Probability::ratio(3, 4);
  q.eps_s = Probability::ratio(1, 2);
  EXPECT_THROW(make_dial_nizk(q), GridError);
}

TEST(DialNizk, SimProjectionOfCrs) {
  auto spec = as_public_coin(make_dial_nizk(profile(64, 128, 4)));
  const std::uint64_t rho = (0x155ULL << 4) | 3;
  EXPECT_EQ(sim_project(spec, kYes, rho, 1)[0], BitString::from_uint(0x155, 10));
  EXPECT_TRUE(sim_project(spec, kYes, rho, 0).empty());
  EXPECT_EQ(sim_project(spec, kYes, rho, 2).size(), 2u);
  EXPECT_THROW(sim_project(spec, kYes, rho, 3), ScheduleError);
}

TEST(DialNizk, NoisyVerifierProfile) {
  auto spec = make_dial_nizk_noisy(profile(64, 128, 4), Probability::ratio(1, 4), 2);
  auto prof = measure_error_profile(spec, kYes, kYes, kNo);
  // honest acceptance (15/16)(3/4) + (1/16)(1/4)
  EXPECT_EQ(prof.eps_c.value(), 1 - make_rational(46, 64));
  // best prover on x not in L cannot beat the coin: (1/8)(3/4) + (7/8)(1/4)
  EXPECT_EQ(prof.eps_s.value(), make_rational(10, 32));
  EXPECT_EQ(prof.eps_z, Probability::ratio(1, 4));
}

TEST(DialNizk, InvalidWitnessIsRelationError) {
  auto spec = make_dial_nizk(profile(0, 0, 0));
  EXPECT_THROW(view_distribution(spec, kYes, BitString::from_string("1111")), RelationError);
}

TEST(DialPc, OneRoundMatchesNizk) {
  auto pc = make_dial_pc(profile(64, 128, 4), 1, {10});
  auto prof = measure_error_profile(pc, kYes, kYes, kNo);
  EXPECT_EQ(prof, measure_error_profile(make_dial_nizk(profile(64, 128, 4)), kYes, kYes, kNo));
}

TEST(DialPc, TwoRoundZeroKnowledgeError) {
  auto pc = make_dial_pc(profile(0, 8, 2, 6, 4), 2, {3, 3});
  auto prof = measure_error_profile(pc, kYes, kYes, kNo);
  EXPECT_EQ(prof.eps_z, Probability::ratio(1, 8));
  EXPECT_EQ(prof.eps_s, Probability::ratio(1, 8));
  EXPECT_EQ(prof.eps_c, Probability::zero());
}

TEST(DialPc, HonestAcceptanceIsOneMinusEpsC) {
  auto pc = make_dial_pc(profile(4, 8, 2, 6, 4), 2, {3, 3});
  EXPECT_EQ(honest_acceptance(pc, kYes, kYes), Probability::ratio(60, 64));
}

class SilentProver final : public ProverStrategy {
 public:
  explicit SilentProver(const PublicCoinSpec& s) : spec_(s) {}
  ProverMove respond(const Transcript& prefix, CoinSource&) override {
    return {BitString(spec_.proof_bits[prefix.size() / 2]), true};
  }

 private:
  const PublicCoinSpec& spec_;
};

TEST(RunProtocol, ConstantProverOnNoInstanceMatchesSoundness) {
  auto spec = as_public_coin(make_dial_nizk(profile(64, 128, 4)));
  SilentProver prover(spec);
  RngCoins coins(SeededRng(3).child("run"));
  const int n = 20000;
  int accepts = 0;
  for (int i = 0; i < n; ++i) accepts += run_protocol(spec, kNo, prover, coins).accept;
  EXPECT_NEAR(static_cast<double>(accepts) / n, 0.125, hoeffding_radius(n, 1e-6));
}

TEST(RunProtocol, WrongLengthIsScheduleError) {
  auto spec = as_public_coin(make_dial_nizk(profile(0, 0, 0)));
  class Short final : public ProverStrategy {
    ProverMove respond(const Transcript&, CoinSource&) override { return {BitString(3), false}; }
  } prover;
  RngCoins coins(1);
  EXPECT_THROW(run_protocol(spec, kYes, prover, coins), ScheduleError);
}

TEST(GraphIso, IsomorphicPairIsPerfect) {
  auto [g0, g1] = isomorphic_c4_pair();
  auto [h0, h1] = non_isomorphic_c4_pair();
  auto spec = make_graph_iso(g0, g1);
  auto x = encode_graph_pair(g0, g1);
  auto w = encode_witness(*find_isomorphism(g0, g1));
  auto prof = measure_error_profile(spec, x, w, encode_graph_pair(h0, h1));
  EXPECT_EQ(prof.eps_c, Probability::zero());
  EXPECT_EQ(prof.eps_z, Probability::zero());
  EXPECT_EQ(prof.eps_s, Probability::ratio(1, 2));
  EXPECT_TRUE(best_prover_acceptance(spec, encode_graph_pair(h0, h1)).exhaustive);
  EXPECT_EQ(spec.messages(), 3u);
  // eps_c + eps_s + (t-1) eps_z < 1
  EXPECT_LT(prof.eps_c.value() + prof.eps_s.value() + 2 * prof.eps_z.value(), 1);
}

TEST(GraphIso, HonestRunsAlwaysAccept) {
  auto [g0, g1] = isomorphic_c4_pair();
  auto spec = make_graph_iso(g0, g1);
  auto x = encode_graph_pair(g0, g1);
  HonestProver prover(spec, x, encode_witness(*find_isomorphism(g0, g1)));
  RngCoins coins(9);
  for (int i = 0; i < 200; ++i) EXPECT_TRUE(run_protocol(spec, x, prover, coins).accept);
}

TEST(GraphIso, SimulatorMatchesViewOnAllSmallPairs) {
  // Every isomorphic pair (g, relabeled g) over 4 vertices with a few edge sets.
  SeededRng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g(4);
    for (std::size_t u = 0; u < 4; ++u) {
      for (std::size_t v = u + 1; v < 4; ++v) {
        if (rng.below(2)) g.add_edge(u, v);
      }
    }
    auto phi = unrank_permutation(rng.below(24), 4);
    auto spec = make_graph_iso(g, g.permuted(phi));
    auto x = encode_graph_pair(g, g.permuted(phi));
    EXPECT_EQ(stat_distance(sim_distribution(spec, x), view_distribution(spec, x, encode_witness(phi))),
              Probability::zero());
  }
}

TEST(GraphIso, FiveVertexPairUsesExactSearchOrAnalyticWitness) {
  auto c5 = cycle_graph(5);
  Graph other(5);
  other.add_edge(0, 1);
  other.add_edge(1, 2);
  other.add_edge(2, 0);
  other.add_edge(2, 3);
  other.add_edge(3, 4);
  auto spec = make_graph_iso(c5, other);
  auto m = best_prover_acceptance(spec, encode_graph_pair(c5, other));
  EXPECT_EQ(m.value, Probability::ratio(1, 2));
}

TEST(GraphLoader, FixtureHoldsTwoFourCycles) {
  auto [g0, g1] = load_graph_pair(std::string(WZK_SOURCE_DIR) + "/data/c4_pair.graphs");
  EXPECT_EQ(g0, cycle_graph(4));
  EXPECT_EQ(g1.edge_count(), 4u);
  EXPECT_TRUE(find_isomorphism(g0, g1).has_value());
}

TEST(GraphLoader, EdgelessGraphs) {
  std::istringstream in("n 3\n--\nn 3\n");
  auto [g0, g1] = parse_graph_pair(in);
  EXPECT_EQ(g0.edge_count(), 0u);
  EXPECT_EQ(g1, Graph(3));
}

TEST(GraphLoader, ErrorsCarryLineNumbers) {
  std::istringstream loop("# c\nn 3\ne 1 1\n--\nn 3\n");
  try {
    parse_graph_pair(loop);
    FAIL() << "self-loop accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream dup("n 3\ne 0 1\ne 1 0\n--\nn 3\n");
  EXPECT_THROW(parse_graph_pair(dup), ParseError);
  std::istringstream range("n 3\ne 0 5\n--\nn 3\n");
  EXPECT_THROW(parse_graph_pair(range), ParseError);
  std::istringstream single("n 3\n");
  EXPECT_THROW(parse_graph_pair(single), ParseError);
}

TEST(GraphPerm, UnrankCoversAllPermutations) {
  std::set<Permutation> all;
  for (std::uint64_t i = 0; i < 24; ++i) all.insert(unrank_permutation(i, 4));
  EXPECT_EQ(all.size(), 24u);
  EXPECT_EQ(unrank_permutation(0, 4), (Permutation{0, 1, 2, 3}));
  auto p = unrank_permutation(17, 4);
  EXPECT_EQ(decode_permutation(encode_permutation(p), 4), p);
}

}  // namespace
}  // namespace wzk
