#include <filesystem>

#include <gtest/gtest.h>

#include "wzk/harness/report.hpp"

namespace wzk {
namespace {

const std::string kSource = WZK_SOURCE_DIR;

KeyValueConfig small_dial(const std::string& construction) {
  return KeyValueConfig::parse_string(
      "protocol.kind = dial-nizk\n"
      "protocol.eps_c = 1/16\n"
      "protocol.eps_s = 1/8\n"
      "protocol.eps_z = 1/4\n"
      "protocol.m = 6\n"
      "protocol.ell_z = 2\n"
      "construction = " + construction + "\n"
      "run.seed = 5\n");
}

// --- config -------------------------------------------------------------------

TEST(Config, ParsesCommentsAndWhitespace) {
  auto cfg = KeyValueConfig::parse_string("# header\n\n  a.b = 1/2 \nc=0x10\nlist = 1, 2,3\n");
  EXPECT_EQ(cfg.get("a.b"), "1/2");
  EXPECT_EQ(cfg.get_rational("a.b"), make_rational(1, 2));
  EXPECT_EQ(cfg.get_u64("c"), 16u);
  EXPECT_EQ(cfg.get_u64_list("list"), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(cfg.get_or("missing", "x"), "x");
}

TEST(Config, ErrorsNameTheLine) {
  try {
    KeyValueConfig::parse_string("a = 1\nb\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  EXPECT_THROW(KeyValueConfig::parse_string("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse_string("a b = 1\n"), ConfigError);
  auto cfg = KeyValueConfig::parse_string("n = -3\nr = half\n");
  EXPECT_THROW(cfg.get_u64("n"), ConfigError);
  EXPECT_THROW(cfg.get_rational("r"), ConfigError);
  EXPECT_THROW(cfg.get("absent"), ConfigError);
}

TEST(Config, SerializationRoundTrips) {
  auto cfg = KeyValueConfig::load(kSource + "/configs/gi_k2.cfg");
  auto again = KeyValueConfig::parse_string(cfg.serialize());
  EXPECT_EQ(cfg, again);
  EXPECT_EQ(cfg.serialize(), again.serialize());
}

TEST(Config, UnknownKeysAreRejected) {
  auto cfg = small_dial("nizk");
  cfg.set("inverter.level.2.kind", "null");
  EXPECT_TRUE(cfg.unknown_keys(config_schema()).empty());
  cfg.set("params.qq", "4");
  EXPECT_THROW(Experiment{cfg}, ConfigError);
}

TEST(Config, GridCapRejected) {
  auto cfg = small_dial("cr");
  cfg.set("protocol.kind", "dial-pc");
  cfg.set("protocol.k", "3");
  cfg.set("protocol.m_list", "2,2,2");
  cfg.set("params.q", "2048");
  EXPECT_THROW(Experiment{cfg}, GridError);
  cfg.set("params.q", "1024");
  EXPECT_NO_THROW(Experiment{cfg});
}

TEST(Config, GraphPairsFromFiles) {
  auto cfg = KeyValueConfig::parse_string("protocol.kind = graph-iso\nconstruction = pc\n");
  cfg.set("graphs.yes", kSource + "/data/c4_pair.graphs");
  cfg.set("graphs.no", kSource + "/data/c4_paw.graphs");
  Experiment ex(cfg);
  auto [g0, g1] = non_isomorphic_c4_pair();
  EXPECT_EQ(ex.setup().x_no, encode_graph_pair(g0, g1));
  cfg.set("graphs.no", kSource + "/data/c4_pair.graphs");
  EXPECT_THROW(Experiment{cfg}, ConfigError);
}

// --- verdicts -------------------------------------------------------------------

TEST(Verdict, MonteCarloViolatesOnlyOutsideTheBand) {
  Arm a;
  a.relation = Direction::AtMost;
  a.trials = 100;
  a.bound = 0.5;
  a.radius = 0.1;
  a.estimate = 0.55;
  EXPECT_EQ(judge(a, std::nullopt, std::nullopt), kHolds);
  a.estimate = 0.61;
  EXPECT_EQ(judge(a, std::nullopt, std::nullopt), kViolated);
  a.relation = Direction::AtLeast;
  EXPECT_EQ(judge(a, std::nullopt, std::nullopt), kHolds);
  a.trials = 0;
  EXPECT_EQ(judge(a, std::nullopt, std::nullopt), kInconclusive);
}

TEST(Verdict, ExactComparesRationals) {
  Arm a;
  a.relation = Direction::AtLeast;
  EXPECT_EQ(judge(a, make_rational(11, 16), make_rational(11, 16)), kHolds);
  EXPECT_EQ(judge(a, make_rational(10, 16), make_rational(11, 16)), kViolated);
  std::vector<Arm> arms(2);
  arms[0].verdict = kHolds;
  arms[1].verdict = kInconclusive;
  EXPECT_EQ(overall_verdict(arms), kInconclusive);
  arms[0].verdict = kViolated;
  EXPECT_EQ(overall_verdict(arms), kViolated);
}

// --- experiments ------------------------------------------------------------------

TEST(Experiment, ExactModeWithoutTrialsCarriesOnlyExactValues) {
  auto cfg = small_dial("nizk");
  cfg.set("run.mode", "exact");
  cfg.set("run.trials", "0");
  auto run = run_experiment(cfg);
  EXPECT_TRUE(run.trials.empty());
  for (const auto& a : run.result.arms) {
    EXPECT_EQ(a.trials, 0u);
    EXPECT_TRUE(a.exact.has_value());
    EXPECT_EQ(a.verdict, kHolds);
  }
  EXPECT_EQ(run.result.arm("no").exact, "1/8");
  EXPECT_EQ(run.result.eps_z, "1/4");
}

TEST(Experiment, OffGridDialRequestIsRejected) {
  auto cfg = small_dial("nizk");
  cfg.set("protocol.eps_z", "1/3");
  EXPECT_THROW(Experiment{cfg}, GridError);
}

TEST(Experiment, ReproducibleAcrossRunsAndThreadCounts) {
  auto cfg = small_dial("pc");
  cfg.set("run.trials", "400");
  auto a = run_experiment(cfg);
  auto b = run_experiment(cfg);
  cfg.set("run.threads", "3");
  auto c = run_experiment(cfg);
  EXPECT_EQ(a.result, b.result);
  // Only the config echo mentions the thread count.
  EXPECT_EQ(a.result.config_hash, c.result.config_hash);
  c.result.config = a.result.config;
  EXPECT_EQ(a.result, c.result);
  ASSERT_EQ(a.trials.size(), c.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].accept, c.trials[i].accept);
  EXPECT_EQ(render_csv(a.result), render_csv(c.result));
  cfg.set("run.seed", "6");
  EXPECT_NE(run_experiment(cfg).result.config_hash, a.result.config_hash);
}

TEST(Experiment, DeciderSeparatesDialInstances) {
  auto cfg = small_dial("decider");
  cfg.set("run.mode", "exact");
  auto r = run_experiment(cfg).result;
  EXPECT_EQ(r.verdict, kHolds);
  EXPECT_EQ(r.arm("yes").exact, "15/16");
}

TEST(Experiment, BundledGraphIsoConfigHolds) {
  auto cfg = KeyValueConfig::load(kSource + "/configs/gi_k2.cfg");
  cfg.set("run.trials", "1500");
  auto r = run_experiment(cfg).result;
  EXPECT_EQ(r.arm("yes").verdict, kHolds);
  EXPECT_EQ(r.arm("no").verdict, kHolds);
  EXPECT_EQ(r.verdict, kHolds);
}

// --- reports ---------------------------------------------------------------------

TEST(Report, JsonRoundTripAndByteStability) {
  auto cfg = small_dial("nizk");
  cfg.set("run.trials", "300");
  auto run = run_experiment(cfg);
  auto text = render_json(run.result);
  EXPECT_EQ(result_from_json(nlohmann::json::parse(text)), run.result);
  EXPECT_EQ(text, render_json(run_experiment(cfg).result));
}

TEST(Report, CsvAndTableFormats) {
  auto cfg = small_dial("nizk");
  cfg.set("run.mode", "exact");
  auto r = run_experiment(cfg).result;
  auto csv = render_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_NE(csv.find("yes,ge"), std::string::npos);
  auto table = render_tsv_table(r);
  EXPECT_NE(table.find("(11/16)"), std::string::npos);  // bound next to the estimate
  EXPECT_THROW(render(r, "xml"), ConfigError);
}

TEST(Report, PersistAndReload) {
  auto cfg = small_dial("nizk");
  cfg.set("run.trials", "50");
  auto run = run_experiment(cfg);
  const auto root = std::filesystem::temp_directory_path() / "wzk_harness_test";
  std::filesystem::remove_all(root);
  auto dir = persist(run, root, "csv");
  EXPECT_EQ(dir.filename().string(), run.result.config_hash);
  EXPECT_TRUE(std::filesystem::exists(dir / "result.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "trials.csv"));
  EXPECT_EQ(load_result(dir), run.result);
  const auto first = read_file(dir / "result.json");
  persist(run_experiment(cfg), root, "csv");
  EXPECT_EQ(read_file(dir / "result.json"), first);
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace wzk
