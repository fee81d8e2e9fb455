#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wzk/harness/report.hpp"

namespace {

using namespace wzk;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::string format = "tsv-table";
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c, bool needs_config = true) {
  auto* opt = app->add_option("--config", c.config_path, "experiment config file");
  if (needs_config) opt->required();
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--trials", c.trials, "Monte Carlo trials per arm");
  app->add_option("--mode", c.mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  app->add_option("--out", c.out, "output directory");
  app->add_option("--format", c.format, "json, csv or tsv-table")
      ->check(CLI::IsMember({"json", "csv", "tsv-table"}));
  app->add_option("--set", c.sets, "override a config key (key=value)");
}

KeyValueConfig load_config(const Common& c) {
  KeyValueConfig cfg = KeyValueConfig::load(c.config_path);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) cfg.set("run.seed", std::to_string(*c.seed));
  if (c.trials) cfg.set("run.trials", std::to_string(*c.trials));
  if (c.mode) cfg.set("run.mode", *c.mode);
  if (c.out) cfg.set("output.dir", *c.out);
  cfg.set("output.format", c.format);
  return cfg;
}

void emit(const ExperimentRun& run, const KeyValueConfig& cfg) {
  const auto format = cfg.get_or("output.format", "tsv-table");
  std::cout << render(run.result, format);
  if (cfg.has("output.dir")) {
    const auto dir = persist(run, cfg.get("output.dir"), format);
    std::cerr << "wrote " << dir.string() << "\n";
  }
  std::cerr << "wall time " << run.wall_seconds << " s\n";
}

int exit_code(const ExperimentResult& r) { return r.verdict == kViolated ? 2 : 0; }

int cmd_measure(const Common& c) {
  auto cfg = load_config(c);
  Experiment ex(cfg);
  const auto prof = measure_profile(ex.setup(), ex.budget());
  if (c.format == "json") {
    nlohmann::json j = {{"protocol", cfg.get_or("protocol.kind", "dial-nizk")},
                        {"eps_c", prof.eps_c.str()},
                        {"eps_s", prof.eps_s.str()},
                        {"eps_z", prof.eps_z.str()}};
    std::cout << j.dump(2) << "\n";
  } else if (c.format == "csv") {
    std::cout << "eps_c,eps_s,eps_z\n" << prof.eps_c.str() << "," << prof.eps_s.str() << "," << prof.eps_z.str()
              << "\n";
  } else {
    std::cout << "eps_c\t" << prof.eps_c.str() << "\t" << prof.eps_c.to_double() << "\n"
              << "eps_s\t" << prof.eps_s.str() << "\t" << prof.eps_s.to_double() << "\n"
              << "eps_z\t" << prof.eps_z.str() << "\t" << prof.eps_z.to_double() << "\n";
  }
  return 0;
}

// Candidate function of the configured construction on one instance.
CandidateFunction candidate(const Experiment& ex, const KeyValueConfig& cfg, bool yes, std::size_t level,
                            std::shared_ptr<CrStack>& keep) {
  const auto& s = ex.setup();
  const BitString& x = yes ? s.x_yes : s.x_no;
  const auto construction = cfg.get_or("construction", "nizk");
  auto pc = [&] {
    if (s.public_coin()) return yes ? *s.pc_yes : *s.pc_no;
    return as_public_coin(*s.nizk);
  };
  if (construction == "nizk") return nizk_candidate(*s.nizk, x);
  if (construction == "rv") return rv_candidate(*s.nizk, x, ex.params().q);
  if (construction == "pc") return pc_candidate(pc(), x);
  if (construction == "cr") {
    keep = std::make_shared<CrStack>(
        pc(), x, ex.params(),
        [&](std::size_t lv, const CandidateFunction& f) { return make_inverter(cfg, f, lv, ex.budget()); },
        ex.budget());
    return keep->function(level);
  }
  throw ConfigError("construction '" + construction + "' has no candidate function");
}

int cmd_construct(const Common& c, const std::string& instance, std::size_t level, std::uint64_t limit) {
  auto cfg = load_config(c);
  Experiment ex(cfg);
  std::shared_ptr<CrStack> keep;
  const auto f = candidate(ex, cfg, instance == "yes", level, keep);
  const auto card = f.domain.cardinality();
  if (!card && limit == 0) throw BudgetError("domain cardinality overflows 64 bits; pass --limit for sampled rows");
  if (card && limit == 0 && *card > ex.budget().max_assignments) {
    throw BudgetError("domain too large to dump; pass --limit");
  }
  // Past 64 bits the rows are seeded samples rather than a prefix of the table.
  const std::uint64_t rows = limit == 0 ? *card : (card ? std::min(*card, limit) : limit);
  RngCoins coins(SeededRng(cfg.get_u64_or("run.seed", 1)).child("construct"));
  std::ostringstream os;
  for (const auto& comp : f.domain.components()) os << comp.name << ",";
  os << "output\n";
  for (std::uint64_t u = 0; u < rows; ++u) {
    const Input in = card ? f.domain.unrank(u) : f.domain.sample(coins);
    for (auto v : in) os << v << ",";
    os << "\"" << describe(f(in)) << "\"\n";
  }
  if (c.out) {
    std::filesystem::create_directories(*c.out);
    const auto path = std::filesystem::path(*c.out) / (f.label + "_" + instance + ".csv");
    write_file(path, os.str());
    std::cerr << "wrote " << path.string() << " (" << rows << " rows)\n";
  } else {
    std::cout << os.str();
  }
  return 0;
}

int cmd_invert(const Common& c, const std::string& instance, std::size_t level) {
  auto cfg = load_config(c);
  Experiment ex(cfg);
  std::shared_ptr<CrStack> keep;
  const auto f = candidate(ex, cfg, instance == "yes", level, keep);
  InverterPtr inv = keep ? keep->inverter(level) : make_inverter(cfg, f, std::nullopt, ex.budget());
  const auto mode = cfg.get_or("run.mode", "mc");
  const SeededRng rng = SeededRng(cfg.get_u64_or("run.seed", 1)).child("deviation");
  DeviationReport rep = mode == "exact" ? measure_deviation_exact(*inv, ex.budget())
                                        : measure_deviation_mc(*inv, cfg.get_u64_or("run.trials", 2000), rng);
  nlohmann::json j = {{"inverter", inv->kind()},
                      {"method", rep.method},
                      {"success_rate", rep.success_rate},
                      {"deviation", rep.deviation},
                      {"trials", rep.trials},
                      {"radius", rep.radius}};
  if (rep.exact_success) j["exact_success"] = rep.exact_success->str();
  if (rep.exact_deviation) j["exact_deviation"] = rep.exact_deviation->str();
  if (c.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    const char sep = c.format == "csv" ? ',' : '\t';
    std::cout << "inverter" << sep << "method" << sep << "success_rate" << sep << "deviation" << sep << "radius"
              << sep << "exact_deviation\n"
              << inv->kind() << sep << rep.method << sep << rep.success_rate << sep << rep.deviation << sep
              << rep.radius << sep << (rep.exact_deviation ? rep.exact_deviation->str() : "-") << "\n";
  }
  return 0;
}

int cmd_reduce(const Common& c) {
  auto cfg = load_config(c);
  if (cfg.get_or("construction", "nizk") == "decider") throw ConfigError("use the decide subcommand for deciders");
  auto run = run_experiment(cfg);
  emit(run, cfg);
  return exit_code(run.result);
}

int cmd_decide(const Common& c) {
  auto cfg = load_config(c);
  const auto construction = cfg.get_or("construction", "nizk");
  if (construction != "decider") {
    if (!cfg.has("decider.reduction")) cfg.set("decider.reduction", construction);
    cfg.set("construction", "decider");
  }
  auto run = run_experiment(cfg);
  emit(run, cfg);
  return exit_code(run.result);
}

int cmd_report(const std::string& in, const Common& c) {
  const auto r = load_result(in);
  const auto text = render(r, c.format);
  if (c.out) {
    std::filesystem::create_directories(*c.out);
    const auto path = std::filesystem::path(*c.out) / ("result." + format_extension(c.format));
    write_file(path, text);
    std::cerr << "wrote " << path.string() << "\n";
  } else {
    std::cout << text;
  }
  return exit_code(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak zero-knowledge to one-way function reductions, measured"};
  app.require_subcommand(1);

  Common measure_c, construct_c, invert_c, reduce_c, decide_c, report_c;
  std::string instance = "yes";
  std::size_t level = 1;
  std::uint64_t limit = 0;
  std::string report_in;

  auto* measure = app.add_subcommand("measure", "exact error profile of the configured protocol");
  add_common(measure, measure_c);
  auto* construct = app.add_subcommand("construct", "dump the candidate function's truth table as csv");
  add_common(construct, construct_c);
  construct->add_option("--instance", instance, "yes or no")->check(CLI::IsMember({"yes", "no"}));
  construct->add_option("--level", level, "level of the constant-round stack");
  construct->add_option("--limit", limit, "dump at most this many rows (0 = all)");
  auto* invert = app.add_subcommand("invert", "deviation report of the configured inverter");
  add_common(invert, invert_c);
  invert->add_option("--instance", instance, "yes or no")->check(CLI::IsMember({"yes", "no"}));
  invert->add_option("--level", level, "level of the constant-round stack");
  auto* reduce = app.add_subcommand("reduce", "run a bound experiment");
  add_common(reduce, reduce_c);
  auto* decide = app.add_subcommand("decide", "run a one-sided decider experiment");
  add_common(decide, decide_c);
  auto* report = app.add_subcommand("report", "re-emit a persisted result");
  add_common(report, report_c, false);
  report->add_option("--in", report_in, "result directory or result.json")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*measure) return cmd_measure(measure_c);
    if (*construct) return cmd_construct(construct_c, instance, level, limit);
    if (*invert) return cmd_invert(invert_c, instance, level);
    if (*reduce) return cmd_reduce(reduce_c);
    if (*decide) return cmd_decide(decide_c);
    if (*report) return cmd_report(report_in, report_c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
