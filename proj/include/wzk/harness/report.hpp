#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wzk/harness/experiment.hpp"

namespace wzk {

// Columns of the csv report. Bump when the column list changes.
inline constexpr int kCsvVersion = 1;
inline constexpr const char* kCsvHeader =
    "csv_version,config_hash,construction,mode,seed,arm,relation,trials,hits,fallbacks,estimate,radius,"
    "exact,bound,bound_exact,verdict";

inline Direction parse_direction(const std::string& s) {
  if (s == "ge") return Direction::AtLeast;
  if (s == "le") return Direction::AtMost;
  throw ConfigError("unknown relation '" + s + "'");
}

namespace detail {

inline nlohmann::json opt_json(const std::optional<std::string>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<std::string> opt_string(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

// Shortest text that reads back as the same double.
inline std::string fmt_double(double v) {
  for (int digits : {15, 16, 17}) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    if (digits == 17 || std::stod(os.str()) == v) return os.str();
  }
  return {};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["schema_version"] = r.schema_version;
  j["config"] = r.config;
  j["config_hash"] = r.config_hash;
  j["construction"] = r.construction;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["profile"] = {{"eps_c", r.eps_c}, {"eps_s", r.eps_s}, {"eps_z", r.eps_z}};
  j["arms"] = nlohmann::json::array();
  for (const auto& a : r.arms) {
    j["arms"].push_back({{"name", a.name},
                         {"relation", to_string(a.relation)},
                         {"trials", a.trials},
                         {"hits", a.hits},
                         {"fallbacks", a.fallbacks},
                         {"estimate", a.estimate},
                         {"radius", a.radius},
                         {"exact", detail::opt_json(a.exact)},
                         {"bound", a.bound},
                         {"bound_exact", detail::opt_json(a.bound_exact)},
                         {"verdict", a.verdict}});
  }
  j["metrics"] = nlohmann::json::array();
  for (const auto& m : r.metrics) {
    j["metrics"].push_back({{"name", m.name}, {"value", m.value}, {"exact", detail::opt_json(m.exact)}});
  }
  j["verdict"] = r.verdict;
  return j;
}

inline ExperimentResult result_from_json(const nlohmann::json& j) {
  ExperimentResult r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kResultSchemaVersion) {
    throw ConfigError("result schema version " + std::to_string(r.schema_version) + " is not supported");
  }
  r.config = j.at("config").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.construction = j.at("construction").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.eps_c = j.at("profile").at("eps_c").get<std::string>();
  r.eps_s = j.at("profile").at("eps_s").get<std::string>();
  r.eps_z = j.at("profile").at("eps_z").get<std::string>();
  for (const auto& ja : j.at("arms")) {
    Arm a;
    a.name = ja.at("name").get<std::string>();
    a.relation = parse_direction(ja.at("relation").get<std::string>());
    a.trials = ja.at("trials").get<std::uint64_t>();
    a.hits = ja.at("hits").get<std::uint64_t>();
    a.fallbacks = ja.at("fallbacks").get<std::uint64_t>();
    a.estimate = ja.at("estimate").get<double>();
    a.radius = ja.at("radius").get<double>();
    a.exact = detail::opt_string(ja.at("exact"));
    a.bound = ja.at("bound").get<double>();
    a.bound_exact = detail::opt_string(ja.at("bound_exact"));
    a.verdict = ja.at("verdict").get<std::string>();
    r.arms.push_back(std::move(a));
  }
  for (const auto& jm : j.at("metrics")) {
    Metric m;
    m.name = jm.at("name").get<std::string>();
    m.value = jm.at("value").get<double>();
    m.exact = detail::opt_string(jm.at("exact"));
    r.metrics.push_back(std::move(m));
  }
  r.verdict = j.at("verdict").get<std::string>();
  return r;
}

inline std::string render_json(const ExperimentResult& r) { return to_json(r).dump(2) + "\n"; }

inline std::string render_csv(const ExperimentResult& r) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& a : r.arms) {
    out += std::to_string(kCsvVersion) + "," + r.config_hash + "," + r.construction + "," + r.mode + "," +
           std::to_string(r.seed) + "," + detail::csv_field(a.name) + "," + to_string(a.relation) + "," +
           std::to_string(a.trials) + "," + std::to_string(a.hits) + "," + std::to_string(a.fallbacks) + "," +
           detail::fmt_double(a.estimate) + "," + detail::fmt_double(a.radius) + "," + a.exact.value_or("") + "," +
           detail::fmt_double(a.bound) + "," + a.bound_exact.value_or("") + "," + a.verdict + "\n";
  }
  return out;
}

// Aligned table for reading in a terminal.
inline std::string render_tsv_table(const ExperimentResult& r) {
  std::ostringstream os;
  os << "# " << r.construction << " mode=" << r.mode << " seed=" << r.seed << " profile=(" << r.eps_c << ", "
     << r.eps_s << ", " << r.eps_z << ")\n";
  os << "arm\trelation\testimate\tradius\texact\tbound\tverdict\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& a : r.arms) {
    os << a.name << '\t' << (a.relation == Direction::AtLeast ? ">=" : "<=") << '\t' << a.estimate << '\t'
       << a.radius << '\t' << a.exact.value_or("-") << '\t' << a.bound;
    if (a.bound_exact) os << " (" << *a.bound_exact << ")";
    os << '\t' << a.verdict << '\n';
  }
  for (const auto& m : r.metrics) {
    os << "metric\t" << m.name << '\t' << m.value;
    if (m.exact) os << " (" << *m.exact << ")";
    os << '\n';
  }
  os << "verdict\t" << r.verdict << '\n';
  return os.str();
}

inline std::string render(const ExperimentResult& r, const std::string& format) {
  if (format == "json") return render_json(r);
  if (format == "csv") return render_csv(r);
  if (format == "tsv-table") return render_tsv_table(r);
  throw ConfigError("unknown output format '" + format + "'");
}

inline std::string format_extension(const std::string& format) {
  if (format == "tsv-table") return "tsv";
  return format;
}

inline std::string render_trials_csv(const std::vector<TrialRecord>& trials) {
  std::string out = "arm,trial,accept,fallback\n";
  for (const auto& t : trials) {
    out += t.arm + "," + std::to_string(t.index) + "," + (t.accept ? "1" : "0") + "," + (t.fallback ? "1" : "0") +
           "\n";
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// <out>/<config hash>/: result.json always, the requested format, trials.csv
// and the config echo. Returns the directory.
inline std::filesystem::path persist(const ExperimentRun& run, const std::filesystem::path& out_dir,
                                     const std::string& format) {
  const auto dir = out_dir / run.result.config_hash;
  std::filesystem::create_directories(dir);
  write_file(dir / "result.json", render_json(run.result));
  if (format != "json") write_file(dir / ("result." + format_extension(format)), render(run.result, format));
  write_file(dir / "trials.csv", render_trials_csv(run.trials));
  write_file(dir / "config.cfg", run.result.config);
  return dir;
}

inline ExperimentResult load_result(const std::filesystem::path& path) {
  auto p = path;
  if (std::filesystem::is_directory(p)) p /= "result.json";
  try {
    return result_from_json(nlohmann::json::parse(read_file(p)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed result file '" + p.string() + "': " + e.what());
  }
}

}  // namespace wzk
