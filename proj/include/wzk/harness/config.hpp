#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wzk/dist/rational.hpp"
#include "wzk/errors.hpp"

namespace wzk {

// Flat "section.key = value" text. Blank lines and lines starting with '#'
// are ignored; keys are unique.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& origin = "<config>") {
    KeyValueConfig out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto text = trim(line);
      if (text.empty() || text[0] == '#') continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      const auto key = trim(text.substr(0, eq));
      const auto value = trim(text.substr(eq + 1));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) {
          throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad character in key '" + key + "'");
        }
      }
      if (!out.values_.emplace(key, value).second) {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      }
    }
    return out;
  }

  static KeyValueConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::uint64_t get_u64(const std::string& key) const { return to_u64(key, get(key)); }
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
  }

  Rational get_rational(const std::string& key) const {
    try {
      return parse_rational(get(key));
    } catch (const Error&) {
      throw ConfigError("config key '" + key + "': '" + get(key) + "' is not a rational number");
    }
  }
  Rational get_rational_or(const std::string& key, const Rational& fallback) const {
    return has(key) ? get_rational(key) : fallback;
  }

  bool get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
  }

  std::vector<std::uint64_t> get_u64_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_u64(key, trim(item)));
    return out;
  }

  // Keys outside the allowed set (exact names or "prefix.*" patterns).
  std::vector<std::string> unknown_keys(const std::set<std::string>& allowed) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
      bool ok = allowed.count(k) != 0;
      for (const auto& a : allowed) {
        if (a.size() > 2 && a.compare(a.size() - 2, 2, ".*") == 0 && k.rfind(a.substr(0, a.size() - 1), 0) == 0) {
          ok = true;
        }
      }
      if (!ok) out.push_back(k);
    }
    return out;
  }

  // Canonical text: sorted keys, one "key = value" per line.
  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  friend bool operator==(const KeyValueConfig&, const KeyValueConfig&) = default;

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::uint64_t to_u64(const std::string& key, const std::string& text) {
    try {
      std::size_t used = 0;
      const int base = text.rfind("0x", 0) == 0 ? 16 : 10;
      const auto v = std::stoull(text, &used, base);
      if (used != text.size() || text.empty() || text[0] == '-') throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': '" + text + "' is not an unsigned integer");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace wzk
