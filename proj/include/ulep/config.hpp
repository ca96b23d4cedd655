#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ulep/common.hpp"

namespace ulep {

/// Flat dotted-key configuration (`grid.rho = 1.1`), kept as sorted text so
/// an experiment's provenance diffs line by line.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(t.substr(0, eq));
      std::string value = trim(t.substr(eq + 1));
      if (key.empty())
        throw ParseError("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileMissing("config file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write config: " + path);
    out << serialize();
    if (!out) throw IoFailure("write failed: " + path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set_double(const std::string& key, double v) { set(key, format_double(v)); }
  void set_size(const std::string& key, std::size_t v) { set(key, std::to_string(v)); }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigInvalid("missing config key: " + key);
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long long get_int(const std::string& key) const {
    const std::string s = get_string(key);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      throw ConfigInvalid("config key " + key + ": not an integer: " + s);
    }
    if (used != s.size()) throw ConfigInvalid("config key " + key + ": not an integer: " + s);
    return v;
  }
  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::size_t get_size(const std::string& key) const {
    long long v = get_int(key);
    if (v < 0) throw ConfigInvalid("config key " + key + ": must be nonnegative");
    return static_cast<std::size_t>(v);
  }
  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    return has(key) ? get_size(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigInvalid("config key " + key + ": not a boolean: " + s);
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : split_csv(get_string(key)))
      out.push_back(to_double(key, part));
    return out;
  }
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? get_doubles(key) : fallback;
  }

  std::vector<std::size_t> get_sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const std::string& part : split_csv(get_string(key))) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(part, &used);
      } catch (const std::exception&) {
        throw ConfigInvalid("config key " + key + ": not an integer list entry: " + part);
      }
      if (used != part.size() || v < 0)
        throw ConfigInvalid("config key " + key + ": not a nonnegative integer: " + part);
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }
  std::vector<std::size_t> get_sizes(const std::string& key,
                                     std::vector<std::size_t> fallback) const {
    return has(key) ? get_sizes(key) : fallback;
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

  static std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }

  static std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) parts.push_back(trim(cur));
    return parts;
  }

  static double to_double(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigInvalid("config key " + key + ": not a number: " + s);
    }
    if (used != s.size()) throw ConfigInvalid("config key " + key + ": not a number: " + s);
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace ulep
