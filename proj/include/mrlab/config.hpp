#pragma once

// Minimal key = value configuration reader used by the command-line driver.
//
// Format: one `key = value` pair per line.  `#` starts a comment anywhere in
// a line; blank lines are ignored.  Keys match [A-Za-z_][A-Za-z0-9_]* and may
// not repeat.  List values are comma- and/or whitespace-separated tokens.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrlab {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_')) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace detail

class Config {
 public:
  static Config from_string(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (!detail::valid_key(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": invalid key `" + key + "`");
      if (value.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty value for `" + key + "`");
      if (!cfg.kv_.emplace(key, value).second)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key `" + key + "`");
    }
    return cfg;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file `" + path + "`");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  /// Sorted key -> raw-value view, used for the deterministic JSON echo.
  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string get_string(const std::string& key) const { return raw(key); }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
  }

  double get_double(const std::string& key) const { return parse_double(key, raw(key)); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long long get_int(const std::string& key) const { return parse_int(key, raw(key)); }
  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  bool get_bool(const std::string& key) const {
    std::string v = raw(key);
    for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(origin_ + ": key `" + key + "`: cannot parse `" + raw(key) + "` as a boolean");
  }
  bool get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& tok : tokens(raw(key))) out.push_back(parse_double(key, tok));
    return out;
  }
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fb) const {
    return has(key) ? get_doubles(key) : fb;
  }

  std::vector<long long> get_ints(const std::string& key) const {
    std::vector<long long> out;
    for (const std::string& tok : tokens(raw(key))) out.push_back(parse_int(key, tok));
    return out;
  }
  std::vector<long long> get_ints(const std::string& key, const std::vector<long long>& fb) const {
    return has(key) ? get_ints(key) : fb;
  }

  /// Rejects keys outside the allowed set, so typos fail loudly instead of
  /// silently reverting to defaults.
  void require_known(const std::set<std::string>& allowed) const {
    std::string bad;
    for (const auto& [k, v] : kv_)
      if (!allowed.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    if (!bad.empty()) throw ConfigError(origin_ + ": unknown key(s): " + bad);
  }

 private:
  std::string origin_ = "<empty>";
  std::map<std::string, std::string> kv_;

  const std::string& raw(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError(origin_ + ": missing required key `" + key + "`");
    return it->second;
  }

  static std::vector<std::string> tokens(std::string v) {
    for (char& c : v)
      if (c == ',') c = ' ';
    std::istringstream in(v);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }

  double parse_double(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError(origin_ + ": key `" + key + "`: cannot parse `" + v + "` as a real");
    return x;
  }

  long long parse_int(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError(origin_ + ": key `" + key + "`: cannot parse `" + v + "` as an integer");
    return x;
  }
};

}  // namespace mrlab
