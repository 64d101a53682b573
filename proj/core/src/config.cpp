#include "rnf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rnf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double_or_throw(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path.string());
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  return parse_double_or_throw(key, it->second);
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  if (v < 0.0 || v != std::floor(v)) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + s + "' as an unsigned integer");
  }
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a boolean");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return {};
  std::string s = it->second;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_double_or_throw(key, token));
  return out;
}

std::vector<std::size_t> KeyValueConfig::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const double v : get_doubles(key)) {
    if (v < 0.0 || v != std::floor(v)) {
      throw ConfigError("config key '" + key + "': expected non-negative integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void KeyValueConfig::require_known(const std::vector<std::string>& known) const {
  std::string unknown;
  for (const auto& [key, value] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  }
  return out;
}

}  // namespace rnf
