#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnf {

/// Raised for anything the user can fix in a config file or flag; the CLI
/// maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text with dotted section prefixes and '#' comments.
/// Values keep their raw text; typed getters parse on access and report
/// the offending key on failure.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::filesystem::path& path);
  static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return entries_.contains(key); }
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;       // whitespace/comma separated
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  /// Throws ConfigError naming every key not in `known`.
  void require_known(const std::vector<std::string>& known) const;

  /// Deterministic `key = value` rendering, sorted by key.
  std::string serialize() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace rnf
