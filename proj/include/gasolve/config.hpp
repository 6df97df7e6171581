#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gasolve {

/// Flat `key = value` configuration. Lines starting with '#' are comments.
/// Every key must be known (see known_keys()) or match
/// `mixture.<k>.{weight,mean,var}`.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  /// Explicit value, else the built-in default. Missing required keys
  /// raise a config error naming the key.
  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  void require(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  /// Canonical `key=value` lines of the explicit entries, sorted by key.
  std::string echo() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Known keys and their defaults; an empty default marks a key with no
/// default (required by the commands that use it).
const std::map<std::string, std::string>& known_keys();

bool is_known_key(const std::string& key);

std::string format_double(double v);
std::string format_doubles(const std::vector<double>& v);
double parse_double(std::string_view text, const std::string& what);
std::vector<double> parse_doubles(std::string_view text, const std::string& what);

}  // namespace gasolve
