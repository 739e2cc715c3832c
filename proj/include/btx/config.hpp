#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace btx {

/// Flat `key = value` settings. `#` starts a comment line; blank lines are
/// ignored. Values set later (command-line flags) override file values.
/// Errors name the file and line the bad value came from.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source);
  static Config load(const std::filesystem::path& path);

  /// Override from the command line; errors then cite `origin`.
  void set(const std::string& key, const std::string& value, const std::string& origin = "command line");
  /// Merges `other` on top of this config.
  void merge(const Config& other);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::uint64_t> get_uint_list(const std::string& key, std::span<const std::uint64_t> fallback) const;

  /// Throws if any key is outside `known`.
  void check_keys(std::span<const std::string_view> known) const;

  /// key -> value, sorted by key.
  std::map<std::string, std::string> values() const;

 private:
  struct Entry {
    std::string value;
    std::string origin;  // "file:line" or "command line"
  };
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
};

}  // namespace btx
