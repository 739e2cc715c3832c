#include "btx/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "btx/error.hpp"
#include "btx/preprocess.hpp"

namespace btx {

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string t = normalize_whitespace(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string origin = source + ":" + std::to_string(n);
    if (eq == std::string::npos) throw FormatError(origin + ": expected key = value");
    std::string key = normalize_whitespace(t.substr(0, eq));
    std::string value = normalize_whitespace(t.substr(eq + 1));
    if (key.empty()) throw FormatError(origin + ": empty key");
    if (c.has(key)) throw FormatError(origin + ": duplicate key '" + key + "'");
    c.entries_[key] = {value, origin};
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in, path.string());
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  entries_[key] = {value, origin};
}

void Config::merge(const Config& other) {
  for (const auto& [k, e] : other.entries_) entries_[k] = e;
}

void Config::fail(const std::string& key, const std::string& what) const {
  const auto& e = entries_.at(key);
  throw FormatError(e.origin + ": " + key + ": " + what + " (got '" + e.value + "')");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const auto& s = it->second.value;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) fail(key, "expected a number");
  return v;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const auto& s = it->second.value;
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) fail(key, "expected a non-negative integer");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const auto& s = it->second.value;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(key, "expected true or false");
}

std::vector<std::uint64_t> Config::get_uint_list(const std::string& key,
                                                 std::span<const std::uint64_t> fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return {fallback.begin(), fallback.end()};
  std::vector<std::uint64_t> out;
  std::stringstream ss(it->second.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = normalize_whitespace(item);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size()) {
      fail(key, "expected a comma-separated list of integers");
    }
    out.push_back(v);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

void Config::check_keys(std::span<const std::string_view> known) const {
  for (const auto& [k, e] : entries_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw FormatError(e.origin + ": unknown key '" + k + "'");
    }
  }
}

std::map<std::string, std::string> Config::values() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, e] : entries_) out[k] = e.value;
  return out;
}

}  // namespace btx
