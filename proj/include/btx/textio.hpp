#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btx/bitext.hpp"
#include "btx/preprocess.hpp"

namespace btx {

/// One entry per LF-terminated line; a missing final LF is tolerated and a
/// trailing CR is kept as data.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);
void write_text(const std::filesystem::path& path, std::string_view text);

/// `src<TAB>tgt` per line. Writers reject text containing a tab or newline.
Bitext read_bitext(const std::filesystem::path& path);
void write_bitext(const std::filesystem::path& path, const Bitext& bitext);

/// `score<TAB>src<TAB>tgt` per line, score printed with %.6f.
ScoredBitext read_scored(const std::filesystem::path& path);
void write_scored(const std::filesystem::path& path, const ScoredBitext& scored);

/// `src_lang<TAB>src_conf<TAB>tgt_lang<TAB>tgt_conf`; `-` for a missing confidence.
std::vector<LidPrediction> read_lid(const std::filesystem::path& path);

/// One `0` or `1` per line.
std::vector<bool> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<bool>& labels);

/// Ordered `key<TAB>value` lines.
class Report {
 public:
  void add(std::string key, std::string value);
  void add(std::string key, std::uint64_t value);
  void add(std::string key, double value);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::map<std::string, std::string> read_report(const std::filesystem::path& path);

/// printf("%.6f") without locale dependence.
std::string format_fixed(double v, int digits = 6);

}  // namespace btx
