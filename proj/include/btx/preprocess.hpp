#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btx/bitext.hpp"

namespace btx {

/// Trims and collapses ASCII whitespace runs to single spaces.
std::string normalize_whitespace(std::string_view s);

/// Keeps the first occurrence of each pair, comparing whitespace-normalized
/// text. Emits the original strings.
Bitext deduplicate(const Bitext& bitext);

/// Indices into `bitext` of the pairs deduplicate() keeps.
std::vector<std::size_t> deduplicate_indices(const Bitext& bitext);

/// Character LCS length over Unicode scalar values divided by the longer
/// length. 1 when both are empty, 0 when exactly one is.
double overlap_ratio(std::string_view src, std::string_view tgt);

/// Drops pairs with overlap_ratio strictly above `threshold` (in (0, 1]).
Bitext filter_overlap(const Bitext& bitext, double threshold = 0.9);
std::vector<std::size_t> filter_overlap_indices(const Bitext& bitext, double threshold = 0.9);

/// Script-based language guess: `km`, `ps`, `en`, or `unk` (no letters or a tie).
std::string detect_script(std::string_view text);

struct LidLabel {
  std::string lang;
  std::optional<double> confidence;
};

struct LidPrediction {
  LidLabel src;
  LidLabel tgt;
};

struct LangFilterOptions {
  Side en_side = Side::Target;
  /// Also require the other side to be predicted as `expected_other`.
  bool strict = false;
  std::string expected_other = "km";
  /// Predictions below this confidence count as not matching. 0 ignores confidence.
  double min_confidence = 0.0;
};

/// Keeps pairs whose English side is predicted `en`. External predictions,
/// when given, take priority over detect_script(). Throws
/// std::invalid_argument on a length mismatch.
Bitext filter_lang(const Bitext& bitext, const LangFilterOptions& opts,
                   const std::vector<LidPrediction>* predictions = nullptr);
std::vector<std::size_t> filter_lang_indices(const Bitext& bitext, const LangFilterOptions& opts,
                                             const std::vector<LidPrediction>* predictions = nullptr);

struct PreprocessOptions {
  double overlap_threshold = 0.9;
  LangFilterOptions lang;
};

struct PreprocessReport {
  std::size_t input = 0;
  std::size_t removed_duplicates = 0;
  std::size_t removed_overlap = 0;
  std::size_t removed_lang = 0;
  std::size_t output = 0;
};

/// dedup -> overlap -> LID. Returns surviving indices into `bitext`.
std::vector<std::size_t> preprocess_indices(const Bitext& bitext, const PreprocessOptions& opts,
                                            const std::vector<LidPrediction>* predictions,
                                            PreprocessReport* report = nullptr);

Bitext select_pairs(const Bitext& bitext, const std::vector<std::size_t>& indices);

}  // namespace btx
