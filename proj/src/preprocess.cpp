#include "btx/preprocess.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "btx/utf8.hpp"

namespace btx {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& p) const {
    const std::size_t a = std::hash<std::string>{}(p.first);
    return a ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  }
};

std::size_t lcs_length(const std::u32string& a, const std::u32string& b) {
  const std::u32string& shorter = a.size() < b.size() ? a : b;
  const std::u32string& longer = a.size() < b.size() ? b : a;
  std::vector<std::size_t> prev(shorter.size() + 1, 0), cur(shorter.size() + 1, 0);
  for (char32_t c : longer) {
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      cur[j] = c == shorter[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[shorter.size()];
}

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

bool lang_matches(const LidLabel& label, const std::string& want, double min_confidence) {
  if (label.lang != want) return false;
  return min_confidence <= 0.0 || label.confidence.value_or(1.0) >= min_confidence;
}

}  // namespace

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (utf8::is_space(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::size_t> deduplicate_indices(const Bitext& bitext) {
  std::unordered_set<std::pair<std::string, std::string>, PairHash> seen;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < bitext.size(); ++i) {
    if (seen.emplace(normalize_whitespace(bitext[i].src), normalize_whitespace(bitext[i].tgt)).second) keep.push_back(i);
  }
  return keep;
}

Bitext deduplicate(const Bitext& bitext) { return select_pairs(bitext, deduplicate_indices(bitext)); }

double overlap_ratio(std::string_view src, std::string_view tgt) {
  const auto a = utf8::decode(src);
  const auto b = utf8::decode(tgt);
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  return static_cast<double>(lcs_length(a, b)) / static_cast<double>(std::max(a.size(), b.size()));
}

std::vector<std::size_t> filter_overlap_indices(const Bitext& bitext, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("filter_overlap: threshold must be in (0, 1], got " + std::to_string(threshold));
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < bitext.size(); ++i) {
    if (!(overlap_ratio(bitext[i].src, bitext[i].tgt) > threshold)) keep.push_back(i);
  }
  return keep;
}

Bitext filter_overlap(const Bitext& bitext, double threshold) {
  return select_pairs(bitext, filter_overlap_indices(bitext, threshold));
}

std::string detect_script(std::string_view text) {
  // km, ps, en
  std::array<std::size_t, 3> votes{};
  for (char32_t c : utf8::decode(text)) {
    if (in(c, 0x1780, 0x17ff)) {
      if (!in(c, 0x17e0, 0x17e9) && !in(c, 0x17f0, 0x17f9)) ++votes[0];
    } else if (in(c, 0x0600, 0x06ff) || in(c, 0x0750, 0x077f) || in(c, 0xfb50, 0xfdff)) {
      if (!in(c, 0x0660, 0x0669) && !in(c, 0x06f0, 0x06f9)) ++votes[1];
    } else if (in(c, U'A', U'Z') || in(c, U'a', U'z')) {
      ++votes[2];
    }
  }
  static constexpr const char* kNames[] = {"km", "ps", "en"};
  const auto top = std::max_element(votes.begin(), votes.end());
  if (*top == 0 || std::count(votes.begin(), votes.end(), *top) > 1) return "unk";
  return kNames[top - votes.begin()];
}

std::vector<std::size_t> filter_lang_indices(const Bitext& bitext, const LangFilterOptions& opts,
                                             const std::vector<LidPrediction>* predictions) {
  if (predictions && predictions->size() != bitext.size()) {
    throw std::invalid_argument("filter_lang: " + std::to_string(predictions->size()) + " predictions for " +
                                std::to_string(bitext.size()) + " pairs");
  }
  const Side other = opts.en_side == Side::Source ? Side::Target : Side::Source;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < bitext.size(); ++i) {
    LidLabel en_label, other_label;
    if (predictions) {
      const auto& p = (*predictions)[i];
      en_label = opts.en_side == Side::Source ? p.src : p.tgt;
      other_label = opts.en_side == Side::Source ? p.tgt : p.src;
    } else {
      en_label = {detect_script(side_text(bitext[i], opts.en_side)), std::nullopt};
      if (opts.strict) other_label = {detect_script(side_text(bitext[i], other)), std::nullopt};
    }
    if (!lang_matches(en_label, "en", opts.min_confidence)) continue;
    if (opts.strict && !lang_matches(other_label, opts.expected_other, opts.min_confidence)) continue;
    keep.push_back(i);
  }
  return keep;
}

Bitext filter_lang(const Bitext& bitext, const LangFilterOptions& opts, const std::vector<LidPrediction>* predictions) {
  return select_pairs(bitext, filter_lang_indices(bitext, opts, predictions));
}

std::vector<std::size_t> preprocess_indices(const Bitext& bitext, const PreprocessOptions& opts,
                                            const std::vector<LidPrediction>* predictions, PreprocessReport* report) {
  if (predictions && predictions->size() != bitext.size()) {
    throw std::invalid_argument("preprocess: " + std::to_string(predictions->size()) + " predictions for " +
                                std::to_string(bitext.size()) + " pairs");
  }
  auto compose = [](const std::vector<std::size_t>& outer, const std::vector<std::size_t>& inner) {
    std::vector<std::size_t> out;
    out.reserve(inner.size());
    for (std::size_t i : inner) out.push_back(outer[i]);
    return out;
  };

  const auto after_dedup = deduplicate_indices(bitext);
  const auto after_overlap =
      compose(after_dedup, filter_overlap_indices(select_pairs(bitext, after_dedup), opts.overlap_threshold));

  std::vector<LidPrediction> sub_predictions;
  if (predictions) {
    for (std::size_t i : after_overlap) sub_predictions.push_back((*predictions)[i]);
  }
  const auto after_lang = compose(
      after_overlap, filter_lang_indices(select_pairs(bitext, after_overlap), opts.lang,
                                         predictions ? &sub_predictions : nullptr));

  if (report) {
    report->input = bitext.size();
    report->removed_duplicates = bitext.size() - after_dedup.size();
    report->removed_overlap = after_dedup.size() - after_overlap.size();
    report->removed_lang = after_overlap.size() - after_lang.size();
    report->output = after_lang.size();
  }
  return after_lang;
}

Bitext select_pairs(const Bitext& bitext, const std::vector<std::size_t>& indices) {
  Bitext out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(bitext.at(i));
  return out;
}

}  // namespace btx
