#pragma once

#include <string>
#include <vector>

namespace btx {

struct SentencePair {
  std::string src;
  std::string tgt;
  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

using Bitext = std::vector<SentencePair>;

struct ScoredPair {
  std::string src;
  std::string tgt;
  double score = 0.0;
  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

using ScoredBitext = std::vector<ScoredPair>;

enum class Side { Source, Target };

inline const std::string& side_text(const SentencePair& p, Side s) { return s == Side::Source ? p.src : p.tgt; }
inline const std::string& side_text(const ScoredPair& p, Side s) { return s == Side::Source ? p.src : p.tgt; }

}  // namespace btx
