#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "btx/align.hpp"
#include "btx/bitext.hpp"
#include "btx/embedding.hpp"

namespace btx {

struct SyntheticSpec {
  std::size_t n_pairs = 100;  // generation steps: one 1-1 pair, one 2-1 merge or one noise insert each
  std::size_t dim = 256;
  double clean_cos_min = 0.9;
  double noise_cos_max = 0.3;
  double insert_rate = 0.0;
  double merge_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A document pair with planted ground truth.
///
/// Noise inserts place one unrelated sentence on each side at the same
/// position. They are not translations, so the gold alignment holds them as
/// null links; `candidates` lists every gold non-null link (clean) together
/// with every noise pair, as a labelled bitext with matching embeddings.
struct SyntheticCorpus {
  std::vector<std::string> src_sentences;
  std::vector<std::string> tgt_sentences;
  EmbeddingMatrix src_embs;
  EmbeddingMatrix tgt_embs;
  Alignment gold;

  Bitext candidates;
  std::vector<bool> candidate_clean;
  EmbeddingMatrix candidate_src_embs;
  EmbeddingMatrix candidate_tgt_embs;
};

/// Deterministic given spec.seed. Throws std::invalid_argument when the
/// cosine constraints cannot be met (e.g. dim too small).
SyntheticCorpus gen_synthetic(const SyntheticSpec& spec);

/// Labelled bitext embeddings: clean pairs have cosine >= clean_cos_min, a
/// noise pair's source has cosine <= noise_cos_max to every target and its
/// target to every source. Clean and noise pairs are interleaved at random.
struct LabeledPairs {
  EmbeddingMatrix src;
  EmbeddingMatrix tgt;
  std::vector<bool> clean;
};

LabeledPairs gen_labeled_pairs(std::size_t n_clean, std::size_t n_noise, std::size_t dim, double clean_cos_min,
                               double noise_cos_max, std::uint64_t seed);

/// Matched pairs only: each target has cosine >= clean_cos_min to its own
/// source and at most cross_cos_max to every other source. Needs dim > n.
LabeledPairs gen_separable_pairs(std::size_t n, std::size_t dim, double clean_cos_min, double cross_cos_max,
                                 std::uint64_t seed);

/// Labelled pairs plus a hub: every source shares a common direction, and a
/// single hub target along it (cosine >= 0.6 to all sources) is paired with
/// `n_hub` of the noise sources. Hub pairs are labelled noise.
struct HubCorpus {
  LabeledPairs pairs;
  std::vector<std::size_t> hub_rows;
  std::vector<float> hub;
};

HubCorpus gen_hub_corpus(std::size_t n_clean, std::size_t n_noise, std::size_t n_hub, std::size_t dim,
                         std::uint64_t seed);

/// Sentence text of a block: its sentences joined by single spaces.
std::string join_block_text(const std::vector<std::string>& sentences, IndexBlock b);

}  // namespace btx
