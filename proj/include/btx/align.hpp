#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btx/embedding.hpp"

namespace btx {

/// One alignment unit. A null link has an empty block on one side; the empty
/// block's `first` records the insertion position on that side.
struct AlignLink {
  IndexBlock src;
  IndexBlock tgt;
  double cost = 0.0;

  bool is_null() const { return src.empty() || tgt.empty(); }
};

struct Alignment {
  std::vector<AlignLink> links;

  double total_cost() const;
  std::size_t non_null_count() const;
};

struct AlignParams {
  std::size_t max_block = 3;
  double skip_penalty = 0.3;
  std::size_t baseline_samples = 128;
  std::size_t band_width = 10;
  std::size_t full_dp_threshold = 64;
  std::uint64_t seed = 0;
  /// Also search blocks with two or more sentences on both sides. Off by
  /// default: with an additive size-weighted cost, k independent 1-1 links
  /// and their k-k merge cost the same to first order, so the merge would win
  /// or lose on noise.
  bool many_to_many = false;
  /// Fixes the cost normalizer instead of sampling it.
  std::optional<double> baseline;

  bool shape_allowed(std::size_t m, std::size_t n) const { return m + n > 0 && (many_to_many || m <= 1 || n <= 1); }

  void validate() const;
};

struct AlignStats {
  std::size_t cells = 0;  // DP cells evaluated, summed over all resolution levels
  double baseline = 0.0;
};

/// (1 - cos) * (nsrc + ntgt) / (2 * baseline), floored at 0. A zero block
/// vector is scored as cosine 0.
double substitution_cost(std::span<const float> src_block, std::span<const float> tgt_block, double baseline,
                         std::size_t nsrc, std::size_t ntgt);

/// Mean (1 - cos) over seeded random cross-document sentence pairs, floored at 1e-3.
double estimate_baseline(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p);

/// Exact minimum-cost monotonic alignment over all block sizes up to max_block.
/// Ties prefer fewer links, then the lexicographically smaller link sequence.
Alignment align_full_dp(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p,
                        AlignStats* stats = nullptr);

/// Full DP on small documents; otherwise align 2x-downsampled documents
/// recursively and re-solve inside a band around the projected path.
Alignment align_coarse_to_fine(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p,
                               AlignStats* stats = nullptr);

/// Exhaustive enumeration, for testing. Both documents must have at most 8 rows.
Alignment brute_force_align(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p);

/// Adjacent-row means, re-normalized; an odd trailing row passes through.
EmbeddingMatrix downsample_pairs(const EmbeddingMatrix& m);

struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt);

void write_similarity_tsv(std::ostream& out, const SimilarityMatrix& s);

/// Empty string when `a` is a monotonic complete cover of nsrc x ntgt; otherwise the first violation.
std::string check_alignment(const Alignment& a, std::size_t nsrc, std::size_t ntgt);

/// `src<TAB>tgt<TAB>cost` lines; indices comma-joined, empty side as `-`.
void write_alignment(std::ostream& out, const Alignment& a);

struct DocumentAlignment {
  std::string doc_id;
  Alignment alignment;
};

/// Stanzas of `# doc_id` followed by link lines, separated by blank lines.
void write_alignment_stanzas(std::ostream& out, std::span<const DocumentAlignment> docs);
std::vector<DocumentAlignment> read_alignment_stanzas(std::istream& in);

}  // namespace btx
