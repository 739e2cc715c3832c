#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "btx/error.hpp"

namespace btx {

/// Dense row-major float matrix, one row per sentence.
///
/// Rows are accessed through spans; the matrix is not mutated after it is
/// built, so it may be shared read-only between worker threads.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Zero-filled count x dim matrix. dim must be positive.
  EmbeddingMatrix(std::size_t count, std::size_t dim);

  /// Takes ownership of `data`, which must hold exactly count * dim values.
  EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data, bool normalized = false);

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  bool empty() const { return count_ == 0; }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> data() const { return data_; }

  /// Mutable access for builders; callers own the normalized flag afterwards.
  std::span<float> mutable_row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  void set_normalized(bool v) { normalized_ = v; }

  /// Rows at `indices`, in that order.
  EmbeddingMatrix select(std::span<const std::size_t> indices) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 1;
  std::vector<float> data_;
  bool normalized_ = false;
};

/// Contiguous, non-empty run of sentence indices [first, first + length).
struct IndexBlock {
  std::size_t first = 0;
  std::size_t length = 0;

  std::size_t end() const { return first + length; }
  bool empty() const { return length == 0; }
  friend bool operator==(const IndexBlock&, const IndexBlock&) = default;
  friend auto operator<=>(const IndexBlock&, const IndexBlock&) = default;
};

inline constexpr char kEmbeddingMagic[8] = {'B', 'T', 'X', 'E', 'M', 'B', '1', '\n'};

/// Reads the BTXEMB1 binary format. Throws FormatError naming the bad field.
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

/// Writes the BTXEMB1 binary format. Throws IoError on write failure.
void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);

struct NormalizeResult {
  EmbeddingMatrix matrix;
  std::size_t zero_rows = 0;
};

/// Scales every nonzero row to unit length; zero rows stay zero and are counted.
NormalizeResult l2_normalize(const EmbeddingMatrix& m);

double dot(std::span<const float> u, std::span<const float> v);
double norm(std::span<const float> v);

/// Cosine similarity clamped to [-1, 1]. Throws DomainError on a zero vector
/// and std::invalid_argument on a length mismatch.
double cosine(std::span<const float> u, std::span<const float> v);

/// Mean of the block's rows re-normalized to unit length. A singleton block
/// returns its row unchanged; a zero mean yields the zero vector.
std::vector<float> block_embed(const EmbeddingMatrix& m, IndexBlock b);

}  // namespace btx
