#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "btx/embedding.hpp"

namespace btx {

/// Top-k neighbours per query, sorted by cosine descending, ties by lower index.
struct KnnResult {
  std::size_t queries = 0;
  std::size_t k = 0;  // entries per query (requested k capped at database size)
  std::vector<std::size_t> indices;
  std::vector<double> cosines;

  std::span<const std::size_t> row_indices(std::size_t q) const { return {indices.data() + q * k, k}; }
  std::span<const double> row_cosines(std::size_t q) const { return {cosines.data() + q * k, k}; }
};

struct KnnOptions {
  std::size_t query_block = 64;
  std::size_t db_block = 512;
  std::size_t jobs = 1;
};

/// Exact blocked search. Inputs are expected to be L2-normalized, so cosine
/// is the clamped dot product. Results do not depend on block sizes or jobs.
KnnResult knn_cosine(const EmbeddingMatrix& queries, const EmbeddingMatrix& db, std::size_t k,
                     const KnnOptions& opts = {});

/// Row-by-row reference: every dot product, then a sort.
KnnResult knn_cosine_naive(const EmbeddingMatrix& queries, const EmbeddingMatrix& db, std::size_t k);

}  // namespace btx
