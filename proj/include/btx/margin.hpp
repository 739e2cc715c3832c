#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "btx/bitext.hpp"
#include "btx/embedding.hpp"
#include "btx/knn.hpp"

namespace btx {

/// a / b, with |b| floored at 1e-9 (sign of b kept; b == 0 counts as positive).
double margin_ratio(double a, double b);

/// Ratio margin of a pair: pair_cos over the average neighbourhood cosine,
/// sum(nn_x) / 2k + sum(nn_y) / 2k. The divisor uses the requested k even when
/// fewer neighbours are available.
double margin_score(double pair_cos, std::span<const double> nn_x, std::span<const double> nn_y, std::size_t k);

enum class Neighborhood {
  Cross,  // x's neighbours among targets, y's among sources
  Same,   // x's neighbours among other sources, y's among other targets
};

struct ScoreOptions {
  std::size_t k = 4;
  Neighborhood neighborhood = Neighborhood::Cross;
  std::size_t jobs = 1;
};

/// Margin score of each row pair (src row i, tgt row i). Matrices must be
/// normalized and of equal row count.
std::vector<double> margin_scores(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const ScoreOptions& opts = {});

/// Raw clamped cosine of each row pair.
std::vector<double> pair_cosines(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt);

/// Scores a bitext; output keeps input order.
ScoredBitext score_corpus(const Bitext& bitext, const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                          const ScoreOptions& opts = {});

}  // namespace btx
