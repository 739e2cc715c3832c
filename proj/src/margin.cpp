#include "btx/margin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "btx/simd.hpp"

namespace btx {

namespace {

constexpr double kDenominatorFloor = 1e-9;

// Neighbourhoods within the same side: search k + 1 and drop the query itself.
KnnResult knn_excluding_self(const EmbeddingMatrix& m, std::size_t k, const KnnOptions& opts) {
  const KnnResult raw = knn_cosine(m, m, k + 1, opts);
  const std::size_t kk = std::min(k, m.count() > 0 ? m.count() - 1 : 0);
  KnnResult out{raw.queries, kk, {}, {}};
  out.indices.reserve(raw.queries * kk);
  out.cosines.reserve(raw.queries * kk);
  for (std::size_t q = 0; q < raw.queries; ++q) {
    std::size_t taken = 0;
    for (std::size_t r = 0; r < raw.k && taken < kk; ++r) {
      if (raw.row_indices(q)[r] == q) continue;
      out.indices.push_back(raw.row_indices(q)[r]);
      out.cosines.push_back(raw.row_cosines(q)[r]);
      ++taken;
    }
  }
  return out;
}

}  // namespace

double margin_ratio(double a, double b) {
  if (std::abs(b) > kDenominatorFloor) return a / b;
  return a / std::copysign(kDenominatorFloor, b);
}

double margin_score(double pair_cos, std::span<const double> nn_x, std::span<const double> nn_y, std::size_t k) {
  if (k == 0) throw std::invalid_argument("margin_score: k must be positive");
  const double two_k = 2.0 * static_cast<double>(k);
  double sx = 0.0, sy = 0.0;
  for (double c : nn_x) sx += c / two_k;
  for (double c : nn_y) sy += c / two_k;
  return margin_ratio(pair_cos, sx + sy);
}

std::vector<double> pair_cosines(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  if (src.count() != tgt.count()) throw std::invalid_argument("pair_cosines: row count mismatch");
  std::vector<double> out(src.count());
  for (std::size_t i = 0; i < src.count(); ++i) {
    out[i] = std::clamp(simd::dot(src.row(i).data(), tgt.row(i).data(), src.dim()), -1.0, 1.0);
  }
  return out;
}

std::vector<double> margin_scores(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const ScoreOptions& opts) {
  if (src.count() != tgt.count()) {
    throw std::invalid_argument("margin_scores: " + std::to_string(src.count()) + " source rows vs " +
                                std::to_string(tgt.count()) + " target rows");
  }
  if (opts.k == 0) throw std::invalid_argument("margin_scores: k must be positive");
  if (src.empty()) return {};
  if (src.dim() != tgt.dim()) throw std::invalid_argument("margin_scores: dimension mismatch");

  const KnnOptions ko{64, 512, opts.jobs};
  KnnResult nn_x, nn_y;
  if (opts.neighborhood == Neighborhood::Cross) {
    nn_x = knn_cosine(src, tgt, opts.k, ko);
    nn_y = knn_cosine(tgt, src, opts.k, ko);
  } else {
    nn_x = knn_excluding_self(src, opts.k, ko);
    nn_y = knn_excluding_self(tgt, opts.k, ko);
  }

  const auto cos = pair_cosines(src, tgt);
  std::vector<double> out(src.count());
  for (std::size_t i = 0; i < src.count(); ++i) {
    out[i] = margin_score(cos[i], nn_x.row_cosines(i), nn_y.row_cosines(i), opts.k);
  }
  return out;
}

ScoredBitext score_corpus(const Bitext& bitext, const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                          const ScoreOptions& opts) {
  if (bitext.size() != src.count() || bitext.size() != tgt.count()) {
    throw std::invalid_argument("score_corpus: bitext has " + std::to_string(bitext.size()) + " pairs but embeddings have " +
                                std::to_string(src.count()) + "/" + std::to_string(tgt.count()) + " rows");
  }
  const auto scores = margin_scores(src, tgt, opts);
  ScoredBitext out;
  out.reserve(bitext.size());
  for (std::size_t i = 0; i < bitext.size(); ++i) out.push_back({bitext[i].src, bitext[i].tgt, scores[i]});
  return out;
}

}  // namespace btx
