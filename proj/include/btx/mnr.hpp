#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "btx/embedding.hpp"

namespace btx {

/// Raised when training cannot continue: a degenerate projected row or a
/// non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear projection head over frozen base embeddings.
struct ProjectionModel {
  std::size_t out_dim = 0;
  std::size_t in_dim = 0;
  std::vector<double> weight;  // out_dim x in_dim, row-major
  double scale = 1.0;
  bool include_positive_in_denominator = false;

  /// Leading identity block, zeros elsewhere.
  static ProjectionModel identity(std::size_t out_dim, std::size_t in_dim);
  /// Gaussian entries with variance 1 / in_dim.
  static ProjectionModel random(std::size_t out_dim, std::size_t in_dim, std::uint64_t seed);

  double& at(std::size_t r, std::size_t c) { return weight[r * in_dim + c]; }
  double at(std::size_t r, std::size_t c) const { return weight[r * in_dim + c]; }

  void validate() const;
};

inline constexpr char kProjectionMagic[8] = {'B', 'T', 'X', 'P', 'R', 'O', 'J', '1'};

/// Checkpoint: magic, u32 out_dim, u32 in_dim, f32 scale, u8 flag, f32 weights (all little-endian).
/// Weights are rounded to float32 on save.
void save_projection(const ProjectionModel& m, const std::filesystem::path& path);
ProjectionModel load_projection(const std::filesystem::path& path);

struct TrainConfig {
  std::size_t window = 2;         // W
  std::size_t random = 2;         // R
  std::size_t batch_size = 32;    // K
  double lr = 0.1;
  std::size_t epochs = 5;
  std::uint64_t seed = 0;
  double momentum = 0.9;

  void validate() const;
};

struct ContrastiveItem {
  std::size_t anchor = 0;  // source index; the positive is target `anchor`
  std::vector<std::size_t> negatives;  // target indices: window first, then random draws
};

struct ContrastiveBatch {
  std::vector<ContrastiveItem> items;
};

/// Window negatives {i-W..i+W}\{i} clipped to the corpus, plus R draws without
/// replacement from the rest of the corpus (fewer when the corpus runs out).
/// Items are batched in index order. `epoch` selects an independent random stream.
std::vector<ContrastiveBatch> build_negative_sets(std::size_t n_pairs, const TrainConfig& cfg, std::uint64_t epoch = 0);

/// Mean over items of -(pos - log sum exp(negs)), pos joining the sum when
/// include_positive is set.
double mnr_loss(std::span<const double> pos_sims, std::span<const std::vector<double>> neg_sims, bool include_positive);

/// Rows mapped through the weight, then L2-normalized. Throws TrainingError
/// naming the row if a projection has norm below 1e-12.
EmbeddingMatrix forward_project(const EmbeddingMatrix& base, const ProjectionModel& model);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad;  // same shape as the weight
  std::vector<double> pos_sims;
  std::vector<std::vector<double>> neg_sims;
};

/// Loss of one batch and its exact gradient with respect to the weight.
LossGradient loss_and_gradient(const ContrastiveBatch& batch, const EmbeddingMatrix& src_base,
                               const EmbeddingMatrix& tgt_base, const ProjectionModel& model);

struct TrainResult {
  ProjectionModel model;
  std::vector<double> epoch_loss;  // item-weighted mean batch loss, one per epoch
};

/// SGD with momentum over row-aligned pairs (src row i, tgt row i).
TrainResult train_projection(const EmbeddingMatrix& src_base, const EmbeddingMatrix& tgt_base, const TrainConfig& cfg,
                             const ProjectionModel& init);

}  // namespace btx
