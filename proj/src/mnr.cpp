#include "btx/mnr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <unordered_set>

#include "btx/rng.hpp"
#include "btx/simd.hpp"

namespace btx {

namespace {

constexpr double kMinProjectedNorm = 1e-12;

std::uint32_t read_u32le(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Projection of one base row: the unnormalized image, its norm and unit direction.
struct Projected {
  std::vector<double> dir;
  double norm = 0.0;
};

Projected project_row(const ProjectionModel& model, std::span<const float> x, std::size_t row, const char* side) {
  std::vector<double> xd(x.begin(), x.end());
  Projected p;
  p.dir.resize(model.out_dim);
  for (std::size_t r = 0; r < model.out_dim; ++r) {
    p.dir[r] = simd::dot(model.weight.data() + r * model.in_dim, xd.data(), model.in_dim);
  }
  p.norm = std::sqrt(simd::dot(p.dir.data(), p.dir.data(), p.dir.size()));
  if (!(p.norm >= kMinProjectedNorm)) {
    throw TrainingError(std::string("projected ") + side + " row " + std::to_string(row) +
                        " has (near-)zero norm");
  }
  for (double& v : p.dir) v /= p.norm;
  return p;
}

void check_dims(const EmbeddingMatrix& base, const ProjectionModel& model) {
  if (!base.empty() && base.dim() != model.in_dim) {
    throw std::invalid_argument("projection expects dim " + std::to_string(model.in_dim) + ", embeddings have " +
                                std::to_string(base.dim()));
  }
}

}  // namespace

ProjectionModel ProjectionModel::identity(std::size_t out_dim, std::size_t in_dim) {
  ProjectionModel m{out_dim, in_dim, std::vector<double>(out_dim * in_dim, 0.0)};
  for (std::size_t i = 0; i < std::min(out_dim, in_dim); ++i) m.at(i, i) = 1.0;
  m.validate();
  return m;
}

ProjectionModel ProjectionModel::random(std::size_t out_dim, std::size_t in_dim, std::uint64_t seed) {
  ProjectionModel m{out_dim, in_dim, std::vector<double>(out_dim * in_dim)};
  Rng rng(derive_seed(seed, 0x696e6974));
  const double sd = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& w : m.weight) w = sd * rng.normal();
  m.validate();
  return m;
}

void ProjectionModel::validate() const {
  if (out_dim == 0 || in_dim == 0) throw std::invalid_argument("projection: dimensions must be positive");
  if (weight.size() != out_dim * in_dim) throw std::invalid_argument("projection: weight size mismatch");
  if (!std::isfinite(scale) || scale < 0.0) throw std::invalid_argument("projection: scale must be finite and >= 0");
  for (double w : weight) {
    if (!std::isfinite(w)) throw std::invalid_argument("projection: non-finite weight");
  }
}

void save_projection(const ProjectionModel& m, const std::filesystem::path& path) {
  m.validate();
  std::string out(kProjectionMagic, sizeof kProjectionMagic);
  put_u32le(out, static_cast<std::uint32_t>(m.out_dim));
  put_u32le(out, static_cast<std::uint32_t>(m.in_dim));
  put_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.scale)));
  out.push_back(m.include_positive_in_denominator ? 1 : 0);
  for (double w : m.weight) put_u32le(out, std::bit_cast<std::uint32_t>(static_cast<float>(w)));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create checkpoint " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

ProjectionModel load_projection(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 21) throw FormatError(path.string() + ": header truncated (need 21 bytes)");
  if (std::memcmp(bytes.data(), kProjectionMagic, sizeof kProjectionMagic) != 0) {
    throw FormatError(path.string() + ": bad magic (expected BTXPROJ1)");
  }
  ProjectionModel m;
  m.out_dim = read_u32le(p + 8);
  m.in_dim = read_u32le(p + 12);
  m.scale = std::bit_cast<float>(read_u32le(p + 16));
  if (p[20] > 1) throw FormatError(path.string() + ": include_positive flag must be 0 or 1");
  m.include_positive_in_denominator = p[20] == 1;
  if (m.out_dim == 0) throw FormatError(path.string() + ": out_dim is 0");
  if (m.in_dim == 0) throw FormatError(path.string() + ": in_dim is 0");
  const std::uint64_t want = std::uint64_t{m.out_dim} * m.in_dim * 4;
  if (bytes.size() - 21 != want) {
    throw FormatError(path.string() + ": weight payload length " + std::to_string(bytes.size() - 21) +
                      " != out_dim*in_dim*4 = " + std::to_string(want));
  }
  m.weight.resize(m.out_dim * m.in_dim);
  for (std::size_t i = 0; i < m.weight.size(); ++i) m.weight[i] = std::bit_cast<float>(read_u32le(p + 21 + 4 * i));
  m.validate();
  return m;
}

void TrainConfig::validate() const {
  if (2 * window + random < 1) throw std::invalid_argument("train: need at least one negative (2W + R >= 1)");
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("train: lr must be finite and >= 0");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("train: momentum must be in [0, 1)");
}

std::vector<ContrastiveBatch> build_negative_sets(std::size_t n_pairs, const TrainConfig& cfg, std::uint64_t epoch) {
  cfg.validate();
  if (n_pairs < 1) throw std::invalid_argument("build_negative_sets: need at least one pair");
  Rng rng(derive_seed(cfg.seed, epoch));

  std::vector<ContrastiveBatch> batches;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    if (i % cfg.batch_size == 0) batches.emplace_back();
    ContrastiveItem item{i, {}};

    const std::size_t lo = i > cfg.window ? i - cfg.window : 0;
    const std::size_t hi = std::min(i + cfg.window, n_pairs - 1);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) item.negatives.push_back(j);
    }

    const std::size_t available = n_pairs - (hi - lo + 1);
    const std::size_t want = std::min(cfg.random, available);
    auto excluded = [&](std::size_t j) { return j >= lo && j <= hi; };
    if (want > 0 && want * 4 <= available) {
      std::unordered_set<std::size_t> taken;
      while (taken.size() < want) {
        const std::size_t j = rng.index(n_pairs);
        if (!excluded(j) && taken.insert(j).second) item.negatives.push_back(j);
      }
    } else if (want > 0) {
      pool.clear();
      for (std::size_t j = 0; j < n_pairs; ++j) {
        if (!excluded(j)) pool.push_back(j);
      }
      for (std::size_t t = 0; t < want; ++t) {
        std::swap(pool[t], pool[t + rng.index(pool.size() - t)]);
        item.negatives.push_back(pool[t]);
      }
    }
    batches.back().items.push_back(std::move(item));
  }
  return batches;
}

double mnr_loss(std::span<const double> pos_sims, std::span<const std::vector<double>> neg_sims, bool include_positive) {
  if (pos_sims.size() != neg_sims.size() || pos_sims.empty()) {
    throw std::invalid_argument("mnr_loss: need one negative list per positive");
  }
  double total = 0.0;
  std::vector<double> logits;
  for (std::size_t i = 0; i < pos_sims.size(); ++i) {
    if (neg_sims[i].empty()) throw std::invalid_argument("mnr_loss: empty negative list for item " + std::to_string(i));
    logits.assign(neg_sims[i].begin(), neg_sims[i].end());
    if (include_positive) logits.push_back(pos_sims[i]);
    total += -(pos_sims[i] - log_sum_exp(logits));
  }
  return total / static_cast<double>(pos_sims.size());
}

EmbeddingMatrix forward_project(const EmbeddingMatrix& base, const ProjectionModel& model) {
  model.validate();
  check_dims(base, model);
  std::vector<float> out;
  out.reserve(base.count() * model.out_dim);
  for (std::size_t i = 0; i < base.count(); ++i) {
    const auto p = project_row(model, base.row(i), i, "base");
    for (double v : p.dir) out.push_back(static_cast<float>(v));
  }
  return EmbeddingMatrix(base.count(), model.out_dim, std::move(out), true);
}

LossGradient loss_and_gradient(const ContrastiveBatch& batch, const EmbeddingMatrix& src_base,
                               const EmbeddingMatrix& tgt_base, const ProjectionModel& model) {
  check_dims(src_base, model);
  check_dims(tgt_base, model);
  if (batch.items.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  const std::size_t out_dim = model.out_dim;

  // Projections and upstream gradients (w.r.t. the unit directions), keyed
  // by row; std::map keeps the reduction order fixed.
  struct Node {
    Projected proj;
    std::vector<double> grad_dir;
  };
  std::map<std::size_t, Node> src_nodes, tgt_nodes;
  auto node = [&](std::map<std::size_t, Node>& nodes, const EmbeddingMatrix& base, std::size_t row,
                  const char* side) -> Node& {
    auto it = nodes.find(row);
    if (it != nodes.end()) return it->second;
    if (row >= base.count()) throw std::out_of_range(std::string(side) + " index " + std::to_string(row));
    return nodes.emplace(row, Node{project_row(model, base.row(row), row, side), std::vector<double>(out_dim, 0.0)})
        .first->second;
  };
  auto sim = [&](const Node& a, const Node& b) {
    return model.scale * simd::dot(a.proj.dir.data(), b.proj.dir.data(), out_dim);
  };

  LossGradient res;
  const double inv_k = 1.0 / static_cast<double>(batch.items.size());
  std::vector<double> logits, weights;
  for (const auto& item : batch.items) {
    if (item.negatives.empty()) throw std::invalid_argument("loss_and_gradient: item without negatives");
    Node& anchor = node(src_nodes, src_base, item.anchor, "source");
    Node& positive = node(tgt_nodes, tgt_base, item.anchor, "target");
    const double pos = sim(anchor, positive);
    std::vector<double> negs;
    for (std::size_t j : item.negatives) negs.push_back(sim(anchor, node(tgt_nodes, tgt_base, j, "target")));

    logits = negs;
    if (model.include_positive_in_denominator) logits.push_back(pos);
    const double lse = log_sum_exp(logits);
    res.loss += -(pos - lse) * inv_k;

    // d(item loss)/d(sim) = softmax weight, minus 1 for the positive.
    weights.resize(logits.size());
    for (std::size_t t = 0; t < logits.size(); ++t) weights[t] = std::exp(logits[t] - lse) * inv_k;
    double g_pos = -inv_k;
    if (model.include_positive_in_denominator) g_pos += weights.back();

    auto push = [&](Node& a, Node& b, double g) {
      const double gs = g * model.scale;
      for (std::size_t d = 0; d < out_dim; ++d) {
        a.grad_dir[d] += gs * b.proj.dir[d];
        b.grad_dir[d] += gs * a.proj.dir[d];
      }
    };
    push(anchor, positive, g_pos);
    for (std::size_t t = 0; t < item.negatives.size(); ++t) {
      push(anchor, tgt_nodes.at(item.negatives[t]), weights[t]);
    }
    res.pos_sims.push_back(pos);
    res.neg_sims.push_back(std::move(negs));
  }

  // Through r = u / |u|: dL/du = (g - (g . r) r) / |u|; then dL/dW += (dL/du) x^T.
  res.grad.assign(out_dim * model.in_dim, 0.0);
  auto backprop = [&](std::map<std::size_t, Node>& nodes, const EmbeddingMatrix& base) {
    std::vector<double> gu(out_dim);
    for (auto& [row, n] : nodes) {
      const double proj = simd::dot(n.grad_dir.data(), n.proj.dir.data(), out_dim);
      for (std::size_t d = 0; d < out_dim; ++d) gu[d] = (n.grad_dir[d] - proj * n.proj.dir[d]) / n.proj.norm;
      const auto x = base.row(row);
      for (std::size_t r = 0; r < out_dim; ++r) {
        double* g = res.grad.data() + r * model.in_dim;
        for (std::size_t c = 0; c < model.in_dim; ++c) g[c] += gu[r] * static_cast<double>(x[c]);
      }
    }
  };
  backprop(src_nodes, src_base);
  backprop(tgt_nodes, tgt_base);
  return res;
}

TrainResult train_projection(const EmbeddingMatrix& src_base, const EmbeddingMatrix& tgt_base, const TrainConfig& cfg,
                             const ProjectionModel& init) {
  cfg.validate();
  init.validate();
  if (src_base.count() != tgt_base.count()) throw std::invalid_argument("train: source/target row counts differ");
  if (src_base.count() < 2) throw std::invalid_argument("train: need at least 2 pairs");
  check_dims(src_base, init);
  check_dims(tgt_base, init);

  TrainResult res{init, {}};
  std::vector<double> velocity(init.weight.size(), 0.0);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double weighted = 0.0;
    for (const auto& batch : build_negative_sets(src_base.count(), cfg, epoch)) {
      const auto lg = loss_and_gradient(batch, src_base, tgt_base, res.model);
      if (!std::isfinite(lg.loss)) throw TrainingError("train: non-finite loss in epoch " + std::to_string(epoch));
      weighted += lg.loss * static_cast<double>(batch.items.size());
      for (std::size_t w = 0; w < velocity.size(); ++w) {
        velocity[w] = cfg.momentum * velocity[w] + lg.grad[w];
        res.model.weight[w] -= cfg.lr * velocity[w];
      }
    }
    const double mean = weighted / static_cast<double>(src_base.count());
    if (!std::isfinite(mean)) throw TrainingError("train: non-finite loss in epoch " + std::to_string(epoch));
    res.epoch_loss.push_back(mean);
  }
  return res;
}

}  // namespace btx
