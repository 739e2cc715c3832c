#include "btx/knn.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "btx/simd.hpp"

namespace btx {

namespace {

struct Hit {
  double cos;
  std::size_t idx;
};

inline bool better(const Hit& a, const Hit& b) { return a.cos > b.cos || (a.cos == b.cos && a.idx < b.idx); }

inline double clamped_dot(std::span<const float> u, std::span<const float> v) {
  return std::clamp(simd::dot(u.data(), v.data(), u.size()), -1.0, 1.0);
}

void check(const EmbeddingMatrix& queries, const EmbeddingMatrix& db, std::size_t k) {
  if (k == 0) throw std::invalid_argument("knn_cosine: k must be positive");
  if (!queries.empty() && !db.empty() && queries.dim() != db.dim()) {
    throw std::invalid_argument("knn_cosine: dimension mismatch (" + std::to_string(queries.dim()) + " vs " +
                                std::to_string(db.dim()) + ")");
  }
}

// Sorted insertion into a bounded list; `top` holds at most k hits.
inline void offer(std::vector<Hit>& top, std::size_t k, Hit h) {
  if (top.size() == k && !better(h, top.back())) return;
  auto pos = std::upper_bound(top.begin(), top.end(), h, better);
  top.insert(pos, h);
  if (top.size() > k) top.pop_back();
}

}  // namespace

KnnResult knn_cosine(const EmbeddingMatrix& queries, const EmbeddingMatrix& db, std::size_t k,
                     const KnnOptions& opts) {
  check(queries, db, k);
  const std::size_t kk = std::min(k, db.count());
  KnnResult res{queries.count(), kk, std::vector<std::size_t>(queries.count() * kk),
                std::vector<double>(queries.count() * kk)};
  if (kk == 0 || queries.empty()) return res;

  const std::size_t qb = std::max<std::size_t>(opts.query_block, 1);
  const std::size_t db_b = std::max<std::size_t>(opts.db_block, 1);
  const std::size_t nblocks = (queries.count() + qb - 1) / qb;

  auto run_block = [&](std::size_t block) {
    const std::size_t q0 = block * qb, q1 = std::min(q0 + qb, queries.count());
    std::vector<std::vector<Hit>> tops(q1 - q0);
    for (auto& t : tops) t.reserve(kk + 1);
    std::vector<double> tile((q1 - q0) * db_b);
    for (std::size_t d0 = 0; d0 < db.count(); d0 += db_b) {
      const std::size_t d1 = std::min(d0 + db_b, db.count());
      for (std::size_t q = q0; q < q1; ++q) {
        const auto qr = queries.row(q);
        for (std::size_t d = d0; d < d1; ++d) tile[(q - q0) * db_b + (d - d0)] = clamped_dot(qr, db.row(d));
      }
      for (std::size_t q = q0; q < q1; ++q) {
        for (std::size_t d = d0; d < d1; ++d) offer(tops[q - q0], kk, Hit{tile[(q - q0) * db_b + (d - d0)], d});
      }
    }
    for (std::size_t q = q0; q < q1; ++q) {
      for (std::size_t r = 0; r < kk; ++r) {
        res.indices[q * kk + r] = tops[q - q0][r].idx;
        res.cosines[q * kk + r] = tops[q - q0][r].cos;
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(opts.jobs, 1, nblocks);
  if (jobs == 1) {
    for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
    return res;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t b; (b = next.fetch_add(1)) < nblocks;) run_block(b);
    });
  }
  return res;
}

KnnResult knn_cosine_naive(const EmbeddingMatrix& queries, const EmbeddingMatrix& db, std::size_t k) {
  check(queries, db, k);
  const std::size_t kk = std::min(k, db.count());
  KnnResult res{queries.count(), kk, {}, {}};
  std::vector<Hit> all(db.count());
  for (std::size_t q = 0; q < queries.count(); ++q) {
    for (std::size_t d = 0; d < db.count(); ++d) all[d] = Hit{clamped_dot(queries.row(q), db.row(d)), d};
    std::sort(all.begin(), all.end(), better);
    for (std::size_t r = 0; r < kk; ++r) {
      res.indices.push_back(all[r].idx);
      res.cosines.push_back(all[r].cos);
    }
  }
  return res;
}

}  // namespace btx
