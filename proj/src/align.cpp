#include "btx/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "btx/rng.hpp"
#include "btx/simd.hpp"

namespace btx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBaselineFloor = 1e-3;

double cost_from_dot(double d, double norm_s, double norm_t, double baseline, std::size_t nsrc, std::size_t ntgt) {
  double cos = 0.0;
  if (norm_s > 0.0 && norm_t > 0.0) cos = std::clamp(d / (norm_s * norm_t), -1.0, 1.0);
  const double c = (1.0 - cos) * static_cast<double>(nsrc + ntgt) / (2.0 * baseline);
  return std::max(c, 0.0);
}

// Block vectors for every start row and every length 1..max_block.
class BlockTable {
 public:
  BlockTable(const EmbeddingMatrix& m, std::size_t max_block)
      : count_(m.count()), max_block_(max_block), dim_(m.dim()),
        vecs_(count_ * max_block_ * dim_, 0.0f), norms_(count_ * max_block_, 0.0) {
    for (std::size_t i = 0; i < count_; ++i) {
      for (std::size_t len = 1; len <= max_block_ && i + len <= count_; ++len) {
        const auto v = block_embed(m, IndexBlock{i, len});
        std::copy(v.begin(), v.end(), vecs_.begin() + static_cast<std::ptrdiff_t>(slot(i, len) * dim_));
        norms_[slot(i, len)] = std::sqrt(simd::dot(v.data(), v.data(), dim_));
      }
    }
  }

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }
  const float* vec(std::size_t i, std::size_t len) const { return vecs_.data() + slot(i, len) * dim_; }
  double norm(std::size_t i, std::size_t len) const { return norms_[slot(i, len)]; }

 private:
  std::size_t slot(std::size_t i, std::size_t len) const { return i * max_block_ + (len - 1); }

  std::size_t count_, max_block_, dim_;
  std::vector<float> vecs_;
  std::vector<double> norms_;
};

struct CostModel {
  const BlockTable& src;
  const BlockTable& tgt;
  double baseline;
  double skip_penalty;

  double operator()(std::size_t i, std::size_t j, std::size_t m, std::size_t n) const {
    if (m == 0 || n == 0) return skip_penalty * static_cast<double>(m + n);
    const double d = simd::dot(src.vec(i, m), tgt.vec(j, n), src.dim());
    return cost_from_dot(d, src.norm(i, m), tgt.norm(j, n), baseline, m, n);
  }
};

// Allowed target columns [lo[i], hi[i]] for each source row i in 0..N.
struct Band {
  std::vector<std::size_t> lo, hi;

  static Band full(std::size_t n, std::size_t m) {
    return Band{std::vector<std::size_t>(n + 1, 0), std::vector<std::size_t>(n + 1, m)};
  }
  bool contains(std::size_t i, std::size_t j) const { return j >= lo[i] && j <= hi[i]; }
};

// Backward DP: best[i][j] is the cheapest completion from (i, j) to (N, M).
// Enumerating candidate first links in (m, n) order and replacing only on a
// strictly better (cost, link count) keeps the lexicographically smallest
// link sequence among ties.
Alignment solve_banded(const CostModel& cost, const Band& band, const AlignParams& p, AlignStats* stats) {
  const std::size_t max_block = p.max_block;
  const std::size_t N = cost.src.count();
  const std::size_t M = cost.tgt.count();

  std::vector<std::size_t> offset(N + 2, 0);
  for (std::size_t i = 0; i <= N; ++i) offset[i + 1] = offset[i] + (band.hi[i] - band.lo[i] + 1);
  const std::size_t cells = offset[N + 1];
  if (stats) stats->cells += cells;

  std::vector<double> best(cells, kInf);
  std::vector<std::uint32_t> nlinks(cells, 0);
  std::vector<std::uint8_t> choice(cells, 0);
  auto at = [&](std::size_t i, std::size_t j) { return offset[i] + (j - band.lo[i]); };

  for (std::size_t ii = N + 1; ii-- > 0;) {
    for (std::size_t jj = band.hi[ii] + 1; jj-- > band.lo[ii];) {
      const std::size_t here = at(ii, jj);
      if (ii == N && jj == M) {
        best[here] = 0.0;
        continue;
      }
      double b = kInf;
      std::uint32_t bl = 0;
      std::uint8_t bc = 0;
      for (std::size_t m = 0; m <= max_block && ii + m <= N; ++m) {
        for (std::size_t n = 0; n <= max_block && jj + n <= M; ++n) {
          if (!p.shape_allowed(m, n) || !band.contains(ii + m, jj + n)) continue;
          const std::size_t next = at(ii + m, jj + n);
          if (best[next] == kInf) continue;
          const double c = cost(ii, jj, m, n) + best[next];
          const std::uint32_t l = nlinks[next] + 1;
          if (c < b || (c == b && l < bl)) {
            b = c;
            bl = l;
            bc = static_cast<std::uint8_t>(m * 16 + n);
          }
        }
      }
      best[here] = b;
      nlinks[here] = bl;
      choice[here] = bc;
    }
  }

  Alignment out;
  if (best[at(0, 0)] == kInf) throw std::logic_error("align: band does not connect (0,0) to (N,M)");
  std::size_t i = 0, j = 0;
  while (i < N || j < M) {
    const std::uint8_t c = choice[at(i, j)];
    const std::size_t m = c / 16, n = c % 16;
    out.links.push_back(AlignLink{IndexBlock{i, m}, IndexBlock{j, n}, cost(i, j, m, n)});
    i += m;
    j += n;
  }
  return out;
}

void check_dims(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  if (!src.empty() && !tgt.empty() && src.dim() != tgt.dim()) {
    throw std::invalid_argument("align: dimension mismatch (" + std::to_string(src.dim()) + " vs " +
                                std::to_string(tgt.dim()) + ")");
  }
}

double resolve_baseline(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p) {
  if (p.baseline) {
    if (!(*p.baseline > 0.0)) throw std::invalid_argument("align: baseline must be positive");
    return *p.baseline;
  }
  return estimate_baseline(src, tgt, p);
}

// Fewest links, and among those the lexicographically smallest sequence:
// the short remainder chunk goes first.
Alignment all_skips(std::size_t nsrc, std::size_t ntgt, const AlignParams& p) {
  Alignment a;
  auto chunks = [&](std::size_t count, auto&& emit) {
    std::size_t at = 0;
    if (const std::size_t rem = count % p.max_block; rem != 0) {
      emit(at, rem);
      at = rem;
    }
    for (; at < count; at += p.max_block) emit(at, p.max_block);
  };
  chunks(nsrc, [&](std::size_t i, std::size_t len) {
    a.links.push_back({IndexBlock{i, len}, IndexBlock{0, 0}, p.skip_penalty * static_cast<double>(len)});
  });
  chunks(ntgt, [&](std::size_t j, std::size_t len) {
    a.links.push_back({IndexBlock{nsrc, 0}, IndexBlock{j, len}, p.skip_penalty * static_cast<double>(len)});
  });
  return a;
}

Alignment full_dp_with_baseline(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p,
                                double baseline, AlignStats* stats) {
  BlockTable s(src, p.max_block), t(tgt, p.max_block);
  CostModel cost{s, t, baseline, p.skip_penalty};
  return solve_banded(cost, Band::full(src.count(), tgt.count()), p, stats);
}

// Fine-resolution band around a coarse path. Coarse vertex (a, b) maps to
// fine (min(2a, N), min(2b, M)); each link spans its rows' column range.
Band project_band(const Alignment& coarse, std::size_t N, std::size_t M, std::size_t width) {
  Band band{std::vector<std::size_t>(N + 1, M), std::vector<std::size_t>(N + 1, 0)};
  auto touch = [&](std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) {
    for (std::size_t i = i0; i <= i1; ++i) {
      band.lo[i] = std::min(band.lo[i], j0);
      band.hi[i] = std::max(band.hi[i], j1);
    }
  };
  for (const auto& l : coarse.links) {
    const std::size_t i0 = std::min(2 * l.src.first, N), i1 = std::min(2 * l.src.end(), N);
    const std::size_t j0 = std::min(2 * l.tgt.first, M), j1 = std::min(2 * l.tgt.end(), M);
    touch(i0, i1, j0, j1);
  }
  if (coarse.links.empty()) touch(0, N, 0, M);
  for (std::size_t i = 0; i <= N; ++i) {
    band.lo[i] = band.lo[i] > width ? band.lo[i] - width : 0;
    band.hi[i] = std::min(band.hi[i] + width, M);
  }
  // Row i + 1 must be enterable from row i's last column.
  for (std::size_t i = 0; i < N; ++i) band.lo[i + 1] = std::min(band.lo[i + 1], band.hi[i]);
  band.lo[0] = 0;
  band.hi[N] = M;
  return band;
}

Alignment coarse_to_fine(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p,
                         double baseline, AlignStats* stats) {
  if (std::min(src.count(), tgt.count()) <= p.full_dp_threshold) {
    return full_dp_with_baseline(src, tgt, p, baseline, stats);
  }
  const Alignment coarse = coarse_to_fine(downsample_pairs(src), downsample_pairs(tgt), p, baseline, stats);
  BlockTable s(src, p.max_block), t(tgt, p.max_block);
  CostModel cost{s, t, baseline, p.skip_penalty};
  return solve_banded(cost, project_band(coarse, src.count(), tgt.count(), p.band_width), p, stats);
}

std::string join_block(const IndexBlock& b) {
  if (b.empty()) return "-";
  std::string s;
  for (std::size_t i = b.first; i < b.end(); ++i) {
    if (i != b.first) s += ',';
    s += std::to_string(i);
  }
  return s;
}

}  // namespace

double Alignment::total_cost() const {
  double s = 0.0;
  for (const auto& l : links) s += l.cost;
  return s;
}

std::size_t Alignment::non_null_count() const {
  return static_cast<std::size_t>(std::count_if(links.begin(), links.end(), [](const AlignLink& l) { return !l.is_null(); }));
}

void AlignParams::validate() const {
  if (max_block < 1 || max_block > 15) throw std::invalid_argument("align: max_block must be in [1, 15]");
  if (band_width < 1) throw std::invalid_argument("align: band_width must be >= 1");
  if (!(skip_penalty > 0.0)) throw std::invalid_argument("align: skip_penalty must be positive");
  if (baseline_samples < 1) throw std::invalid_argument("align: baseline_samples must be >= 1");
  if (full_dp_threshold < 1) throw std::invalid_argument("align: full_dp_threshold must be >= 1");
}

double substitution_cost(std::span<const float> src_block, std::span<const float> tgt_block, double baseline,
                         std::size_t nsrc, std::size_t ntgt) {
  if (!(baseline > 0.0)) throw std::invalid_argument("substitution_cost: baseline must be positive");
  if (src_block.size() != tgt_block.size()) throw std::invalid_argument("substitution_cost: dimension mismatch");
  return cost_from_dot(dot(src_block, tgt_block), norm(src_block), norm(tgt_block), baseline, nsrc, ntgt);
}

double estimate_baseline(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p) {
  if (src.empty() || tgt.empty()) return 1.0;
  check_dims(src, tgt);
  Rng rng(derive_seed(p.seed, 0x62617365));
  double sum = 0.0;
  for (std::size_t k = 0; k < p.baseline_samples; ++k) {
    const auto i = rng.index(src.count());
    const auto j = rng.index(tgt.count());
    const auto u = src.row(i), v = tgt.row(j);
    const double nu = norm(u), nv = norm(v);
    const double cos = (nu > 0.0 && nv > 0.0) ? std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0) : 0.0;
    sum += 1.0 - cos;
  }
  return std::max(sum / static_cast<double>(p.baseline_samples), kBaselineFloor);
}

Alignment align_full_dp(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p,
                        AlignStats* stats) {
  p.validate();
  check_dims(src, tgt);
  const double baseline = resolve_baseline(src, tgt, p);
  if (stats) stats->baseline = baseline;
  if (src.empty() || tgt.empty()) return all_skips(src.count(), tgt.count(), p);
  return full_dp_with_baseline(src, tgt, p, baseline, stats);
}

Alignment align_coarse_to_fine(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p,
                               AlignStats* stats) {
  p.validate();
  check_dims(src, tgt);
  const double baseline = resolve_baseline(src, tgt, p);
  if (stats) stats->baseline = baseline;
  if (src.empty() || tgt.empty()) return all_skips(src.count(), tgt.count(), p);
  return coarse_to_fine(src, tgt, p, baseline, stats);
}

Alignment brute_force_align(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt, const AlignParams& p) {
  p.validate();
  check_dims(src, tgt);
  const std::size_t N = src.count(), M = tgt.count();
  if (N > 8 || M > 8) throw std::invalid_argument("brute_force_align: documents larger than 8 sentences");
  const double baseline = resolve_baseline(src, tgt, p);
  const std::size_t mb = p.max_block;

  // Link costs straight from block_embed/cosine, independent of the DP's tables.
  auto link_cost = [&](std::size_t i, std::size_t j, std::size_t m, std::size_t n) {
    if (m == 0 || n == 0) return p.skip_penalty * static_cast<double>(m + n);
    const auto a = block_embed(src, IndexBlock{i, m});
    const auto b = block_embed(tgt, IndexBlock{j, n});
    const double na = norm(a), nb = norm(b);
    const double cos = (na > 0.0 && nb > 0.0) ? cosine(a, b) : 0.0;
    return std::max((1.0 - cos) * static_cast<double>(m + n) / (2.0 * baseline), 0.0);
  };
  const std::size_t stride = mb + 1;
  std::vector<double> table((N + 1) * (M + 1) * stride * stride, kInf);
  auto slot = [&](std::size_t i, std::size_t j, std::size_t m, std::size_t n) {
    return ((i * (M + 1) + j) * stride + m) * stride + n;
  };
  for (std::size_t i = 0; i <= N; ++i)
    for (std::size_t j = 0; j <= M; ++j)
      for (std::size_t m = 0; m <= mb && i + m <= N; ++m)
        for (std::size_t n = 0; n <= mb && j + n <= M; ++n)
          if (p.shape_allowed(m, n)) table[slot(i, j, m, n)] = link_cost(i, j, m, n);

  // Depth-first in (m, n) order visits link sequences lexicographically, so
  // keeping only strict (cost, links) improvements honours the tie rule.
  std::vector<std::pair<std::size_t, std::size_t>> path, best_path;
  double best_cost = kInf;
  auto dfs = [&](auto&& self, std::size_t i, std::size_t j, double acc) -> void {
    if (i == N && j == M) {
      if (acc < best_cost || (acc == best_cost && path.size() < best_path.size())) {
        best_cost = acc;
        best_path = path;
      }
      return;
    }
    for (std::size_t m = 0; m <= mb && i + m <= N; ++m) {
      for (std::size_t n = 0; n <= mb && j + n <= M; ++n) {
        if (!p.shape_allowed(m, n)) continue;
        path.emplace_back(m, n);
        self(self, i + m, j + n, acc + table[slot(i, j, m, n)]);
        path.pop_back();
      }
    }
  };
  dfs(dfs, 0, 0, 0.0);

  Alignment out;
  std::size_t i = 0, j = 0;
  for (auto [m, n] : best_path) {
    out.links.push_back(AlignLink{IndexBlock{i, m}, IndexBlock{j, n}, table[slot(i, j, m, n)]});
    i += m;
    j += n;
  }
  return out;
}

EmbeddingMatrix downsample_pairs(const EmbeddingMatrix& m) {
  const std::size_t n = (m.count() + 1) / 2;
  std::vector<float> data;
  data.reserve(n * m.dim());
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t first = 2 * c;
    const auto v = block_embed(m, IndexBlock{first, std::min<std::size_t>(2, m.count() - first)});
    data.insert(data.end(), v.begin(), v.end());
  }
  return EmbeddingMatrix(n, m.dim(), std::move(data), m.normalized());
}

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  check_dims(src, tgt);
  SimilarityMatrix s{src.count(), tgt.count(), std::vector<double>(src.count() * tgt.count(), 0.0)};
  std::vector<double> tn(tgt.count());
  for (std::size_t j = 0; j < tgt.count(); ++j) tn[j] = norm(tgt.row(j));
  for (std::size_t i = 0; i < src.count(); ++i) {
    const auto u = src.row(i);
    const double nu = norm(u);
    for (std::size_t j = 0; j < tgt.count(); ++j) {
      if (nu == 0.0 || tn[j] == 0.0) continue;
      s.values[i * s.cols + j] = std::clamp(dot(u, tgt.row(j)) / (nu * tn[j]), -1.0, 1.0);
    }
  }
  return s;
}

void write_similarity_tsv(std::ostream& out, const SimilarityMatrix& s) {
  char buf[32];
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.6f", s.at(i, j));
      if (j) out << '\t';
      out << buf;
    }
    out << '\n';
  }
}

std::string check_alignment(const Alignment& a, std::size_t nsrc, std::size_t ntgt) {
  std::size_t i = 0, j = 0;
  for (std::size_t k = 0; k < a.links.size(); ++k) {
    const auto& l = a.links[k];
    const std::string where = "link " + std::to_string(k) + ": ";
    if (l.src.empty() && l.tgt.empty()) return where + "both sides empty";
    if (!l.src.empty() && l.src.first != i) return where + "source block does not continue at " + std::to_string(i);
    if (!l.tgt.empty() && l.tgt.first != j) return where + "target block does not continue at " + std::to_string(j);
    if ((l.src.empty() && l.src.first != i) || (l.tgt.empty() && l.tgt.first != j)) {
      return where + "empty block does not record its position";
    }
    if (!(l.cost >= 0.0)) return where + "negative or NaN cost";
    i += l.src.length;
    j += l.tgt.length;
    if (i > nsrc || j > ntgt) return where + "runs past the end of a document";
  }
  if (i != nsrc || j != ntgt) return "alignment does not cover both documents";
  return {};
}

void write_alignment(std::ostream& out, const Alignment& a) {
  char buf[32];
  for (const auto& l : a.links) {
    std::snprintf(buf, sizeof buf, "%.6f", l.cost);
    out << join_block(l.src) << '\t' << join_block(l.tgt) << '\t' << buf << '\n';
  }
}

void write_alignment_stanzas(std::ostream& out, std::span<const DocumentAlignment> docs) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d) out << '\n';
    out << "# " << docs[d].doc_id << '\n';
    write_alignment(out, docs[d].alignment);
  }
}

namespace {

IndexBlock parse_block(const std::string& field, std::size_t cursor, std::size_t line_no) {
  if (field == "-") return IndexBlock{cursor, 0};
  IndexBlock b{0, 0};
  std::stringstream ss(field);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || tok.empty()) {
      throw FormatError("alignment line " + std::to_string(line_no) + ": bad index '" + tok + "'");
    }
    if (b.length == 0) b.first = static_cast<std::size_t>(v);
    else if (v != b.end()) throw FormatError("alignment line " + std::to_string(line_no) + ": non-contiguous block");
    ++b.length;
  }
  if (b.length == 0) throw FormatError("alignment line " + std::to_string(line_no) + ": empty block");
  return b;
}

}  // namespace

std::vector<DocumentAlignment> read_alignment_stanzas(std::istream& in) {
  std::vector<DocumentAlignment> docs;
  std::string line;
  std::size_t line_no = 0, si = 0, ti = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      docs.push_back(DocumentAlignment{line.substr(2), {}});
      si = ti = 0;
      continue;
    }
    if (docs.empty()) docs.push_back(DocumentAlignment{"", {}});
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, '\t') || !std::getline(ss, b, '\t') || !std::getline(ss, c)) {
      throw FormatError("alignment line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    AlignLink l{parse_block(a, si, line_no), parse_block(b, ti, line_no), 0.0};
    try {
      l.cost = std::stod(c);
    } catch (const std::exception&) {
      throw FormatError("alignment line " + std::to_string(line_no) + ": bad cost '" + c + "'");
    }
    si = l.src.end();
    ti = l.tgt.end();
    docs.back().alignment.links.push_back(l);
  }
  return docs;
}

}  // namespace btx
