#include "btx/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "btx/simd.hpp"

namespace btx {

namespace {

std::uint32_t read_u32le(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim)
    : EmbeddingMatrix(count, dim, std::vector<float>(count * dim, 0.0f)) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data, bool normalized)
    : count_(count), dim_(dim), data_(std::move(data)), normalized_(normalized) {
  if (dim_ == 0) throw std::invalid_argument("EmbeddingMatrix: dim must be positive");
  if (data_.size() != count_ * dim_) {
    throw std::invalid_argument("EmbeddingMatrix: data length " + std::to_string(data_.size()) +
                                " != count*dim " + std::to_string(count_ * dim_));
  }
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> indices) const {
  std::vector<float> out;
  out.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    if (i >= count_) throw std::out_of_range("EmbeddingMatrix::select: row " + std::to_string(i));
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(indices.size(), dim_, std::move(out), normalized_);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 16) throw FormatError(path.string() + ": header truncated (need 16 bytes)");
  if (std::memcmp(bytes.data(), kEmbeddingMagic, sizeof kEmbeddingMagic) != 0) {
    throw FormatError(path.string() + ": bad magic (expected BTXEMB1)");
  }
  const std::uint32_t count = read_u32le(p + 8);
  const std::uint32_t dim = read_u32le(p + 12);
  if (dim == 0) throw FormatError(path.string() + ": dim is 0");

  const std::uint64_t want = std::uint64_t{count} * dim * 4;
  if (bytes.size() - 16 != want) {
    throw FormatError(path.string() + ": payload length " + std::to_string(bytes.size() - 16) +
                      " != count*dim*4 = " + std::to_string(want));
  }

  std::vector<float> data(std::size_t{count} * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(read_u32le(p + 16 + 4 * i));
  }
  return EmbeddingMatrix(count, dim, std::move(data));
}

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  std::string out(kEmbeddingMagic, sizeof kEmbeddingMagic);
  out.reserve(16 + m.data().size() * 4);
  put_u32le(out, static_cast<std::uint32_t>(m.count()));
  put_u32le(out, static_cast<std::uint32_t>(m.dim()));
  for (float v : m.data()) put_u32le(out, std::bit_cast<std::uint32_t>(v));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create embeddings file " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

double dot(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw std::invalid_argument("dot: dimension mismatch");
  return simd::dot(u.data(), v.data(), u.size());
}

double norm(std::span<const float> v) { return std::sqrt(simd::dot(v.data(), v.data(), v.size())); }

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw DomainError("cosine: zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

NormalizeResult l2_normalize(const EmbeddingMatrix& m) {
  NormalizeResult res{m, 0};
  for (std::size_t i = 0; i < m.count(); ++i) {
    auto r = res.matrix.mutable_row(i);
    const double n = norm(r);
    if (n == 0.0) {
      ++res.zero_rows;
      continue;
    }
    for (float& x : r) x = static_cast<float>(x / n);
  }
  res.matrix.set_normalized(true);
  return res;
}

std::vector<float> block_embed(const EmbeddingMatrix& m, IndexBlock b) {
  if (b.length == 0 || b.end() > m.count()) {
    throw std::out_of_range("block_embed: block [" + std::to_string(b.first) + ", " + std::to_string(b.end()) +
                            ") outside " + std::to_string(m.count()) + " rows");
  }
  auto first = m.row(b.first);
  if (b.length == 1) return {first.begin(), first.end()};

  std::vector<double> acc(m.dim(), 0.0);
  for (std::size_t i = b.first; i < b.end(); ++i) {
    auto r = m.row(i);
    for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += r[d];
  }
  const double n = std::sqrt(simd::dot(acc.data(), acc.data(), acc.size()));
  std::vector<float> out(m.dim(), 0.0f);
  if (n == 0.0) return out;
  for (std::size_t d = 0; d < acc.size(); ++d) out[d] = static_cast<float>(acc[d] / n);
  return out;
}

}  // namespace btx
