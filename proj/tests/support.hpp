#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "btx/embedding.hpp"
#include "btx/rng.hpp"

namespace testing {

inline btx::EmbeddingMatrix random_matrix(std::size_t n, std::size_t dim, std::uint64_t seed) {
  btx::Rng rng(seed);
  std::vector<float> data(n * dim);
  for (float& x : data) x = static_cast<float>(rng.normal());
  return btx::EmbeddingMatrix(n, dim, std::move(data));
}

inline btx::EmbeddingMatrix random_unit_matrix(std::size_t n, std::size_t dim, std::uint64_t seed) {
  return btx::l2_normalize(random_matrix(n, dim, seed)).matrix;
}

inline btx::EmbeddingMatrix from_rows(const std::vector<std::vector<float>>& rows, bool normalized = false) {
  const std::size_t dim = rows.empty() ? 1 : rows.front().size();
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return btx::EmbeddingMatrix(rows.size(), dim, std::move(data), normalized);
}

// Standard basis rows e_0..e_{n-1} in `dim` dimensions.
inline btx::EmbeddingMatrix basis(std::size_t n, std::size_t dim) {
  btx::EmbeddingMatrix m(n, dim);
  for (std::size_t i = 0; i < n; ++i) m.mutable_row(i)[i] = 1.0f;
  m.set_normalized(true);
  return m;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("btx_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
