#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "btx/bitext.hpp"

namespace btx {

/// WMT-style English token budgets: 2, 3, 5 and 7 million.
inline constexpr std::array<std::uint64_t, 4> kDefaultBudgets{2'000'000, 3'000'000, 5'000'000, 7'000'000};

/// Number of maximal runs of non-whitespace characters.
std::size_t count_tokens_en(std::string_view sentence);

enum class OverflowMode {
  Stop,  // stop at the first pair that would exceed the budget
  Skip,  // skip it and keep scanning for pairs that still fit
};

struct SubsampleOptions {
  Side en_side = Side::Target;
  OverflowMode overflow = OverflowMode::Stop;
};

/// Indices of the selected pairs in original corpus order. Pairs are taken by
/// score descending (ties: lower index first) while the English token total
/// stays within `budget`.
std::vector<std::size_t> subsample_indices(const ScoredBitext& scored, std::uint64_t budget,
                                           const SubsampleOptions& opts = {});

Bitext subsample(const ScoredBitext& scored, std::uint64_t budget, const SubsampleOptions& opts = {});

}  // namespace btx
