#include "btx/selector.hpp"

#include <algorithm>
#include <numeric>

#include "btx/utf8.hpp"

namespace btx {

std::size_t count_tokens_en(std::string_view sentence) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : sentence) {
    const bool space = utf8::is_space(static_cast<unsigned char>(c));
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

std::vector<std::size_t> subsample_indices(const ScoredBitext& scored, std::uint64_t budget,
                                           const SubsampleOptions& opts) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });

  std::vector<std::size_t> picked;
  std::uint64_t used = 0;
  for (std::size_t i : order) {
    const std::uint64_t tokens = count_tokens_en(side_text(scored[i], opts.en_side));
    if (used + tokens > budget) {
      if (opts.overflow == OverflowMode::Stop) break;
      continue;
    }
    used += tokens;
    picked.push_back(i);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

Bitext subsample(const ScoredBitext& scored, std::uint64_t budget, const SubsampleOptions& opts) {
  Bitext out;
  for (std::size_t i : subsample_indices(scored, budget, opts)) out.push_back({scored[i].src, scored[i].tgt});
  return out;
}

}  // namespace btx
