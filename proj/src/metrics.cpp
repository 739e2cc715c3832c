#include "btx/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

namespace btx {

PrecisionRecall alignment_f1(const Alignment& pred, const Alignment& gold) {
  std::set<std::pair<IndexBlock, IndexBlock>> gold_links;
  for (const auto& l : gold.links) {
    if (!l.is_null()) gold_links.emplace(l.src, l.tgt);
  }
  std::size_t predicted = 0, correct = 0;
  for (const auto& l : pred.links) {
    if (l.is_null()) continue;
    ++predicted;
    if (gold_links.count({l.src, l.tgt})) ++correct;
  }
  PrecisionRecall r;
  if (predicted) r.precision = static_cast<double>(correct) / static_cast<double>(predicted);
  if (!gold_links.empty()) r.recall = static_cast<double>(correct) / static_cast<double>(gold_links.size());
  if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double ranking_auc(std::span<const double> scores, const std::vector<bool>& clean) {
  if (scores.size() != clean.size()) throw std::invalid_argument("ranking_auc: scores and labels differ in length");
  const auto n_clean = static_cast<std::size_t>(std::count(clean.begin(), clean.end(), true));
  const std::size_t n_noise = clean.size() - n_clean;
  if (n_clean == 0 || n_noise == 0) throw std::invalid_argument("ranking_auc: need both clean and noise items");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of average ranks (1-based) of the clean items.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (clean[order[t]]) rank_sum += avg;
    }
    i = j;
  }
  const double u = rank_sum - static_cast<double>(n_clean) * static_cast<double>(n_clean + 1) / 2.0;
  return u / (static_cast<double>(n_clean) * static_cast<double>(n_noise));
}

}  // namespace btx
