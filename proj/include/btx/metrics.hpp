#pragma once

#include <span>
#include <vector>

#include "btx/align.hpp"

namespace btx {

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Strict match: a predicted non-null link is correct only if both blocks
/// equal those of a gold non-null link. 0/0 counts as 0.
PrecisionRecall alignment_f1(const Alignment& pred, const Alignment& gold);

/// Mann-Whitney AUC: probability that a random clean item outscores a random
/// noise item, ties counting one half. Throws if either class is empty.
double ranking_auc(std::span<const double> scores, const std::vector<bool>& clean);

}  // namespace btx
