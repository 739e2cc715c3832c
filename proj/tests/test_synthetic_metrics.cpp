#include <doctest.h>

#include <cmath>
#include <set>

#include "btx/align.hpp"
#include "btx/metrics.hpp"
#include "btx/preprocess.hpp"
#include "btx/rng.hpp"
#include "btx/synthetic.hpp"

using namespace btx;

namespace {

double max_cross(const EmbeddingMatrix& a, std::size_t row, const EmbeddingMatrix& b) {
  double m = -1;
  for (std::size_t j = 0; j < b.count(); ++j) m = std::max(m, dot(a.row(row), b.row(j)));
  return m;
}

}  // namespace

TEST_CASE("gen_synthetic honours its cosine bounds and gold cover") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SyntheticSpec spec;
    spec.n_pairs = 200;
    spec.dim = 128;
    spec.insert_rate = 0.15;
    spec.merge_rate = 0.1;
    spec.seed = seed;
    const auto c = gen_synthetic(spec);
    CHECK(check_alignment(c.gold, c.src_embs.count(), c.tgt_embs.count()).empty());
    CHECK(c.src_sentences.size() == c.src_embs.count());
    CHECK(c.tgt_sentences.size() == c.tgt_embs.count());
    for (const auto& l : c.gold.links) {
      if (l.is_null()) {
        if (!l.src.empty()) CHECK(max_cross(c.src_embs, l.src.first, c.tgt_embs) <= spec.noise_cos_max);
        if (!l.tgt.empty()) CHECK(max_cross(c.tgt_embs, l.tgt.first, c.src_embs) <= spec.noise_cos_max);
      } else {
        CHECK(cosine(block_embed(c.src_embs, l.src), block_embed(c.tgt_embs, l.tgt)) >= spec.clean_cos_min);
      }
    }
    REQUIRE(c.candidates.size() == c.candidate_clean.size());
    REQUIRE(c.candidate_src_embs.count() == c.candidates.size());
    for (std::size_t i = 0; i < c.candidates.size(); ++i) {
      const double cs = cosine(c.candidate_src_embs.row(i), c.candidate_tgt_embs.row(i));
      if (c.candidate_clean[i]) CHECK(cs >= spec.clean_cos_min);
      else CHECK(cs <= spec.noise_cos_max);
    }
    // Sentences are unique and each side is in its own script.
    CHECK(std::set<std::string>(c.src_sentences.begin(), c.src_sentences.end()).size() == c.src_sentences.size());
    CHECK(detect_script(c.src_sentences.front()) == "km");
    CHECK(detect_script(c.tgt_sentences.front()) == "en");
  }
}

TEST_CASE("gen_synthetic special cases") {
  SyntheticSpec spec;
  spec.n_pairs = 50;
  spec.dim = 64;
  const auto diag = gen_synthetic(spec);
  REQUIRE(diag.gold.links.size() == 50);
  for (std::size_t k = 0; k < 50; ++k) {
    CHECK(diag.gold.links[k].src == IndexBlock{k, 1});
    CHECK(diag.gold.links[k].tgt == IndexBlock{k, 1});
  }
  spec.n_pairs = 0;
  const auto empty = gen_synthetic(spec);
  CHECK(empty.gold.links.empty());
  CHECK(empty.src_embs.count() == 0);

  spec.n_pairs = 80;
  spec.insert_rate = 0.2;
  spec.seed = 3;
  const auto a = gen_synthetic(spec), b = gen_synthetic(spec);
  CHECK(a.src_embs == b.src_embs);
  CHECK(a.tgt_embs == b.tgt_embs);
  CHECK(a.src_sentences == b.src_sentences);
  CHECK(a.candidates == b.candidates);

  SyntheticSpec bad;
  bad.clean_cos_min = 0.2;
  CHECK_THROWS_AS(gen_synthetic(bad), std::invalid_argument);
  bad = SyntheticSpec{};
  bad.insert_rate = 0.6;
  bad.merge_rate = 0.5;
  CHECK_THROWS_AS(gen_synthetic(bad), std::invalid_argument);
  // Too few dimensions to keep 500 noise rows below the bound.
  bad = SyntheticSpec{};
  bad.n_pairs = 500;
  bad.dim = 4;
  bad.insert_rate = 0.5;
  CHECK_THROWS_AS(gen_synthetic(bad), std::invalid_argument);
}

TEST_CASE("labelled, hub and separable generators") {
  const auto lp = gen_labeled_pairs(100, 120, 64, 0.9, 0.3, 2);
  REQUIRE(lp.clean.size() == 220);
  std::size_t clean = 0;
  for (std::size_t i = 0; i < 220; ++i) {
    if (lp.clean[i]) {
      ++clean;
      CHECK(dot(lp.src.row(i), lp.tgt.row(i)) >= 0.9);
    } else {
      CHECK(max_cross(lp.src, i, lp.tgt) <= 0.3);
      CHECK(max_cross(lp.tgt, i, lp.src) <= 0.3);
    }
  }
  CHECK(clean == 100);

  const auto hc = gen_hub_corpus(50, 60, 10, 64, 1);
  CHECK(hc.hub_rows.size() == 10);
  for (auto r : hc.hub_rows) {
    CHECK_FALSE(hc.pairs.clean[r]);
    CHECK(std::equal(hc.hub.begin(), hc.hub.end(), hc.pairs.tgt.row(r).begin()));
  }
  for (std::size_t i = 0; i < hc.pairs.src.count(); ++i) CHECK(dot(hc.hub, hc.pairs.src.row(i)) >= 0.6 - 1e-6);

  const auto sp = gen_separable_pairs(40, 64, 0.9, 0.1, 5);
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(dot(sp.src.row(i), sp.tgt.row(i)) >= 0.9);
    for (std::size_t j = 0; j < 40; ++j)
      if (j != i) CHECK(dot(sp.tgt.row(i), sp.src.row(j)) <= 0.1);
  }
  CHECK_THROWS_AS(gen_separable_pairs(64, 64, 0.9, 0.1, 5), std::invalid_argument);
}

TEST_CASE("alignment_f1") {
  Alignment gold;
  gold.links = {{IndexBlock{0, 1}, IndexBlock{0, 1}, 0}, {IndexBlock{1, 1}, IndexBlock{1, 1}, 0}};
  auto pr = alignment_f1(gold, gold);
  CHECK(pr.precision == 1.0);
  CHECK(pr.recall == 1.0);
  CHECK(pr.f1 == 1.0);

  Alignment none;
  none.links = {{IndexBlock{0, 2}, IndexBlock{0, 0}, 0}, {IndexBlock{2, 0}, IndexBlock{0, 2}, 0}};
  pr = alignment_f1(none, gold);
  CHECK(pr.precision == 0.0);
  CHECK(pr.recall == 0.0);
  CHECK(pr.f1 == 0.0);

  Alignment half;
  half.links = {{IndexBlock{0, 1}, IndexBlock{0, 1}, 0}, {IndexBlock{1, 1}, IndexBlock{1, 2}, 0}};
  pr = alignment_f1(half, gold);
  CHECK(pr.precision == 0.5);
  CHECK(pr.recall == 0.5);
  CHECK(pr.f1 == 0.5);
}

TEST_CASE("alignment_f1 is symmetric for equal-size covers") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    // Two random 1-1/2-1 covers of the same documents.
    auto cover = [&](std::size_t links) {
      Alignment a;
      std::size_t i = 0, j = 0;
      for (std::size_t k = 0; k < links; ++k) {
        const std::size_t m = 1 + rng.index(2);
        a.links.push_back({IndexBlock{i, m}, IndexBlock{j, 1}, 0});
        i += m;
        ++j;
      }
      return a;
    };
    const std::size_t n = 1 + rng.index(15);
    const auto a = cover(n), b = cover(n);
    CHECK(alignment_f1(a, b).f1 == alignment_f1(b, a).f1);
  }
}

TEST_CASE("ranking_auc") {
  const std::vector<double> sep{3, 2, 1, 0};
  CHECK(ranking_auc(sep, {true, true, false, false}) == 1.0);
  const std::vector<double> flat{1, 1, 1, 1};
  CHECK(ranking_auc(flat, {true, false, true, false}) == 0.5);
  const std::vector<double> hand{2, 1, 1.5};
  CHECK(ranking_auc(hand, {true, true, false}) == 0.5);
  CHECK_THROWS_AS(ranking_auc(hand, {true, true, true}), std::invalid_argument);
  CHECK_THROWS_AS(ranking_auc(hand, {true, false}), std::invalid_argument);

  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(30);
    std::vector<bool> l(30);
    for (std::size_t i = 0; i < 30; ++i) {
      s[i] = std::round(rng.uniform(-3, 3) * 4) / 4;
      l[i] = i % 3 == 0;
    }
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) t[i] = std::exp(s[i]) * 5 + 1;
    CHECK(ranking_auc(s, l) == doctest::Approx(ranking_auc(t, l)).epsilon(1e-15));
  }
}
