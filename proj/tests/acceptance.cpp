// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "btx/align.hpp"
#include "btx/knn.hpp"
#include "btx/margin.hpp"
#include "btx/metrics.hpp"
#include "btx/mnr.hpp"
#include "btx/pipeline.hpp"
#include "btx/preprocess.hpp"
#include "btx/selector.hpp"
#include "btx/synthetic.hpp"
#include "btx/utf8.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace btx;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Collects failed sub-checks; the first few are printed with the verdict.
struct Outcome {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  bool passed() const { return failures.empty(); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome dp_oracle() {
  Outcome o;
  Rng rng(2024);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(8), m = 1 + rng.index(8), dim = 2 + rng.index(8);
    const auto src = testing::random_unit_matrix(n, dim, rng.next());
    const auto tgt = testing::random_unit_matrix(m, dim, rng.next());
    AlignParams p;
    p.seed = rng.next();
    p.many_to_many = trial % 2 == 1;
    const double dp = align_full_dp(src, tgt, p).total_cost();
    const double bf = brute_force_align(src, tgt, p).total_cost();
    worst = std::max(worst, std::abs(dp - bf));
    o.expect(std::abs(dp - bf) <= 1e-9, "trial " + std::to_string(trial) + ": dp " + fmt("%.12f", dp) +
                                            " vs oracle " + fmt("%.12f", bf));
  }
  const double t = seconds_since(start);
  o.expect(t < 60.0, "took " + fmt("%.1f", t) + " s");
  o.detail = "200 documents, max |dp - oracle| " + fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s";
  return o;
}

SyntheticSpec recovery_spec(std::size_t n) {
  SyntheticSpec s;
  s.n_pairs = n;
  s.insert_rate = 0.1;
  s.merge_rate = 0.05;
  s.clean_cos_min = 0.9;
  s.noise_cos_max = 0.3;
  s.seed = 7;
  return s;
}

Outcome alignment_recovery() {
  Outcome o;
  const auto c = gen_synthetic(recovery_spec(500));
  const AlignParams p;
  const auto pr = alignment_f1(align_coarse_to_fine(c.src_embs, c.tgt_embs, p), c.gold);
  o.expect(pr.f1 >= 0.95, "F1 " + fmt("%.4f", pr.f1) + " < 0.95");

  const auto big = gen_synthetic(recovery_spec(2000));
  AlignStats stats;
  const auto a = align_coarse_to_fine(big.src_embs, big.tgt_embs, p, &stats);
  const double nm = double(big.src_embs.count()) * double(big.tgt_embs.count());
  const double frac = double(stats.cells) / nm;
  o.expect(frac < 0.2, "cells " + std::to_string(stats.cells) + " = " + fmt("%.3f", frac) + " N*M");
  o.expect(check_alignment(a, big.src_embs.count(), big.tgt_embs.count()).empty(), "2000-pair output is not a cover");
  o.detail = "F1 " + fmt("%.4f", pr.f1) + " (P " + fmt("%.4f", pr.precision) + ", R " + fmt("%.4f", pr.recall) +
             "); 2000-pair cells " + fmt("%.4f", frac) + " N*M, F1 " + fmt("%.4f", alignment_f1(a, big.gold).f1);
  return o;
}

Outcome filter_separation() {
  Outcome o;
  const auto lp = gen_labeled_pairs(1000, 1000, 256, 0.9, 0.3, 31);
  const double auc = ranking_auc(margin_scores(lp.src, lp.tgt), lp.clean);
  o.expect(auc >= 0.99, "margin AUC " + fmt("%.4f", auc));

  const auto hc = gen_hub_corpus(1000, 1000, 50, 256, 32);
  const double m = ranking_auc(margin_scores(hc.pairs.src, hc.pairs.tgt), hc.pairs.clean);
  const double r = ranking_auc(pair_cosines(hc.pairs.src, hc.pairs.tgt), hc.pairs.clean);
  o.expect(m >= r, "hub corpus: margin AUC " + fmt("%.4f", m) + " < raw " + fmt("%.4f", r));
  o.detail = "margin AUC " + fmt("%.4f", auc) + "; with hub: margin " + fmt("%.4f", m) + ", raw cosine " + fmt("%.4f", r);
  return o;
}

Outcome knn_exactness() {
  Outcome o;
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nq = 1 + rng.index(300), nd = 1 + rng.index(1200), dim = 1 + rng.index(96);
    const std::size_t k = 1 + rng.index(16);
    const auto q = testing::random_unit_matrix(nq, dim, rng.next());
    const auto d = testing::random_unit_matrix(nd, dim, rng.next());
    const KnnOptions opts{1 + rng.index(128), 1 + rng.index(512), 1 + rng.index(4)};
    const auto blocked = knn_cosine(q, d, k, opts);
    const auto naive = knn_cosine_naive(q, d, k);
    o.expect(blocked.indices == naive.indices, "trial " + std::to_string(trial) + ": indices differ");
    for (std::size_t i = 0; i < std::min(blocked.cosines.size(), naive.cosines.size()); ++i)
      worst = std::max(worst, std::abs(blocked.cosines[i] - naive.cosines[i]));
  }
  o.expect(worst <= 1e-7, "max cosine difference " + fmt("%.2e", worst));
  o.detail = "50 instances, max cosine difference " + fmt("%.2e", worst);
  return o;
}

Outcome gradient_correctness() {
  Outcome o;
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + rng.index(8), in = 2 + rng.index(8), out = 1 + rng.index(6);
    const auto src = testing::random_unit_matrix(n, in, rng.next());
    const auto tgt = testing::random_unit_matrix(n, in, rng.next());
    auto model = ProjectionModel::random(out, in, rng.next());
    model.scale = rng.uniform(0.5, 5.0);
    model.include_positive_in_denominator = rng.index(2) == 1;
    TrainConfig cfg;
    cfg.window = rng.index(3);
    cfg.random = 1 + rng.index(3);
    cfg.batch_size = n;
    cfg.seed = rng.next();
    const auto gc = testing::check_gradient(build_negative_sets(n, cfg).front(), src, tgt, model);
    worst = std::max(worst, gc.max_rel_error);
  }
  o.expect(worst < 1e-4, "max relative error " + fmt("%.2e", worst));
  const std::vector<double> pos{0.9};
  const std::vector<std::vector<double>> neg{{0.1, -0.2}};
  const double spot = mnr_loss(pos, neg, false);
  o.expect(std::abs(spot - (-0.2457)) <= 1e-4, "mnr_loss(0.9, [0.1, -0.2]) = " + fmt("%.6f", spot));
  o.detail = "25 instances, max relative error " + fmt("%.2e", worst) + "; spot value " + fmt("%.5f", spot);
  return o;
}

double precision_at_1(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt) {
  const auto nn = knn_cosine(src, tgt, 1);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < src.count(); ++i) hit += nn.indices[i] == i;
  return double(hit) / double(src.count());
}

Outcome trainer_convergence() {
  Outcome o;
  const std::size_t n_train = 192, n_test = 64;
  const auto lp = gen_separable_pairs(n_train + n_test, 384, 0.9, 0.1, 8);
  std::vector<std::size_t> train_rows(n_train), test_rows(n_test);
  for (std::size_t i = 0; i < n_train; ++i) train_rows[i] = i;
  for (std::size_t i = 0; i < n_test; ++i) test_rows[i] = n_train + i;

  TrainConfig cfg;
  cfg.window = 2;
  cfg.random = 2;
  cfg.batch_size = 32;
  cfg.epochs = 5;
  cfg.seed = 13;
  const auto init = ProjectionModel::random(128, 384, 3);
  const auto a = train_projection(lp.src.select(train_rows), lp.tgt.select(train_rows), cfg, init);
  const auto b = train_projection(lp.src.select(train_rows), lp.tgt.select(train_rows), cfg, init);

  const auto ts = forward_project(lp.src.select(test_rows), a.model);
  const auto tt = forward_project(lp.tgt.select(test_rows), a.model);
  const double p1 = precision_at_1(ts, tt);
  const double p1_init =
      precision_at_1(forward_project(lp.src.select(test_rows), init), forward_project(lp.tgt.select(test_rows), init));
  o.expect(p1 == 1.0, "held-out precision@1 " + fmt("%.4f", p1));
  o.expect(a.epoch_loss.size() == 5 && a.epoch_loss.back() < a.epoch_loss.front(), "epoch-5 loss not below epoch-1 loss");
  o.expect(a.model.weight == b.model.weight && a.epoch_loss == b.epoch_loss, "reruns differ");
  o.detail = "held-out P@1 " + fmt("%.4f", p1) + " (untrained " + fmt("%.4f", p1_init) + "), loss epoch 1 " + fmt("%.4f", a.epoch_loss.front()) + " -> epoch 5 " +
             fmt("%.4f", a.epoch_loss.back()) + ", reruns bit-identical";
  return o;
}

std::size_t lcs_brute(const std::u32string& a, const std::u32string& b) {
  const auto& s = a.size() <= b.size() ? a : b;
  const auto& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    std::size_t len = 0, j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < s.size() && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      while (j < t.size() && t[j] != s[i]) ++j;
      if (j == t.size()) ok = false;
      else ++j, ++len;
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

Bitext random_corpus(Rng& rng) {
  static const char* words[] = {"a", "b", "hello", "\xe1\x9e\x80\xe1\x9e\x81", "  ", "x y", "\xd8\xa7\xd8\xa8", "hello world"};
  Bitext b;
  const std::size_t n = rng.index(30);
  for (std::size_t i = 0; i < n; ++i) {
    auto pick = [&] {
      std::string s;
      const std::size_t k = 1 + rng.index(3);
      for (std::size_t j = 0; j < k; ++j) s += std::string(words[rng.index(std::size(words))]) + (rng.index(2) ? " " : "  ");
      return s;
    };
    b.push_back({pick(), pick()});
  }
  return b;
}

Outcome preprocess_suite() {
  Outcome o;
  // Examples.
  o.expect(deduplicate({{"a", "b"}, {"a", "b"}}) == Bitext{{"a", "b"}}, "dedup exact");
  o.expect(deduplicate({{"a  b", "x"}, {"a b", "x"}}).size() == 1, "dedup whitespace");
  const Bitext uniq{{"a", "b"}, {"c", "d"}};
  o.expect(deduplicate(uniq) == uniq, "dedup unique corpus");
  o.expect(overlap_ratio("abc", "abc") == 1.0, "overlap identical");
  o.expect(overlap_ratio("abcd", "wxyz") == 0.0, "overlap disjoint");
  o.expect(std::abs(overlap_ratio("hello world", "hello there") - 7.0 / 11.0) < 1e-12, "overlap hello");
  o.expect(filter_overlap({{"same", "same"}}).empty(), "identical pair kept");
  o.expect(filter_overlap({{"abc", "xyz"}}).size() == 1, "disjoint pair removed");
  o.expect(filter_overlap({{"abcdefghij", "abcdefghiX"}}, 0.9).size() == 1, "ratio 0.9 removed");
  o.expect(detect_script("hello") == "en", "script en");
  o.expect(detect_script("\xe1\x9e\x9f\xe1\x9e\xbd\xe1\x9e\x9f\xe1\x9f\x92\xe1\x9e\x8f\xe1\x9e\xb8") == "km", "script km");
  o.expect(detect_script("1234 !!") == "unk", "script unk");
  const LangFilterOptions lang;
  o.expect(filter_lang({{"x", "hello world"}}, lang).size() == 1, "English side kept");
  o.expect(filter_lang({{"x", "\xe1\x9e\x80\xe1\x9e\x81"}}, lang).empty(), "Khmer English side kept");
  const std::vector<LidPrediction> pred{{{"km", std::nullopt}, {"en", 0.2}}};
  o.expect(filter_lang({{"x", "y"}}, lang, &pred).size() == 1, "low-confidence en prediction removed");

  // Idempotence.
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_corpus(rng);
    const auto d = deduplicate(c);
    const auto f = filter_overlap(c);
    const auto l = filter_lang(c, lang);
    o.expect(deduplicate(d) == d && filter_overlap(f) == f && filter_lang(l, lang) == l,
             "filter not idempotent on corpus " + std::to_string(trial));
  }

  // LCS oracle.
  const std::u32string alphabet = U"ab កខا";
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string a, b;
    for (std::size_t i = rng.index(11); i > 0; --i) a.push_back(alphabet[rng.index(alphabet.size())]);
    for (std::size_t i = rng.index(11); i > 0; --i) b.push_back(alphabet[rng.index(alphabet.size())]);
    const std::size_t longest = std::max(a.size(), b.size());
    const double expect = longest == 0 ? 1.0 : double(lcs_brute(a, b)) / double(longest);
    mismatches += std::abs(overlap_ratio(utf8::encode(a), utf8::encode(b)) - expect) > 1e-12;
  }
  o.expect(mismatches == 0, std::to_string(mismatches) + " LCS oracle mismatches");
  o.detail = "examples, idempotence on 100 corpora, 200 LCS oracle pairs";
  return o;
}

Outcome subsampler_properties() {
  Outcome o;
  auto tokens = [](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += i ? " w" : "w";
    return s;
  };
  const ScoredBitext ex{{"a", tokens(3), 0.9}, {"b", tokens(2), 0.8}, {"c", tokens(2), 0.7}};
  o.expect(subsample(ex, 5).size() == 2, "greedy [3,2,2]@5 did not give 2 pairs");

  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    ScoredBitext s;
    for (std::size_t i = rng.index(50); i > 0; --i) s.push_back({"s", tokens(rng.index(9)), double(rng.index(7))});
    const std::uint64_t budget = rng.index(80);
    const auto sel = subsample_indices(s, budget);
    std::uint64_t used = 0;
    for (auto i : sel) used += count_tokens_en(s[i].tgt);
    o.expect(used <= budget, "budget exceeded in trial " + std::to_string(trial));
    std::vector<std::size_t> order(s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a].score > s[b].score; });
    std::vector<std::size_t> prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sel.size()));
    std::sort(prefix.begin(), prefix.end());
    o.expect(prefix == sel, "prefix property fails in trial " + std::to_string(trial));
  }

  // Default budgets through the configuration path.
  testing::TempDir dir;
  write_scored(dir / "s.tsv", ex);
  RunContext ctx;
  ctx.out = dir / "out";
  ctx.config.set("subsample.budgets", "2000000,3000000,5000000,7000000");
  const auto rep = cmd_subsample({dir / "s.tsv"}, ctx);
  std::map<std::string, std::string> r(rep.entries().begin(), rep.entries().end());
  for (auto b : kDefaultBudgets)
    o.expect(r.count("budget." + std::to_string(b) + ".pairs") == 1, "budget " + std::to_string(b) + " not run");
  RunContext defaults;
  defaults.out = dir / "out2";
  const auto rep2 = cmd_subsample({dir / "s.tsv"}, defaults);
  std::map<std::string, std::string> r2(rep2.entries().begin(), rep2.entries().end());
  o.expect(r2.count("config.subsample.budgets") && r2["config.subsample.budgets"] == "2000000,3000000,5000000,7000000",
           "default budgets are not 2,3,5,7 million");
  o.detail = "greedy example, 300 random corpora, budgets 2/3/5/7 million accepted";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto start = Clock::now();
  testing::TempDir dir;
  auto ctx = [&](const std::string& sub) {
    RunContext c;
    c.out = dir / sub;
    c.config.set("seed", "17");
    c.config.set("jobs", "4");
    return c;
  };
  auto gen = ctx("gen");
  gen.config.set("gen.docs", "20");
  gen.config.set("gen.n_pairs", "150");
  gen.config.set("gen.insert_rate", "0.2");
  gen.config.set("gen.merge_rate", "0.05");
  cmd_gen_synthetic(gen);
  cmd_align({dir / "gen" / "manifest.tsv"}, ctx("align"));
  cmd_preprocess({dir / "align" / "bitext.tsv", dir / "align" / "bitext.src.emb", dir / "align" / "bitext.tgt.emb", {}},
                 ctx("pre"));
  cmd_score({dir / "pre" / "bitext.tsv", dir / "pre" / "bitext.src.emb", dir / "pre" / "bitext.tgt.emb", {}},
            ctx("score"));
  auto sub = ctx("sub");
  sub.config.set("subsample.budget_fraction", "0.5");
  const auto rep = cmd_subsample({dir / "score" / "scored.tsv"}, sub);

  // Ground truth: clean iff the pair is a labelled clean candidate.
  const auto candidates = read_bitext(dir / "gen" / "candidates.tsv");
  const auto labels = read_labels(dir / "gen" / "labels.txt");
  std::set<std::pair<std::string, std::string>> clean;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (labels[i]) clean.insert({candidates[i].src, candidates[i].tgt});
  const double in_frac = double(clean.size()) / double(candidates.size());

  auto fraction = [&](const std::vector<std::string>& s, const std::vector<std::string>& t) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < s.size(); ++i) c += clean.count({s[i], t[i]});
    return s.empty() ? 0.0 : double(c) / double(s.size());
  };
  std::string stem;
  for (const auto& [k, v] : rep.entries())
    if (k.rfind("budget.", 0) == 0) stem = "subsample_" + k.substr(7, k.find('.', 7) - 7);
  const auto out_src = read_lines(dir / "sub" / (stem + ".src"));
  const auto out_tgt = read_lines(dir / "sub" / (stem + ".tgt"));
  const double out_frac = fraction(out_src, out_tgt);
  std::vector<std::string> as, at;
  for (const auto& p : read_bitext(dir / "align" / "bitext.tsv")) as.push_back(p.src), at.push_back(p.tgt);
  const double aligned_frac = fraction(as, at);

  const double t = seconds_since(start);
  o.expect(!out_src.empty(), "empty subsample");
  o.expect(out_frac > in_frac, "output clean fraction " + fmt("%.4f", out_frac) + " <= input " + fmt("%.4f", in_frac));
  o.expect(t < 300.0, "took " + fmt("%.1f", t) + " s");
  o.detail = "clean fraction: input " + fmt("%.4f", in_frac) + ", aligned " + fmt("%.4f", aligned_frac) + ", output " +
             fmt("%.4f", out_frac) + " (" + std::to_string(out_src.size()) + " pairs), " + fmt("%.1f", t) + " s";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"dp oracle equivalence", dp_oracle},
      {"alignment recovery", alignment_recovery},
      {"filter separation", filter_separation},
      {"blocked knn exactness", knn_exactness},
      {"gradient correctness", gradient_correctness},
      {"trainer convergence", trainer_convergence},
      {"preprocess suite", preprocess_suite},
      {"subsampler properties", subsampler_properties},
      {"end-to-end pipeline", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    std::string line = std::string(o.passed() ? "PASS" : "FAIL") + " " + std::to_string(i + 1) + " " +
                       criteria[i].first + ": " + o.detail;
    for (std::size_t f = 0; f < std::min<std::size_t>(o.failures.size(), 3); ++f) line += " [" + o.failures[f] + "]";
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    failed += !o.passed();
  }
  return failed ? 1 : 0;
}
