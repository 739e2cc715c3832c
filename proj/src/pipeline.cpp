#include "btx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "btx/align.hpp"
#include "btx/error.hpp"
#include "btx/margin.hpp"
#include "btx/metrics.hpp"
#include "btx/mnr.hpp"
#include "btx/preprocess.hpp"
#include "btx/rng.hpp"
#include "btx/selector.hpp"
#include "btx/synthetic.hpp"

namespace btx {

namespace {

using Clock = std::chrono::steady_clock;

// Runs f(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// Resolved parameters, echoed into the report.
class Echo {
 public:
  explicit Echo(const Config& c) : c_(c) {}

  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    const auto v = c_.get_uint(key, fallback);
    items_.emplace_back(key, std::to_string(v));
    return v;
  }
  double real(const std::string& key, double fallback) {
    const auto v = c_.get_double(key, fallback);
    items_.emplace_back(key, format_fixed(v));
    return v;
  }
  bool flag(const std::string& key, bool fallback) {
    const auto v = c_.get_bool(key, fallback);
    items_.emplace_back(key, v ? "true" : "false");
    return v;
  }
  std::string choice(const std::string& key, const std::string& fallback, std::initializer_list<const char*> allowed) {
    auto v = c_.get_string(key, fallback);
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return v == a; })) {
      std::string msg = "config " + key + ": '" + v + "' is not one of";
      for (const char* a : allowed) msg += std::string(" ") + a;
      throw FormatError(msg);
    }
    items_.emplace_back(key, v);
    return v;
  }
  std::vector<std::uint64_t> uint_list(const std::string& key, std::span<const std::uint64_t> fallback) {
    auto v = c_.get_uint_list(key, fallback);
    std::string s;
    for (auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    items_.emplace_back(key, s);
    return v;
  }
  void record(const std::string& key, const std::string& value) { items_.emplace_back(key, value); }

  void finish(Report& r, Clock::time_point start) const {
    for (const auto& [k, v] : items_) r.add("config." + k, v);
    r.add("wall_time_s", std::chrono::duration<double>(Clock::now() - start).count());
  }

 private:
  const Config& c_;
  std::vector<std::pair<std::string, std::string>> items_;
};

Side parse_side(const std::string& s) { return s == "src" ? Side::Source : Side::Target; }

void prepare_out(const RunContext& ctx) {
  if (ctx.out.empty()) throw std::invalid_argument("an output directory (--out) is required");
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw IoError("cannot create " + ctx.out.string() + ": " + ec.message());
}

Report finish(Report r, const Echo& echo, Clock::time_point start, const RunContext& ctx) {
  echo.finish(r, start);
  r.write(ctx.out / "report.tsv");
  return r;
}

void require(const fs::path& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string("missing required input: ") + what);
}

std::pair<EmbeddingMatrix, EmbeddingMatrix> load_pair_embeddings(const fs::path& src, const fs::path& tgt,
                                                                 std::size_t rows) {
  auto s = load_embeddings(src);
  auto t = load_embeddings(tgt);
  if (s.count() != rows || t.count() != rows) {
    throw FormatError("embedding rows (" + std::to_string(s.count()) + ", " + std::to_string(t.count()) +
                      ") do not match the " + std::to_string(rows) + " bitext pairs");
  }
  return {std::move(s), std::move(t)};
}

AlignParams align_params(Echo& e, std::uint64_t seed) {
  AlignParams p;
  p.max_block = e.uint("align.max_block", p.max_block);
  p.skip_penalty = e.real("align.skip_penalty", p.skip_penalty);
  p.band_width = e.uint("align.band_width", p.band_width);
  p.full_dp_threshold = e.uint("align.full_dp_threshold", p.full_dp_threshold);
  p.baseline_samples = e.uint("align.baseline_samples", p.baseline_samples);
  p.seed = seed;
  p.validate();
  return p;
}

}  // namespace

const std::vector<std::string_view>& known_config_keys() {
  static const std::vector<std::string_view> keys{
      "seed",                 "jobs",
      "align.method",         "align.max_block",
      "align.skip_penalty",   "align.band_width",
      "align.full_dp_threshold", "align.baseline_samples",
      "preprocess.overlap_threshold", "preprocess.en_side",
      "preprocess.lang_strict", "preprocess.expected_other",
      "preprocess.min_confidence", "train.window",
      "train.random",         "train.batch_size",
      "train.lr",             "train.epochs",
      "train.momentum",       "train.out_dim",
      "train.init",           "train.scale",
      "train.include_positive", "score.k",
      "score.neighborhood",   "subsample.budgets",
      "subsample.budget_fraction", "subsample.en_side",
      "subsample.overflow",   "gen.docs",
      "gen.n_pairs",          "gen.dim",
      "gen.insert_rate",      "gen.merge_rate",
      "gen.clean_cos_min",    "gen.noise_cos_max",
  };
  return keys;
}

std::size_t RunContext::jobs() const { return std::max<std::uint64_t>(1, config.get_uint("jobs", 1)); }
std::uint64_t RunContext::seed() const { return config.get_uint("seed", 0); }

Manifest read_manifest(const fs::path& path) {
  Manifest m;
  const auto base = path.parent_path();
  const auto lines = read_lines(path);
  std::set<std::string> seen;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (normalize_whitespace(line).empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, '\t');) f.push_back(col);
    const std::string where = "line:" + std::to_string(n + 1);
    if (f.size() != 5) {
      m.issues.push_back({f.empty() || f[0].empty() ? where : f[0],
                          "expected 5 tab-separated columns, got " + std::to_string(f.size())});
      continue;
    }
    if (f[0].empty()) {
      m.issues.push_back({where, "empty doc_id"});
      continue;
    }
    if (!seen.insert(f[0]).second) {
      m.issues.push_back({f[0], "duplicate doc_id at " + where});
      continue;
    }
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    m.entries.push_back({f[0], resolve(f[1]), resolve(f[2]), resolve(f[3]), resolve(f[4]), n + 1});
  }
  return m;
}

bool load_document(const ManifestEntry& entry, LoadedDocument& doc, std::string& reason) {
  for (const fs::path* p : {&entry.src_sentences, &entry.tgt_sentences, &entry.src_embeddings, &entry.tgt_embeddings}) {
    if (!fs::is_regular_file(*p)) {
      reason = "missing file " + p->string();
      return false;
    }
  }
  try {
    doc.entry = entry;
    doc.src_sentences = read_lines(entry.src_sentences);
    doc.tgt_sentences = read_lines(entry.tgt_sentences);
    doc.src_embs = load_embeddings(entry.src_embeddings);
    doc.tgt_embs = load_embeddings(entry.tgt_embeddings);
  } catch (const std::exception& e) {
    reason = e.what();
    return false;
  }
  if (doc.src_sentences.size() != doc.src_embs.count()) {
    reason = "source has " + std::to_string(doc.src_sentences.size()) + " lines but " +
             std::to_string(doc.src_embs.count()) + " embedding rows";
    return false;
  }
  if (doc.tgt_sentences.size() != doc.tgt_embs.count()) {
    reason = "target has " + std::to_string(doc.tgt_sentences.size()) + " lines but " +
             std::to_string(doc.tgt_embs.count()) + " embedding rows";
    return false;
  }
  if (doc.src_embs.dim() != doc.tgt_embs.dim()) {
    reason = "embedding dims differ (" + std::to_string(doc.src_embs.dim()) + " vs " +
             std::to_string(doc.tgt_embs.dim()) + ")";
    return false;
  }
  return true;
}

Report cmd_align(const AlignInputs& in, const RunContext& ctx) {
  const auto start = Clock::now();
  require(in.manifest, "--manifest");
  Echo echo(ctx.config);
  const auto params = align_params(echo, ctx.seed());
  const auto method = echo.choice("align.method", "auto", {"auto", "full"});
  echo.record("seed", std::to_string(ctx.seed()));

  const Manifest manifest = read_manifest(in.manifest);
  if (ctx.strict && !manifest.issues.empty()) {
    throw FormatError("manifest entry " + manifest.issues.front().doc_id + ": " + manifest.issues.front().reason);
  }
  prepare_out(ctx);

  struct Result {
    bool ok = false;
    std::string reason;
    DocumentAlignment alignment;
    Bitext bitext;
    std::vector<float> src_rows, tgt_rows;
    std::size_t cells = 0;
  };
  std::vector<Result> results(manifest.entries.size());
  std::atomic<bool> abort{false};
  parallel_for(manifest.entries.size(), ctx.jobs(), [&](std::size_t i) {
    if (abort) return;
    auto& r = results[i];
    LoadedDocument doc;
    if (!load_document(manifest.entries[i], doc, r.reason)) {
      if (ctx.strict) abort = true;
      return;
    }
    AlignStats stats;
    const auto src = l2_normalize(doc.src_embs).matrix;
    const auto tgt = l2_normalize(doc.tgt_embs).matrix;
    r.alignment.doc_id = doc.entry.doc_id;
    r.alignment.alignment = method == "full" ? align_full_dp(src, tgt, params, &stats)
                                             : align_coarse_to_fine(src, tgt, params, &stats);
    r.cells = stats.cells;
    for (const auto& l : r.alignment.alignment.links) {
      if (l.is_null()) continue;
      r.bitext.push_back({join_block_text(doc.src_sentences, l.src), join_block_text(doc.tgt_sentences, l.tgt)});
      const auto s = block_embed(src, l.src);
      const auto t = block_embed(tgt, l.tgt);
      r.src_rows.insert(r.src_rows.end(), s.begin(), s.end());
      r.tgt_rows.insert(r.tgt_rows.end(), t.begin(), t.end());
    }
    r.ok = true;
  });

  Report report;
  report.add("command", std::string("align"));
  std::vector<ManifestIssue> rejected = manifest.issues;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok && !results[i].reason.empty()) rejected.push_back({manifest.entries[i].doc_id, results[i].reason});
  }
  if (ctx.strict && !rejected.empty()) {
    throw FormatError("manifest entry " + rejected.front().doc_id + ": " + rejected.front().reason);
  }

  std::vector<DocumentAlignment> docs;
  Bitext bitext;
  std::vector<float> src_rows, tgt_rows;
  std::size_t links = 0, null_links = 0, cells = 0, dim = 0;
  for (auto& r : results) {
    if (!r.ok) continue;
    links += r.alignment.alignment.links.size();
    null_links += r.alignment.alignment.links.size() - r.alignment.alignment.non_null_count();
    cells += r.cells;
    if (!r.bitext.empty()) dim = r.src_rows.size() / r.bitext.size();
    bitext.insert(bitext.end(), r.bitext.begin(), r.bitext.end());
    src_rows.insert(src_rows.end(), r.src_rows.begin(), r.src_rows.end());
    tgt_rows.insert(tgt_rows.end(), r.tgt_rows.begin(), r.tgt_rows.end());
    docs.push_back(std::move(r.alignment));
  }
  if (!bitext.empty() && src_rows.size() != bitext.size() * dim) {
    throw FormatError("documents in the manifest use different embedding dims");
  }

  {
    std::ostringstream os;
    write_alignment_stanzas(os, docs);
    write_text(ctx.out / "alignments.txt", os.str());
  }
  write_bitext(ctx.out / "bitext.tsv", bitext);
  if (dim == 0) dim = 1;
  save_embeddings(EmbeddingMatrix(bitext.size(), dim, std::move(src_rows), true), ctx.out / "bitext.src.emb");
  save_embeddings(EmbeddingMatrix(bitext.size(), dim, std::move(tgt_rows), true), ctx.out / "bitext.tgt.emb");

  report.add("documents", std::uint64_t{docs.size()});
  report.add("documents_rejected", std::uint64_t{rejected.size()});
  for (const auto& r : rejected) report.add("rejected." + r.doc_id, r.reason);
  report.add("links", std::uint64_t{links});
  report.add("null_links", std::uint64_t{null_links});
  report.add("null_link_rate", links ? double(null_links) / double(links) : 0.0);
  report.add("pairs", std::uint64_t{bitext.size()});
  report.add("dp_cells", std::uint64_t{cells});
  return finish(std::move(report), echo, start, ctx);
}

Report cmd_preprocess(const PreprocessInputs& in, const RunContext& ctx) {
  const auto start = Clock::now();
  require(in.bitext, "--bitext");
  if (in.src_emb.empty() != in.tgt_emb.empty()) throw std::invalid_argument("give both --src-emb and --tgt-emb, or neither");
  Echo echo(ctx.config);
  PreprocessOptions opts;
  opts.overlap_threshold = echo.real("preprocess.overlap_threshold", 0.9);
  opts.lang.en_side = parse_side(echo.choice("preprocess.en_side", "tgt", {"src", "tgt"}));
  opts.lang.strict = echo.flag("preprocess.lang_strict", false);
  opts.lang.expected_other = echo.choice("preprocess.expected_other", "km", {"km", "ps", "en", "unk"});
  opts.lang.min_confidence = echo.real("preprocess.min_confidence", 0.0);

  const Bitext bitext = read_bitext(in.bitext);
  std::vector<LidPrediction> lid;
  if (!in.lid.empty()) lid = read_lid(in.lid);
  EmbeddingMatrix src, tgt;
  if (!in.src_emb.empty()) std::tie(src, tgt) = load_pair_embeddings(in.src_emb, in.tgt_emb, bitext.size());
  prepare_out(ctx);

  PreprocessReport pr;
  const auto keep = preprocess_indices(bitext, opts, in.lid.empty() ? nullptr : &lid, &pr);
  write_bitext(ctx.out / "bitext.tsv", select_pairs(bitext, keep));
  if (!in.src_emb.empty()) {
    save_embeddings(src.select(keep), ctx.out / "bitext.src.emb");
    save_embeddings(tgt.select(keep), ctx.out / "bitext.tgt.emb");
  }

  Report report;
  report.add("command", std::string("preprocess"));
  report.add("input", std::uint64_t{pr.input});
  report.add("removed_duplicates", std::uint64_t{pr.removed_duplicates});
  report.add("removed_overlap", std::uint64_t{pr.removed_overlap});
  report.add("removed_lang", std::uint64_t{pr.removed_lang});
  report.add("output", std::uint64_t{pr.output});
  return finish(std::move(report), echo, start, ctx);
}

Report cmd_train(const TrainInputs& in, const RunContext& ctx) {
  const auto start = Clock::now();
  require(in.src_emb, "--src-emb");
  require(in.tgt_emb, "--tgt-emb");
  Echo echo(ctx.config);
  TrainConfig cfg;
  cfg.window = echo.uint("train.window", cfg.window);
  cfg.random = echo.uint("train.random", cfg.random);
  cfg.batch_size = echo.uint("train.batch_size", cfg.batch_size);
  cfg.lr = echo.real("train.lr", cfg.lr);
  cfg.epochs = echo.uint("train.epochs", cfg.epochs);
  cfg.momentum = echo.real("train.momentum", cfg.momentum);
  cfg.seed = ctx.seed();
  echo.record("seed", std::to_string(cfg.seed));
  cfg.validate();

  const auto src = load_embeddings(in.src_emb);
  const auto tgt = load_embeddings(in.tgt_emb);
  if (src.count() != tgt.count()) throw FormatError("source and target embeddings have different row counts");
  if (src.dim() != tgt.dim()) throw FormatError("source and target embeddings have different dims");
  const auto out_dim = echo.uint("train.out_dim", 256);
  const auto init_kind = echo.choice("train.init", "identity", {"identity", "random"});
  ProjectionModel init = init_kind == "identity" ? ProjectionModel::identity(out_dim, src.dim())
                                                 : ProjectionModel::random(out_dim, src.dim(), derive_seed(cfg.seed, 1));
  init.scale = echo.real("train.scale", 1.0);
  init.include_positive_in_denominator = echo.flag("train.include_positive", false);
  prepare_out(ctx);

  const auto result = train_projection(src, tgt, cfg, init);
  save_projection(result.model, ctx.out / "model.bin");
  std::string loss = "epoch\tmean_loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    loss += std::to_string(e + 1) + '\t' + format_fixed(result.epoch_loss[e], 9) + '\n';
  }
  write_text(ctx.out / "loss.tsv", loss);

  Report report;
  report.add("command", std::string("train"));
  report.add("pairs", std::uint64_t{src.count()});
  report.add("epochs", std::uint64_t{result.epoch_loss.size()});
  if (!result.epoch_loss.empty()) {
    report.add("first_epoch_loss", result.epoch_loss.front());
    report.add("last_epoch_loss", result.epoch_loss.back());
  }
  return finish(std::move(report), echo, start, ctx);
}

Report cmd_score(const ScoreInputs& in, const RunContext& ctx) {
  const auto start = Clock::now();
  require(in.bitext, "--bitext");
  require(in.src_emb, "--src-emb");
  require(in.tgt_emb, "--tgt-emb");
  Echo echo(ctx.config);
  ScoreOptions opts;
  opts.k = echo.uint("score.k", 4);
  if (opts.k == 0) throw FormatError("config score.k must be positive");
  opts.neighborhood = echo.choice("score.neighborhood", "cross", {"cross", "same"}) == "same" ? Neighborhood::Same
                                                                                              : Neighborhood::Cross;
  opts.jobs = ctx.jobs();

  const Bitext bitext = read_bitext(in.bitext);
  auto [src, tgt] = load_pair_embeddings(in.src_emb, in.tgt_emb, bitext.size());
  echo.record("model", in.model.empty() ? "none" : in.model.filename().string());
  if (!in.model.empty()) {
    const auto model = load_projection(in.model);
    src = forward_project(src, model);
    tgt = forward_project(tgt, model);
  }
  const auto ns = l2_normalize(src);
  const auto nt = l2_normalize(tgt);
  prepare_out(ctx);

  const auto scored = score_corpus(bitext, ns.matrix, nt.matrix, opts);
  write_scored(ctx.out / "scored.tsv", scored);

  Report report;
  report.add("command", std::string("score"));
  report.add("pairs", std::uint64_t{scored.size()});
  report.add("zero_rows", std::uint64_t{ns.zero_rows + nt.zero_rows});
  return finish(std::move(report), echo, start, ctx);
}

Report cmd_subsample(const SubsampleInputs& in, const RunContext& ctx) {
  const auto start = Clock::now();
  require(in.scored, "--scored");
  Echo echo(ctx.config);
  SubsampleOptions opts;
  opts.en_side = parse_side(echo.choice("subsample.en_side", "tgt", {"src", "tgt"}));
  opts.overflow = echo.choice("subsample.overflow", "stop", {"stop", "skip"}) == "skip" ? OverflowMode::Skip
                                                                                       : OverflowMode::Stop;
  const ScoredBitext scored = read_scored(in.scored);
  std::uint64_t total = 0;
  for (const auto& p : scored) total += count_tokens_en(side_text(p, opts.en_side));

  std::vector<std::uint64_t> budgets;
  if (ctx.config.has("subsample.budget_fraction")) {
    const double f = echo.real("subsample.budget_fraction", 1.0);
    if (!(f >= 0.0 && f <= 1.0)) throw FormatError("config subsample.budget_fraction must lie in [0, 1]");
    budgets.push_back(static_cast<std::uint64_t>(std::floor(f * static_cast<double>(total))));
  } else {
    budgets = echo.uint_list("subsample.budgets", kDefaultBudgets);
  }
  prepare_out(ctx);

  Report report;
  report.add("command", std::string("subsample"));
  report.add("input_pairs", std::uint64_t{scored.size()});
  report.add("input_tokens", total);
  for (auto b : budgets) {
    const auto idx = subsample_indices(scored, b, opts);
    std::vector<std::string> s, t;
    std::uint64_t tokens = 0;
    for (auto i : idx) {
      s.push_back(scored[i].src);
      t.push_back(scored[i].tgt);
      tokens += count_tokens_en(side_text(scored[i], opts.en_side));
    }
    const std::string stem = "subsample_" + std::to_string(b);
    write_lines(ctx.out / (stem + ".src"), s);
    write_lines(ctx.out / (stem + ".tgt"), t);
    report.add("budget." + std::to_string(b) + ".pairs", std::uint64_t{idx.size()});
    report.add("budget." + std::to_string(b) + ".tokens", tokens);
  }
  return finish(std::move(report), echo, start, ctx);
}

Report cmd_heatmap(const HeatmapInputs& in, const RunContext& ctx) {
  const auto start = Clock::now();
  require(in.src_emb, "--src-emb");
  require(in.tgt_emb, "--tgt-emb");
  Echo echo(ctx.config);
  const auto src = load_embeddings(in.src_emb);
  const auto tgt = load_embeddings(in.tgt_emb);
  prepare_out(ctx);
  const auto sim = similarity_matrix(src, tgt);
  std::ostringstream os;
  write_similarity_tsv(os, sim);
  write_text(ctx.out / "heatmap.tsv", os.str());

  Report report;
  report.add("command", std::string("heatmap"));
  report.add("rows", std::uint64_t{sim.rows});
  report.add("cols", std::uint64_t{sim.cols});
  return finish(std::move(report), echo, start, ctx);
}

namespace {

std::vector<DocumentAlignment> read_stanzas_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  return read_alignment_stanzas(in);
}

// Shifts every block so documents occupy disjoint index ranges.
void append_shifted(Alignment& into, const Alignment& a, std::size_t ds, std::size_t dt) {
  for (auto l : a.links) {
    l.src.first += ds;
    l.tgt.first += dt;
    into.links.push_back(l);
  }
}

std::pair<std::size_t, std::size_t> extent(const Alignment& a) {
  std::size_t s = 0, t = 0;
  for (const auto& l : a.links) {
    s = std::max(s, l.src.end());
    t = std::max(t, l.tgt.end());
  }
  return {s, t};
}

}  // namespace

Report cmd_eval(const EvalInputs& in, const RunContext& ctx) {
  const auto start = Clock::now();
  Echo echo(ctx.config);
  const bool align_mode = !in.gold.empty() || !in.pred.empty();
  const bool score_mode = !in.scored.empty() || !in.labels.empty();
  if (align_mode == score_mode) throw std::invalid_argument("eval needs either --gold and --pred, or --scored and --labels");

  Report report;
  report.add("command", std::string("eval"));
  if (align_mode) {
    require(in.gold, "--gold");
    require(in.pred, "--pred");
    const auto gold = read_stanzas_file(in.gold);
    const auto pred = read_stanzas_file(in.pred);
    Alignment g, p;
    std::size_t ds = 0, dt = 0, matched = 0;
    for (const auto& gd : gold) {
      auto it = std::find_if(pred.begin(), pred.end(), [&](const auto& d) { return d.doc_id == gd.doc_id; });
      const Alignment empty;
      const Alignment& pa = it == pred.end() ? empty : it->alignment;
      matched += it != pred.end();
      append_shifted(g, gd.alignment, ds, dt);
      append_shifted(p, pa, ds, dt);
      const auto [gs, gt] = extent(gd.alignment);
      const auto [ps, pt] = extent(pa);
      ds += std::max(gs, ps);
      dt += std::max(gt, pt);
    }
    const auto pr = alignment_f1(p, g);
    report.add("documents", std::uint64_t{gold.size()});
    report.add("documents_matched", std::uint64_t{matched});
    report.add("precision", pr.precision);
    report.add("recall", pr.recall);
    report.add("f1", pr.f1);
  } else {
    require(in.scored, "--scored");
    require(in.labels, "--labels");
    const auto scored = read_scored(in.scored);
    const auto labels = read_labels(in.labels);
    if (labels.size() != scored.size()) throw FormatError("labels and scored pairs differ in length");
    std::vector<double> s;
    for (const auto& x : scored) s.push_back(x.score);
    report.add("pairs", std::uint64_t{scored.size()});
    report.add("auc", ranking_auc(s, labels));
  }
  prepare_out(ctx);
  return finish(std::move(report), echo, start, ctx);
}

Report cmd_gen_synthetic(const RunContext& ctx) {
  const auto start = Clock::now();
  Echo echo(ctx.config);
  const auto docs = echo.uint("gen.docs", 1);
  SyntheticSpec spec;
  spec.n_pairs = echo.uint("gen.n_pairs", spec.n_pairs);
  spec.dim = echo.uint("gen.dim", spec.dim);
  spec.insert_rate = echo.real("gen.insert_rate", 0.1);
  spec.merge_rate = echo.real("gen.merge_rate", 0.05);
  spec.clean_cos_min = echo.real("gen.clean_cos_min", spec.clean_cos_min);
  spec.noise_cos_max = echo.real("gen.noise_cos_max", spec.noise_cos_max);
  echo.record("seed", std::to_string(ctx.seed()));
  spec.validate();
  prepare_out(ctx);

  std::vector<SyntheticCorpus> corpora(docs);
  parallel_for(docs, ctx.jobs(), [&](std::size_t d) {
    SyntheticSpec s = spec;
    s.seed = derive_seed(ctx.seed(), d);
    corpora[d] = gen_synthetic(s);
  });

  std::string manifest = "# doc_id\tsrc\ttgt\tsrc_emb\ttgt_emb\n";
  std::vector<DocumentAlignment> gold;
  Bitext candidates;
  std::vector<bool> labels;
  std::vector<float> cs, ct;
  std::size_t sentences = 0;
  for (std::size_t d = 0; d < docs; ++d) {
    auto& c = corpora[d];
    char id[32];
    std::snprintf(id, sizeof id, "doc%04zu", d);
    const std::string stem = id;
    write_lines(ctx.out / (stem + ".src"), c.src_sentences);
    write_lines(ctx.out / (stem + ".tgt"), c.tgt_sentences);
    save_embeddings(c.src_embs, ctx.out / (stem + ".src.emb"));
    save_embeddings(c.tgt_embs, ctx.out / (stem + ".tgt.emb"));
    manifest += stem + '\t' + stem + ".src\t" + stem + ".tgt\t" + stem + ".src.emb\t" + stem + ".tgt.emb\n";
    gold.push_back({stem, c.gold});
    candidates.insert(candidates.end(), c.candidates.begin(), c.candidates.end());
    labels.insert(labels.end(), c.candidate_clean.begin(), c.candidate_clean.end());
    cs.insert(cs.end(), c.candidate_src_embs.data().begin(), c.candidate_src_embs.data().end());
    ct.insert(ct.end(), c.candidate_tgt_embs.data().begin(), c.candidate_tgt_embs.data().end());
    sentences += c.src_sentences.size() + c.tgt_sentences.size();
  }
  write_text(ctx.out / "manifest.tsv", manifest);
  {
    std::ostringstream os;
    write_alignment_stanzas(os, gold);
    write_text(ctx.out / "gold.txt", os.str());
  }
  write_bitext(ctx.out / "candidates.tsv", candidates);
  write_labels(ctx.out / "labels.txt", labels);
  save_embeddings(EmbeddingMatrix(candidates.size(), spec.dim, std::move(cs), true), ctx.out / "candidates.src.emb");
  save_embeddings(EmbeddingMatrix(candidates.size(), spec.dim, std::move(ct), true), ctx.out / "candidates.tgt.emb");

  Report report;
  report.add("command", std::string("gen-synthetic"));
  report.add("documents", std::uint64_t{docs});
  report.add("sentences", std::uint64_t{sentences});
  report.add("candidates", std::uint64_t{candidates.size()});
  report.add("clean_candidates", std::uint64_t(std::count(labels.begin(), labels.end(), true)));
  return finish(std::move(report), echo, start, ctx);
}

}  // namespace btx
