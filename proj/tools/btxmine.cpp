// btxmine: command-line driver for the mining pipeline.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "btx/pipeline.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> jobs;
  bool strict = false;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed (overrides config)");
  app->add_option("--jobs", c.jobs, "worker threads (overrides config)")->check(CLI::PositiveNumber);
  app->add_flag("--strict", c.strict, "fail on the first invalid input instead of skipping it");
  app->add_option("--out", c.out, "output directory")->required();
  app->add_option("--set", c.sets, "config override key=value (repeatable)");
}

btx::RunContext make_context(const Common& c) {
  btx::RunContext ctx;
  if (!c.config.empty()) ctx.config = btx::Config::load(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1), "--set " + kv);
  }
  if (c.seed) ctx.config.set("seed", std::to_string(*c.seed), "--seed");
  if (c.jobs) ctx.config.set("jobs", std::to_string(*c.jobs), "--jobs");
  ctx.config.check_keys(btx::known_config_keys());
  ctx.out = c.out;
  ctx.strict = c.strict;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bitext mining toolkit"};
  app.require_subcommand(1);
  Common common;

  btx::AlignInputs align_in;
  auto* align = app.add_subcommand("align", "sentence-align the document pairs of a manifest");
  align->add_option("--manifest", align_in.manifest, "document pair manifest (TSV)")->required();

  btx::PreprocessInputs pre_in;
  auto* pre = app.add_subcommand("preprocess", "deduplicate, drop copies and wrong-language pairs");
  pre->add_option("--bitext", pre_in.bitext, "src<TAB>tgt pairs")->required();
  pre->add_option("--src-emb", pre_in.src_emb, "source embeddings to filter alongside");
  pre->add_option("--tgt-emb", pre_in.tgt_emb, "target embeddings to filter alongside");
  pre->add_option("--lid", pre_in.lid, "language-id predictions, one line per pair");

  btx::TrainInputs train_in;
  auto* train = app.add_subcommand("train", "fit a projection head with the ranking loss");
  train->add_option("--src-emb", train_in.src_emb)->required();
  train->add_option("--tgt-emb", train_in.tgt_emb)->required();

  btx::ScoreInputs score_in;
  auto* score = app.add_subcommand("score", "margin-score a bitext");
  score->add_option("--bitext", score_in.bitext)->required();
  score->add_option("--src-emb", score_in.src_emb)->required();
  score->add_option("--tgt-emb", score_in.tgt_emb)->required();
  score->add_option("--model", score_in.model, "projection checkpoint applied before scoring");

  btx::SubsampleInputs sub_in;
  auto* sub = app.add_subcommand("subsample", "select top-scored pairs under token budgets");
  sub->add_option("--scored", sub_in.scored)->required();

  btx::HeatmapInputs heat_in;
  auto* heat = app.add_subcommand("heatmap", "cosine similarity matrix of two documents");
  heat->add_option("--src-emb", heat_in.src_emb)->required();
  heat->add_option("--tgt-emb", heat_in.tgt_emb)->required();

  btx::EvalInputs eval_in;
  auto* eval = app.add_subcommand("eval", "alignment F1 or filter AUC");
  eval->add_option("--gold", eval_in.gold, "gold alignment stanzas");
  eval->add_option("--pred", eval_in.pred, "predicted alignment stanzas");
  eval->add_option("--scored", eval_in.scored, "scored bitext");
  eval->add_option("--labels", eval_in.labels, "0/1 clean labels");

  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic corpus with planted alignments");

  for (auto* sc : {align, pre, train, score, sub, heat, eval, gen}) add_common(sc, common);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto ctx = make_context(common);
    btx::Report report;
    if (*align) report = btx::cmd_align(align_in, ctx);
    else if (*pre) report = btx::cmd_preprocess(pre_in, ctx);
    else if (*train) report = btx::cmd_train(train_in, ctx);
    else if (*score) report = btx::cmd_score(score_in, ctx);
    else if (*sub) report = btx::cmd_subsample(sub_in, ctx);
    else if (*heat) report = btx::cmd_heatmap(heat_in, ctx);
    else if (*eval) report = btx::cmd_eval(eval_in, ctx);
    else report = btx::cmd_gen_synthetic(ctx);
    std::cout << report.str();
  } catch (const std::exception& e) {
    std::cerr << "btxmine: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
