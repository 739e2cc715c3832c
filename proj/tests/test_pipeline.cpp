#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <cstdlib>
#include <map>

#include "btx/error.hpp"
#include "btx/pipeline.hpp"
#include "support.hpp"

using namespace btx;
namespace fs = std::filesystem;

namespace {

// BTXEMB1 bytes as an external exporter would write them (little-endian host).
void write_raw_emb(const fs::path& p, std::uint32_t count, std::uint32_t dim, const std::vector<float>& values) {
  std::ofstream out(p, std::ios::binary);
  out.write("BTXEMB1\n", 8);
  out.write(reinterpret_cast<const char*>(&count), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 4));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> without_wall_time(std::map<std::string, std::string> r) {
  r.erase("wall_time_s");
  return r;
}

RunContext context(const fs::path& out, std::size_t jobs = 1) {
  RunContext ctx;
  ctx.out = out;
  ctx.config.set("jobs", std::to_string(jobs));
  return ctx;
}

// One document of n sentences whose two sides share embeddings.
void identical_doc(const testing::TempDir& dir, const std::string& id, std::size_t n) {
  std::vector<std::string> s, t;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back("src " + id + " " + std::to_string(i));
    t.push_back("tgt " + id + " " + std::to_string(i));
  }
  write_lines(dir / (id + ".src"), s);
  write_lines(dir / (id + ".tgt"), t);
  const auto e = testing::random_unit_matrix(n, 16, n * 31 + id.size());
  save_embeddings(e, dir / (id + ".src.emb"));
  save_embeddings(e, dir / (id + ".tgt.emb"));
}

std::string manifest_line(const std::string& id) {
  return id + "\t" + id + ".src\t" + id + ".tgt\t" + id + ".src.emb\t" + id + ".tgt.emb\n";
}

int run(const std::string& args) {
  const std::string cmd = std::string(BTXMINE_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("align: identical embeddings give the diagonal") {
  testing::TempDir dir;
  identical_doc(dir, "d1", 6);
  write_text(dir / "m.tsv", "# comment\n" + manifest_line("d1"));
  const auto r = cmd_align({dir / "m.tsv"}, context(dir / "out"));
  const auto bt = read_bitext(dir / "out" / "bitext.tsv");
  REQUIRE(bt.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(bt[i].src == "src d1 " + std::to_string(i));
    CHECK(bt[i].tgt == "tgt d1 " + std::to_string(i));
  }
  const auto rep = read_report(dir / "out" / "report.tsv");
  CHECK(rep.at("documents") == "1");
  CHECK(rep.at("links") == "6");
  CHECK(rep.at("null_links") == "0");
  CHECK(rep.at("config.align.max_block") == "3");
  CHECK(load_embeddings(dir / "out" / "bitext.src.emb").count() == 6);
}

TEST_CASE("align: empty manifest") {
  testing::TempDir dir;
  write_text(dir / "m.tsv", "");
  cmd_align({dir / "m.tsv"}, context(dir / "out"));
  const auto rep = read_report(dir / "out" / "report.tsv");
  CHECK(rep.at("documents") == "0");
  CHECK(rep.at("links") == "0");
  CHECK(rep.at("pairs") == "0");
  CHECK(read_bitext(dir / "out" / "bitext.tsv").empty());
}

TEST_CASE("align: a mismatched entry is rejected and named") {
  testing::TempDir dir;
  identical_doc(dir, "good", 4);
  identical_doc(dir, "bad", 4);
  write_lines(dir / "bad.src", {"only", "three", "lines"});
  write_text(dir / "m.tsv", manifest_line("good") + manifest_line("bad") + "broken line\n" + manifest_line("good"));
  cmd_align({dir / "m.tsv"}, context(dir / "out"));
  const auto rep = read_report(dir / "out" / "report.tsv");
  CHECK(rep.at("documents") == "1");
  CHECK(rep.at("documents_rejected") == "3");
  CHECK(rep.count("rejected.bad") == 1);
  CHECK(read_bitext(dir / "out" / "bitext.tsv").size() == 4);

  auto strict = context(dir / "out2");
  strict.strict = true;
  CHECK_THROWS_AS(cmd_align({dir / "m.tsv"}, strict), FormatError);
  CHECK_THROWS_AS(cmd_align({dir / "nothing.tsv"}, context(dir / "out3")), IoError);
}

TEST_CASE("align reads hand-encoded embedding files") {
  testing::TempDir dir;
  write_lines(dir / "h.src", {"a", "b"});
  write_lines(dir / "h.tgt", {"x", "y"});
  write_raw_emb(dir / "h.src.emb", 2, 3, {1, 0, 0, 0, 1, 0});
  write_raw_emb(dir / "h.tgt.emb", 2, 3, {0.9f, 0.1f, 0, 0.1f, 0.9f, 0});
  write_text(dir / "m.tsv", manifest_line("h"));
  cmd_align({dir / "m.tsv"}, context(dir / "out"));
  CHECK(read_bitext(dir / "out" / "bitext.tsv") == Bitext{{"a", "x"}, {"b", "y"}});
}

TEST_CASE("preprocess removes a self-identical pair") {
  testing::TempDir dir;
  write_bitext(dir / "b.tsv", {{"same text", "same text"}});
  cmd_preprocess({dir / "b.tsv", {}, {}, {}}, context(dir / "out"));
  CHECK(read_bitext(dir / "out" / "bitext.tsv").empty());
  const auto rep = read_report(dir / "out" / "report.tsv");
  CHECK(rep.at("removed_overlap") == "1");
  CHECK(rep.at("output") == "0");
}

TEST_CASE("preprocess carries embeddings through the filters") {
  testing::TempDir dir;
  write_bitext(dir / "b.tsv", {{"ក ខ", "one two"}, {"ក ខ", "one two"}, {"គ", "ឃ"}, {"ង", "three"}});
  save_embeddings(testing::basis(4, 4), dir / "s.emb");
  save_embeddings(testing::basis(4, 4), dir / "t.emb");
  cmd_preprocess({dir / "b.tsv", dir / "s.emb", dir / "t.emb", {}}, context(dir / "out"));
  const auto kept = load_embeddings(dir / "out" / "bitext.src.emb");
  REQUIRE(kept.count() == 2);
  CHECK(kept.row(0)[0] == 1.0f);
  CHECK(kept.row(1)[3] == 1.0f);
}

TEST_CASE("score, heatmap and eval") {
  testing::TempDir dir;
  write_bitext(dir / "b.tsv", {{"a", "x"}, {"b", "y"}, {"c", "z"}});
  save_embeddings(testing::basis(3, 5), dir / "s.emb");
  save_embeddings(testing::basis(3, 5), dir / "t.emb");
  auto ctx = context(dir / "score");
  ctx.config.set("score.k", "1");
  cmd_score({dir / "b.tsv", dir / "s.emb", dir / "t.emb", {}}, ctx);
  for (const auto& p : read_scored(dir / "score" / "scored.tsv")) CHECK(p.score == 1.0);

  save_embeddings(testing::basis(2, 2), dir / "h.emb");
  cmd_heatmap({dir / "h.emb", dir / "h.emb"}, context(dir / "heat"));
  CHECK(read_lines(dir / "heat" / "heatmap.tsv") == std::vector<std::string>{"1.000000\t0.000000", "0.000000\t1.000000"});

  write_labels(dir / "l.txt", {true, false, true});
  write_scored(dir / "sc.tsv", {{"a", "x", 0.9}, {"b", "y", 0.1}, {"c", "z", 0.5}});
  const auto r = cmd_eval({{}, {}, dir / "sc.tsv", dir / "l.txt"}, context(dir / "eval"));
  CHECK(read_report(dir / "eval" / "report.tsv").at("auc") == "1.000000");
  CHECK_THROWS_AS(cmd_eval({}, context(dir / "e2")), std::invalid_argument);
}

TEST_CASE("commands are reproducible and independent of the job count") {
  testing::TempDir dir;
  auto gen = context(dir / "gen");
  gen.config.set("gen.docs", "3");
  gen.config.set("gen.n_pairs", "40");
  gen.config.set("gen.dim", "64");
  gen.config.set("seed", "11");
  cmd_gen_synthetic(gen);
  auto gen2 = gen;
  gen2.out = dir / "gen2";
  gen2.config.set("jobs", "4");
  cmd_gen_synthetic(gen2);
  for (const char* f : {"manifest.tsv", "gold.txt", "candidates.tsv", "labels.txt", "doc0001.src.emb"})
    CHECK(slurp(dir / "gen" / f) == slurp(dir / "gen2" / f));

  cmd_align({dir / "gen" / "manifest.tsv"}, context(dir / "a1", 1));
  cmd_align({dir / "gen" / "manifest.tsv"}, context(dir / "a2", 3));
  for (const char* f : {"alignments.txt", "bitext.tsv", "bitext.src.emb", "bitext.tgt.emb"})
    CHECK(slurp(dir / "a1" / f) == slurp(dir / "a2" / f));
  CHECK(without_wall_time(read_report(dir / "a1" / "report.tsv")) ==
        without_wall_time(read_report(dir / "a2" / "report.tsv")));

  // Alignment F1 against the planted gold.
  cmd_eval({dir / "gen" / "gold.txt", dir / "a1" / "alignments.txt", {}, {}}, context(dir / "ev"));
  CHECK(std::stod(read_report(dir / "ev" / "report.tsv").at("f1")) >= 0.9);

  for (int rep = 0; rep < 2; ++rep) {
    auto t = context(dir / ("t" + std::to_string(rep)));
    t.config.set("train.epochs", "2");
    t.config.set("train.out_dim", "32");
    cmd_train({dir / "a1" / "bitext.src.emb", dir / "a1" / "bitext.tgt.emb"}, t);
  }
  CHECK(slurp(dir / "t0" / "model.bin") == slurp(dir / "t1" / "model.bin"));
  CHECK(slurp(dir / "t0" / "loss.tsv") == slurp(dir / "t1" / "loss.tsv"));

  cmd_score({dir / "a1" / "bitext.tsv", dir / "a1" / "bitext.src.emb", dir / "a1" / "bitext.tgt.emb",
             dir / "t0" / "model.bin"},
            context(dir / "s1", 1));
  cmd_score({dir / "a1" / "bitext.tsv", dir / "a1" / "bitext.src.emb", dir / "a1" / "bitext.tgt.emb",
             dir / "t0" / "model.bin"},
            context(dir / "s2", 4));
  CHECK(slurp(dir / "s1" / "scored.tsv") == slurp(dir / "s2" / "scored.tsv"));

  auto sub = context(dir / "sub");
  sub.config.set("subsample.budgets", "50,100");
  cmd_subsample({dir / "s1" / "scored.tsv"}, sub);
  CHECK(fs::exists(dir / "sub" / "subsample_50.src"));
  CHECK(fs::exists(dir / "sub" / "subsample_100.tgt"));
}

TEST_CASE("config values are validated") {
  testing::TempDir dir;
  write_bitext(dir / "b.tsv", {{"a", "x"}});
  save_embeddings(testing::basis(1, 2), dir / "s.emb");
  auto ctx = context(dir / "out");
  ctx.config.set("score.neighborhood", "sideways");
  CHECK_THROWS_AS(cmd_score({dir / "b.tsv", dir / "s.emb", dir / "s.emb", {}}, ctx), FormatError);
  auto ctx2 = context(dir / "out");
  ctx2.config.set("score.k", "many");
  CHECK_THROWS_AS(cmd_score({dir / "b.tsv", dir / "s.emb", dir / "s.emb", {}}, ctx2), FormatError);
  CHECK_THROWS_AS(cmd_score({dir / "b.tsv", dir / "none.emb", dir / "s.emb", {}}, context(dir / "o")), IoError);
}

TEST_CASE("command-line tool") {
  testing::TempDir dir;
  const std::string out = (dir / "gen").string();
  write_text(dir / "run.cfg", "# small corpus\ngen.docs = 2\ngen.n_pairs = 20\ngen.dim = 32\n");
  CHECK(run("gen-synthetic --config " + (dir / "run.cfg").string() + " --seed 4 --set gen.docs=1 --out " + out) == 0);
  const auto rep = read_report(dir / "gen" / "report.tsv");
  CHECK(rep.at("documents") == "1");
  CHECK(rep.at("config.seed") == "4");
  CHECK(rep.at("config.gen.n_pairs") == "20");

  CHECK(run("align --manifest " + out + "/manifest.tsv --jobs 2 --out " + (dir / "al").string()) == 0);
  CHECK(fs::exists(dir / "al" / "alignments.txt"));

  write_text(dir / "bad.cfg", "gen.docs = 1\ngen.dim = lots\n");
  CHECK(run("gen-synthetic --config " + (dir / "bad.cfg").string() + " --out " + (dir / "x").string()) != 0);
  write_text(dir / "typo.cfg", "gen.dcos = 1\n");
  CHECK(run("gen-synthetic --config " + (dir / "typo.cfg").string() + " --out " + (dir / "x").string()) != 0);
  CHECK(run("align --out " + (dir / "x").string()) != 0);
  CHECK(run("nonsense") != 0);
}
