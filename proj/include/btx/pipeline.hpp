#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "btx/config.hpp"
#include "btx/embedding.hpp"
#include "btx/textio.hpp"

namespace btx {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string doc_id;
  fs::path src_sentences;
  fs::path tgt_sentences;
  fs::path src_embeddings;
  fs::path tgt_embeddings;
  std::size_t line = 0;
};

struct ManifestIssue {
  std::string doc_id;  // `line:N` when the line has no usable id
  std::string reason;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<ManifestIssue> issues;
};

/// Five tab-separated columns: doc_id, src sentences, tgt sentences, src
/// embeddings, tgt embeddings. Relative paths resolve against the manifest's
/// directory. Malformed lines and duplicate ids become issues.
Manifest read_manifest(const fs::path& path);

struct LoadedDocument {
  ManifestEntry entry;
  std::vector<std::string> src_sentences;
  std::vector<std::string> tgt_sentences;
  EmbeddingMatrix src_embs;
  EmbeddingMatrix tgt_embs;
};

/// Reads and cross-checks one entry. On failure returns false and sets `reason`.
bool load_document(const ManifestEntry& entry, LoadedDocument& doc, std::string& reason);

/// Settings shared by every command. `jobs` and `seed` come from the config
/// (keys `jobs`, `seed`), which the command line has already overridden.
struct RunContext {
  Config config;
  fs::path out;
  bool strict = false;

  std::size_t jobs() const;
  std::uint64_t seed() const;
};

/// Every key a config file may set.
const std::vector<std::string_view>& known_config_keys();

struct AlignInputs {
  fs::path manifest;
};
struct PreprocessInputs {
  fs::path bitext;
  fs::path src_emb;  // optional; rows are carried through the filters
  fs::path tgt_emb;
  fs::path lid;      // optional sidecar predictions
};
struct TrainInputs {
  fs::path src_emb;
  fs::path tgt_emb;
};
struct ScoreInputs {
  fs::path bitext;
  fs::path src_emb;
  fs::path tgt_emb;
  fs::path model;  // optional projection checkpoint
};
struct SubsampleInputs {
  fs::path scored;
};
struct HeatmapInputs {
  fs::path src_emb;
  fs::path tgt_emb;
};
struct EvalInputs {
  fs::path gold;  // alignment stanzas, with `pred`
  fs::path pred;
  fs::path scored;  // scored bitext, with `labels`
  fs::path labels;
};

/// Each command writes its outputs and `report.tsv` under ctx.out and
/// returns the report. Inputs that cannot be read raise IoError or FormatError.
Report cmd_align(const AlignInputs& in, const RunContext& ctx);
Report cmd_preprocess(const PreprocessInputs& in, const RunContext& ctx);
Report cmd_train(const TrainInputs& in, const RunContext& ctx);
Report cmd_score(const ScoreInputs& in, const RunContext& ctx);
Report cmd_subsample(const SubsampleInputs& in, const RunContext& ctx);
Report cmd_heatmap(const HeatmapInputs& in, const RunContext& ctx);
Report cmd_eval(const EvalInputs& in, const RunContext& ctx);
Report cmd_gen_synthetic(const RunContext& ctx);

}  // namespace btx
