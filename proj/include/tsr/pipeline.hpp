#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsr/core.hpp"
#include "tsr/segmentation.hpp"
#include "tsr/synthetic.hpp"
#include "tsr/training.hpp"
#include "tsr/vlm_client.hpp"

namespace tsr {

namespace fs = std::filesystem;

struct EvalConfig {
  int n_queries = 100;
  std::vector<int> pool_sizes = {100};
  std::vector<std::string> methods = {"model", "random"};
  int top_k = 10;
  // Directory holding <method>_pool<N>.ndjson judge files; empty uses the
  // built-in stand-in judge.
  std::string judgments_dir;
  // Precomputed sentence embeddings (NDJSON); empty uses the hash embedder.
  std::string sentence_embeddings;
  int histogram_bins = 8;
};

struct PipelineConfig {
  fs::path data_dir = "data";
  fs::path output_dir = "out";
  std::uint64_t seed = 7;
  bool generate_fixture = false;
  FixtureSpec fixture;
  SamplingConfig sampling;
  SegmentationConfig segmentation;
  std::string captioner = "synthetic";  // or "vlm"
  VlmClientConfig vlm;
  bool plots = false;
  TrainConfig train;
  int max_train_pairs = 0;  // 0 keeps every training pair
  std::string text_embeddings;  // optional precomputed caption vectors
  EvalConfig eval;

  // Relative paths resolve against `base_dir`.
  static PipelineConfig from_json_text(const std::string& text, const fs::path& base_dir = {});
  static PipelineConfig load(const fs::path& path);
  // Propagates the run seed into every seeded stage.
  void set_seed(std::uint64_t s);
  void validate() const;
};

// Single-combination filters from the command line.
struct RunFilter {
  std::optional<int> pool_size;
  std::optional<std::string> method;
};

void cmd_make_fixture(const PipelineConfig& cfg);
void cmd_windows(const PipelineConfig& cfg);
void cmd_segment(const PipelineConfig& cfg);
void cmd_caption(const PipelineConfig& cfg);
void cmd_train(const PipelineConfig& cfg);
void cmd_index(const PipelineConfig& cfg);
void cmd_query(const PipelineConfig& cfg, const RunFilter& filter = {});
void cmd_eval(const PipelineConfig& cfg, const RunFilter& filter = {});
void cmd_run_all(const PipelineConfig& cfg);

// Output locations, shared by the commands and their tests.
struct OutputLayout {
  fs::path root;
  fs::path windows_dir() const { return root / "windows"; }
  fs::path segments_dir() const { return root / "segments"; }
  fs::path plots_dir() const { return root / "plots"; }
  fs::path pairs_dir() const { return root / "pairs"; }
  fs::path checkpoint() const { return root / "model" / "checkpoint.bin"; }
  fs::path train_log() const { return root / "model" / "train_log.ndjson"; }
  fs::path index_file() const { return root / "index" / "test.idx"; }
  fs::path queries() const { return root / "queries" / "queries.ndjson"; }
  fs::path results(const std::string& method, int pool) const;
  fs::path judgments(const std::string& method, int pool) const;
  fs::path metrics(const std::string& method, int pool) const;
  fs::path histogram(const std::string& method, int pool) const;
};

}  // namespace tsr
