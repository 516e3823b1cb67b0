#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tsr/encoder.hpp"
#include "tsr/segmentation.hpp"
#include "tsr/training.hpp"

namespace tsr {

// Unit-norm segment embeddings, rows ordered by (window_id, a, b).
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  // Sorts and deduplicates; `duplicates` receives the number of dropped rows.
  EmbeddingIndex(std::vector<SegmentSpec> specs, Matrix rows, std::size_t* duplicates = nullptr);

  std::size_t size() const { return specs_.size(); }
  int dim() const { return static_cast<int>(rows_.cols()); }
  const std::vector<SegmentSpec>& specs() const { return specs_; }
  const Matrix& rows() const { return rows_; }
  // Row indices of a window's segments; empty if the window is unknown.
  std::span<const std::size_t> window_rows(const std::string& window_id) const;
  std::vector<std::string> window_ids() const;
  // Row of an exact spec, or -1.
  std::ptrdiff_t find(const SegmentSpec& spec) const;

  // <path>: header + little-endian float32 rows; <path>.specs.ndjson: specs.
  void save(const std::filesystem::path& path) const;
  static EmbeddingIndex load(const std::filesystem::path& path);

 private:
  std::vector<SegmentSpec> specs_;
  Matrix rows_;
  std::map<std::string, std::vector<std::size_t>> membership_;
};

// Embeds each spec with the segment tower. Throws IndexingError naming the
// spec when its window is missing.
EmbeddingIndex build_index(std::span<const SegmentSpec> specs, const WindowLookup& windows,
                           const DualEncoder& model, const FrameEncoder& frames,
                           std::size_t* duplicates = nullptr);

struct CandidatePool {
  std::string query_id;
  std::vector<std::string> window_ids;   // gt window first, then sampled order
  std::vector<std::size_t> candidates;   // index rows, ascending
  std::size_t gt_position = 0;           // position of the gt row inside `candidates`
};

// Seed mixed with the query id so every query draws its own pool.
std::uint64_t pool_seed(const std::string& query_id, std::uint64_t seed);

// {gt window} plus N_pool - 1 windows drawn uniformly without replacement
// from the other entries of `test_windows`.
CandidatePool make_pool(const std::string& query_id, const SegmentSpec& gt,
                        std::span<const std::string> test_windows, const EmbeddingIndex& index,
                        int pool_size, std::uint64_t seed);

struct RankedItem {
  std::size_t row = 0;
  double score = 0.0;
};

struct RankedResult {
  std::string query_id;
  std::vector<RankedItem> top;  // length min(K, |candidates|), scores nonincreasing
  int gt_rank = 0;              // 1 + #candidates scoring strictly above the gt
};

// Top-K by score (ties by index row) and the ground-truth rank.
RankedResult rank_scores(const std::string& query_id, std::span<const double> scores,
                         std::span<const std::size_t> rows, std::size_t gt_position, int k);

RankedResult score_and_rank(const Vector& query, const CandidatePool& pool,
                            const EmbeddingIndex& index, int k);

// Random baseline: scores are a seeded permutation of the candidate positions.
RankedResult random_rank(const CandidatePool& pool, int k, std::uint64_t seed);

// NDJSON lines {query_id, rank, window_id, a, b, score, gt_rank}.
std::string format_results(std::span<const RankedResult> results, const EmbeddingIndex& index);

struct ResultRow {
  std::string query_id;
  int rank = 0;
  SegmentSpec spec;
  double score = 0.0;
  int gt_rank = 0;
};
std::vector<ResultRow> read_results(const std::filesystem::path& path);

}  // namespace tsr
