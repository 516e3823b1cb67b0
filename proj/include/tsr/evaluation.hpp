#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tsr/captioning.hpp"
#include "tsr/encoder.hpp"
#include "tsr/records.hpp"

namespace tsr {

// (1/N) sum 1[r_i <= K]
double recall_at_k(std::span<const int> ranks, int k);

// (1/N) sum 1/r_i. Under one positive per query this is the mean reciprocal rank.
double mean_ap(std::span<const int> ranks);

// Mean cosine between the query caption and each retrieved caption.
double sbert_at_k(const std::string& query_caption, std::span<const std::string> retrieved,
                  const TextEmbedder& embedder);

struct RetrievedCaptions {
  std::string query_caption;
  std::vector<std::string> retrieved;  // rank order, length K
};

// Average of sbert_at_k over queries.
double mean_sbert_at_k(std::span<const RetrievedCaptions> queries, const TextEmbedder& embedder);

struct JudgeOutput {
  std::string query_id;
  int rank = 0;
  int score = 0;  // 1..5
  int label = 0;  // 0/1
};

struct VlmAggregate {
  double score_at_k = 0.0;
  double precision_at_k = 0.0;
};

// Requires one judgment per (query, rank <= K). Missing cells throw
// IncompleteJudgment listing them; judgments beyond rank K are ignored.
VlmAggregate vlm_aggregate(std::span<const JudgeOutput> judgments,
                           std::span<const std::string> query_ids, int k);

// Mean VLM score over ranks 1..K for each query, in query_ids order.
std::vector<double> per_query_vlm_means(std::span<const JudgeOutput> judgments,
                                        std::span<const std::string> query_ids, int k);

// CSV "bin_lo,bin_hi,count" over [lo, hi] in `bins` equal bins; the top edge
// belongs to the last bin.
std::string score_histogram(std::span<const double> values, int bins, double lo = 1.0,
                            double hi = 5.0);

std::vector<JudgeOutput> read_judgments(const std::filesystem::path& path);
void write_judgments(const std::filesystem::path& path, std::span<const JudgeOutput> judgments);

// N_q pairs drawn uniformly without replacement; ids q0000, q0001, ...
std::vector<QueryItem> sample_queries(std::span<const SegmentRecord> pairs, int n_queries,
                                      std::uint64_t seed);

// Offline stand-in for a VLM judge: counts how many of the four caption
// attributes (volatility, trend, level, position) agree. score = 1 + matches,
// label = matches >= 3. Free-form captions fall back to token overlap.
JudgeOutput stand_in_judge(const std::string& query_id, int rank, const std::string& query_caption,
                           const std::string& retrieved_caption);

struct MetricsRow {
  int pool = 0;
  std::string method;
  int n_queries = 0;
  std::uint64_t seed = 0;
  double recall_at_1 = 0.0;
  double recall_at_5 = 0.0;
  double recall_at_10 = 0.0;
  double map = 0.0;
  double sbert_at_10 = 0.0;
  double vlm_score_at_10 = 0.0;
  double vlm_precision_at_10 = 0.0;
};

std::string metrics_json(const MetricsRow& row);

}  // namespace tsr
