#include "tsr/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "tsr/error.hpp"

namespace tsr {

using nlohmann::json;

namespace {

void check_ranks(std::span<const int> ranks) {
  if (ranks.empty()) throw InvalidInput("metric over an empty rank list");
  for (int r : ranks) {
    if (r < 1) throw InvalidInput("ranks must be >= 1");
  }
}

}  // namespace

double recall_at_k(std::span<const int> ranks, int k) {
  check_ranks(ranks);
  if (k < 1) throw InvalidInput("recall_at_k: K must be >= 1");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](int r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double mean_ap(std::span<const int> ranks) {
  check_ranks(ranks);
  double sum = 0.0;
  for (int r : ranks) sum += 1.0 / r;
  return sum / static_cast<double>(ranks.size());
}

double sbert_at_k(const std::string& query_caption, std::span<const std::string> retrieved,
                  const TextEmbedder& embedder) {
  if (retrieved.empty()) throw InvalidInput("sbert_at_k: K must be >= 1");
  const Vector q = embedder.embed(query_caption).normalized();
  double sum = 0.0;
  for (const auto& c : retrieved) sum += q.dot(embedder.embed(c).normalized());
  return sum / static_cast<double>(retrieved.size());
}

double mean_sbert_at_k(std::span<const RetrievedCaptions> queries, const TextEmbedder& embedder) {
  if (queries.empty()) throw InvalidInput("mean_sbert_at_k: no queries");
  double sum = 0.0;
  for (const auto& q : queries) sum += sbert_at_k(q.query_caption, q.retrieved, embedder);
  return sum / static_cast<double>(queries.size());
}

namespace {

using Cell = std::pair<std::string, int>;

std::map<Cell, const JudgeOutput*> judgment_grid(std::span<const JudgeOutput> judgments,
                                                 std::span<const std::string> query_ids, int k) {
  if (query_ids.empty()) throw InvalidInput("vlm_aggregate: no queries");
  if (k < 1) throw InvalidInput("vlm_aggregate: K must be >= 1");
  const std::set<std::string> wanted(query_ids.begin(), query_ids.end());
  std::map<Cell, const JudgeOutput*> grid;
  for (const auto& j : judgments) {
    if (j.rank > k || !wanted.contains(j.query_id)) continue;
    if (j.rank < 1) throw InvalidInput("judgment rank must be >= 1");
    if (j.score < 1 || j.score > 5) {
      throw InvalidInput("judgment score " + std::to_string(j.score) + " outside 1..5");
    }
    if (j.label != 0 && j.label != 1) throw InvalidInput("judgment label must be 0 or 1");
    if (!grid.emplace(Cell{j.query_id, j.rank}, &j).second) {
      throw InvalidInput("duplicate judgment for query " + j.query_id + " rank " + std::to_string(j.rank));
    }
  }
  std::string gaps;
  std::size_t missing = 0;
  for (const auto& q : query_ids) {
    for (int r = 1; r <= k; ++r) {
      if (grid.contains(Cell{q, r})) continue;
      if (++missing <= 20) gaps += (gaps.empty() ? "" : ", ") + q + "@" + std::to_string(r);
    }
  }
  if (missing > 0) {
    throw IncompleteJudgment(std::to_string(missing) + " missing judgments: " + gaps +
                             (missing > 20 ? ", ..." : ""));
  }
  return grid;
}

}  // namespace

VlmAggregate vlm_aggregate(std::span<const JudgeOutput> judgments,
                           std::span<const std::string> query_ids, int k) {
  const auto grid = judgment_grid(judgments, query_ids, k);
  VlmAggregate out;
  for (const auto& q : query_ids) {
    double s = 0.0, l = 0.0;
    for (int r = 1; r <= k; ++r) {
      const auto* j = grid.at(Cell{q, r});
      s += j->score;
      l += j->label;
    }
    out.score_at_k += s / k;
    out.precision_at_k += l / k;
  }
  out.score_at_k /= static_cast<double>(query_ids.size());
  out.precision_at_k /= static_cast<double>(query_ids.size());
  return out;
}

std::vector<double> per_query_vlm_means(std::span<const JudgeOutput> judgments,
                                        std::span<const std::string> query_ids, int k) {
  const auto grid = judgment_grid(judgments, query_ids, k);
  std::vector<double> means;
  means.reserve(query_ids.size());
  for (const auto& q : query_ids) {
    double s = 0.0;
    for (int r = 1; r <= k; ++r) s += grid.at(Cell{q, r})->score;
    means.push_back(s / k);
  }
  return means;
}

std::string score_histogram(std::span<const double> values, int bins, double lo, double hi) {
  if (values.empty()) throw InvalidInput("score_histogram: no values");
  if (bins < 1 || !(hi > lo)) throw InvalidInput("score_histogram: bad bin layout");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    if (!(v >= lo && v <= hi)) {
      throw InvalidInput("score_histogram: value " + std::to_string(v) + " outside [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    auto b = static_cast<int>(std::floor((v - lo) / width));
    counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
  }
  std::string out = "bin_lo,bin_hi,count\n";
  char buf[96];
  for (int b = 0; b < bins; ++b) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%zu\n", lo + b * width,
                  b + 1 == bins ? hi : lo + (b + 1) * width, counts[static_cast<std::size_t>(b)]);
    out += buf;
  }
  return out;
}

std::vector<JudgeOutput> read_judgments(const std::filesystem::path& path) {
  std::vector<JudgeOutput> out;
  for (const auto& line : read_nonempty_lines(path)) {
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(path.string() + ": malformed judgment line");
    try {
      out.push_back({j.at("query_id").get<std::string>(), j.at("rank").get<int>(),
                     j.at("score").get<int>(), j.at("label").get<int>()});
    } catch (const json::exception& e) {
      throw InvalidInput(path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_judgments(const std::filesystem::path& path, std::span<const JudgeOutput> judgments) {
  std::string text;
  for (const auto& j : judgments) {
    text += json{{"query_id", j.query_id}, {"rank", j.rank}, {"score", j.score}, {"label", j.label}}.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<QueryItem> sample_queries(std::span<const SegmentRecord> pairs, int n_queries,
                                      std::uint64_t seed) {
  if (n_queries < 1) throw InvalidInput("sample_queries: N_q must be >= 1");
  if (static_cast<std::size_t>(n_queries) > pairs.size()) {
    throw InvalidInput("sample_queries: N_q " + std::to_string(n_queries) + " exceeds the " +
                       std::to_string(pairs.size()) + " available pairs");
  }
  std::vector<std::size_t> idx(pairs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_queries; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), idx.size() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
  }
  std::vector<QueryItem> out;
  out.reserve(static_cast<std::size_t>(n_queries));
  for (int i = 0; i < n_queries; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "q%04d", i);
    const auto& p = pairs[idx[static_cast<std::size_t>(i)]];
    out.push_back({id, p.caption, p.spec});
  }
  return out;
}

namespace {

constexpr std::array<std::array<const char*, 3>, 4> kSlots = {{
    {"smooth", "noisy", "volatile"},
    {"rising", "falling", "flat"},
    {"above", "near", "below"},
    {"opening", "middle", "closing"},
}};

// Attribute value per slot, -1 when the caption does not mention it.
std::array<int, 4> attributes(const std::vector<std::string>& tokens) {
  std::array<int, 4> out{-1, -1, -1, -1};
  for (std::size_t s = 0; s < kSlots.size(); ++s) {
    for (int v = 0; v < 3; ++v) {
      if (std::find(tokens.begin(), tokens.end(), kSlots[s][static_cast<std::size_t>(v)]) != tokens.end()) {
        out[s] = v;
        break;
      }
    }
  }
  return out;
}

}  // namespace

JudgeOutput stand_in_judge(const std::string& query_id, int rank, const std::string& query_caption,
                           const std::string& retrieved_caption) {
  const auto qt = tokenize(query_caption);
  const auto rt = tokenize(retrieved_caption);
  const auto qa = attributes(qt);
  const auto ra = attributes(rt);
  int matches = 0;
  bool structured = true;
  for (std::size_t s = 0; s < 4; ++s) {
    if (qa[s] < 0 || ra[s] < 0) structured = false;
    matches += (qa[s] >= 0 && qa[s] == ra[s]) ? 1 : 0;
  }
  if (!structured) {
    const std::set<std::string> a(qt.begin(), qt.end());
    const std::set<std::string> b(rt.begin(), rt.end());
    std::size_t inter = 0;
    for (const auto& t : a) inter += b.contains(t) ? 1 : 0;
    const std::size_t uni = a.size() + b.size() - inter;
    const double jac = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    matches = static_cast<int>(std::lround(4.0 * jac));
  }
  return {query_id, rank, 1 + matches, matches >= 3 ? 1 : 0};
}

std::string metrics_json(const MetricsRow& row) {
  json j;
  j["pool"] = row.pool;
  j["method"] = row.method;
  j["n_queries"] = row.n_queries;
  j["seed"] = row.seed;
  j["recall@1"] = row.recall_at_1;
  j["recall@5"] = row.recall_at_5;
  j["recall@10"] = row.recall_at_10;
  j["map"] = row.map;
  j["sbert@10"] = row.sbert_at_10;
  j["vlm_score@10"] = row.vlm_score_at_10;
  j["vlm_precision@10"] = row.vlm_precision_at_10;
  return j.dump(2) + "\n";
}

}  // namespace tsr
