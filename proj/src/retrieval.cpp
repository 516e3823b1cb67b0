#include "tsr/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>

#include "tsr/error.hpp"
#include "tsr/records.hpp"

namespace tsr {

using nlohmann::json;

EmbeddingIndex::EmbeddingIndex(std::vector<SegmentSpec> specs, Matrix rows, std::size_t* duplicates) {
  if (static_cast<Eigen::Index>(specs.size()) != rows.rows()) {
    throw InvalidInput("EmbeddingIndex: spec count and row count differ");
  }
  std::vector<std::size_t> order(specs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return specs[l] < specs[r]; });
  std::size_t dropped = 0;
  std::vector<std::size_t> keep;
  keep.reserve(order.size());
  for (std::size_t i : order) {
    if (!keep.empty() && specs[keep.back()] == specs[i]) {
      ++dropped;
      continue;
    }
    keep.push_back(i);
  }
  rows_.resize(static_cast<Eigen::Index>(keep.size()), rows.cols());
  specs_.reserve(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    rows_.row(static_cast<Eigen::Index>(k)) = rows.row(static_cast<Eigen::Index>(keep[k]));
    specs_.push_back(std::move(specs[keep[k]]));
    membership_[specs_.back().window_id].push_back(k);
  }
  if (duplicates != nullptr) *duplicates = dropped;
}

std::span<const std::size_t> EmbeddingIndex::window_rows(const std::string& window_id) const {
  auto it = membership_.find(window_id);
  if (it == membership_.end()) return {};
  return it->second;
}

std::vector<std::string> EmbeddingIndex::window_ids() const {
  std::vector<std::string> ids;
  ids.reserve(membership_.size());
  for (const auto& [id, rows] : membership_) ids.push_back(id);
  return ids;
}

std::ptrdiff_t EmbeddingIndex::find(const SegmentSpec& spec) const {
  auto it = std::lower_bound(specs_.begin(), specs_.end(), spec);
  if (it == specs_.end() || *it != spec) return -1;
  return it - specs_.begin();
}

namespace {

constexpr char kIndexMagic[8] = {'T', 'S', 'R', 'I', 'D', 'X', '\0', '\0'};
constexpr std::uint32_t kIndexVersion = 1;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_le(const std::string& in, std::size_t& pos, int bytes) {
  if (pos + bytes > in.size()) throw InvalidInput("index file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += bytes;
  return v;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".specs.ndjson");
}

}  // namespace

void EmbeddingIndex::save(const std::filesystem::path& path) const {
  std::string bin(kIndexMagic, sizeof kIndexMagic);
  put_le(bin, kIndexVersion, 4);
  put_le(bin, specs_.size(), 8);
  put_le(bin, static_cast<std::uint64_t>(rows_.cols()), 4);
  for (Eigen::Index i = 0; i < rows_.size(); ++i) {
    put_le(bin, std::bit_cast<std::uint32_t>(static_cast<float>(rows_.data()[i])), 4);
  }
  write_text_file(path, bin);
  std::string specs;
  for (const auto& s : specs_) {
    specs += json{{"window_id", s.window_id}, {"a", s.a}, {"b", s.b}}.dump();
    specs += '\n';
  }
  write_text_file(sidecar(path), specs);
}

EmbeddingIndex EmbeddingIndex::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InvalidInput("index file '" + path.string() + "' not found");
  const std::string bin = read_text_file(path);
  if (bin.size() < sizeof kIndexMagic || std::memcmp(bin.data(), kIndexMagic, sizeof kIndexMagic) != 0) {
    throw InvalidInput("'" + path.string() + "' is not an index file");
  }
  std::size_t pos = sizeof kIndexMagic;
  const auto version = get_le(bin, pos, 4);
  if (version != kIndexVersion) throw InvalidInput("unsupported index version " + std::to_string(version));
  const auto count = get_le(bin, pos, 8);
  const auto dim = get_le(bin, pos, 4);
  if (bin.size() - pos != count * dim * 4) throw InvalidInput("index file size does not match its header");
  Matrix rows(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    rows.data()[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bin, pos, 4)));
  }
  std::vector<SegmentSpec> specs;
  for (const auto& line : read_nonempty_lines(sidecar(path))) {
    const auto j = json::parse(line);
    specs.push_back({j.at("window_id").get<std::string>(), j.at("a").get<int>(), j.at("b").get<int>()});
  }
  if (specs.size() != count) throw InvalidInput("index sidecar has " + std::to_string(specs.size()) +
                                                " specs, header says " + std::to_string(count));
  return EmbeddingIndex(std::move(specs), std::move(rows));
}

EmbeddingIndex build_index(std::span<const SegmentSpec> specs, const WindowLookup& windows,
                           const DualEncoder& model, const FrameEncoder& frames,
                           std::size_t* duplicates) {
  FeatureCache cache(frames);
  Matrix rows(static_cast<Eigen::Index>(specs.size()), model.segment_head.output_dim());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    auto it = windows.find(s.window_id);
    if (it == windows.end()) {
      throw IndexingError("segment (" + s.window_id + ", " + std::to_string(s.a) + ", " +
                          std::to_string(s.b) + ") references a missing window");
    }
    Vector z = model.embed_segment(cache.get(*it->second), s.a, s.b);
    for (double& v : z) v = static_cast<double>(static_cast<float>(v));
    rows.row(static_cast<Eigen::Index>(i)) = z.transpose();
  }
  return EmbeddingIndex({specs.begin(), specs.end()}, std::move(rows), duplicates);
}

std::uint64_t pool_seed(const std::string& query_id, std::uint64_t seed) {
  return stable_hash(query_id, seed);
}

CandidatePool make_pool(const std::string& query_id, const SegmentSpec& gt,
                        std::span<const std::string> test_windows, const EmbeddingIndex& index,
                        int pool_size, std::uint64_t seed) {
  if (pool_size < 1) throw InvalidInput("make_pool: pool size must be >= 1");
  if (static_cast<std::size_t>(pool_size) > test_windows.size()) {
    throw InvalidInput("make_pool: pool size " + std::to_string(pool_size) + " exceeds the " +
                       std::to_string(test_windows.size()) + " available windows");
  }
  std::vector<std::string> others;
  others.reserve(test_windows.size());
  bool found = false;
  for (const auto& w : test_windows) {
    if (w == gt.window_id) {
      found = true;
    } else {
      others.push_back(w);
    }
  }
  if (!found) throw InvalidInput("make_pool: ground-truth window '" + gt.window_id + "' not among test windows");
  const auto gt_row = index.find(gt);
  if (gt_row < 0) throw InvalidInput("make_pool: ground-truth segment is not in the index");

  std::mt19937_64 rng(pool_seed(query_id, seed));
  const std::size_t extra = static_cast<std::size_t>(pool_size) - 1;
  for (std::size_t i = 0; i < extra; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, others.size() - 1);
    std::swap(others[i], others[pick(rng)]);
  }
  CandidatePool pool;
  pool.query_id = query_id;
  pool.window_ids.push_back(gt.window_id);
  pool.window_ids.insert(pool.window_ids.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(extra));
  for (const auto& w : pool.window_ids) {
    for (std::size_t r : index.window_rows(w)) pool.candidates.push_back(r);
  }
  std::sort(pool.candidates.begin(), pool.candidates.end());
  pool.gt_position = static_cast<std::size_t>(
      std::lower_bound(pool.candidates.begin(), pool.candidates.end(), static_cast<std::size_t>(gt_row)) -
      pool.candidates.begin());
  return pool;
}

RankedResult rank_scores(const std::string& query_id, std::span<const double> scores,
                         std::span<const std::size_t> rows, std::size_t gt_position, int k) {
  if (scores.empty()) throw InvalidInput("score_and_rank: empty candidate pool");
  if (k < 1) throw InvalidInput("score_and_rank: K must be >= 1");
  if (scores.size() != rows.size() || gt_position >= scores.size()) {
    throw InvalidInput("score_and_rank: inconsistent candidate arrays");
  }
  RankedResult out;
  out.query_id = query_id;
  const double gt_score = scores[gt_position];
  int above = 0;
  for (double s : scores) above += s > gt_score ? 1 : 0;
  out.gt_rank = 1 + above;

  std::vector<std::size_t> pos(scores.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), pos.size());
  auto before = [&](std::size_t l, std::size_t r) {
    if (scores[l] != scores[r]) return scores[l] > scores[r];
    return rows[l] < rows[r];
  };
  std::partial_sort(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(kk), pos.end(), before);
  out.top.reserve(kk);
  for (std::size_t i = 0; i < kk; ++i) out.top.push_back({rows[pos[i]], scores[pos[i]]});
  return out;
}

RankedResult score_and_rank(const Vector& query, const CandidatePool& pool,
                            const EmbeddingIndex& index, int k) {
  if (pool.candidates.empty()) throw InvalidInput("score_and_rank: empty candidate pool");
  if (query.size() != index.dim()) throw InvalidInput("score_and_rank: query width differs from index");
  std::vector<double> scores(pool.candidates.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = index.rows().row(static_cast<Eigen::Index>(pool.candidates[i])).dot(query);
  }
  return rank_scores(pool.query_id, scores, pool.candidates, pool.gt_position, k);
}

RankedResult random_rank(const CandidatePool& pool, int k, std::uint64_t seed) {
  const std::size_t n = pool.candidates.size();
  if (n == 0) throw InvalidInput("random_rank: empty candidate pool");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(pool_seed(pool.query_id, ~seed));
  std::shuffle(perm.begin(), perm.end(), rng);
  // perm[r] is the candidate placed at rank r + 1.
  std::vector<double> scores(n);
  for (std::size_t r = 0; r < n; ++r) scores[perm[r]] = static_cast<double>(n - r) / static_cast<double>(n);
  return rank_scores(pool.query_id, scores, pool.candidates, pool.gt_position, k);
}

std::string format_results(std::span<const RankedResult> results, const EmbeddingIndex& index) {
  std::string out;
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.top.size(); ++i) {
      const auto& s = index.specs()[r.top[i].row];
      out += json{{"query_id", r.query_id}, {"rank", i + 1},      {"window_id", s.window_id},
                  {"a", s.a},               {"b", s.b},           {"score", r.top[i].score},
                  {"gt_rank", r.gt_rank}}
                 .dump();
      out += '\n';
    }
  }
  return out;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
  std::vector<ResultRow> rows;
  for (const auto& line : read_nonempty_lines(path)) {
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(path.string() + ": malformed result line");
    try {
      rows.push_back({j.at("query_id").get<std::string>(), j.at("rank").get<int>(),
                      {j.at("window_id").get<std::string>(), j.at("a").get<int>(), j.at("b").get<int>()},
                      j.at("score").get<double>(), j.at("gt_rank").get<int>()});
    } catch (const json::exception& e) {
      throw InvalidInput(path.string() + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace tsr
