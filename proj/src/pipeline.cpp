#include "tsr/pipeline.hpp"

#include <algorithm>
#include <future>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "tsr/captioning.hpp"
#include "tsr/error.hpp"
#include "tsr/evaluation.hpp"
#include "tsr/records.hpp"
#include "tsr/retrieval.hpp"

namespace tsr {

using nlohmann::json;

namespace {

void info(const std::string& msg) { std::cerr << "[tsretrieval] " << msg << '\n'; }

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidInput("config section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) throw InvalidInput("unknown config key '" + section + "." + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config key '") + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text, const fs::path& base_dir) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidInput("config is not valid JSON");
  check_keys(j, "config",
             {"data_dir", "output_dir", "seed", "generate_fixture", "fixture", "sampling", "segmentation",
              "captioner", "vlm", "plots", "train", "max_train_pairs", "text_embeddings", "eval"});
  PipelineConfig c;
  std::string data_dir = c.data_dir.string(), output_dir = c.output_dir.string();
  read(j, "data_dir", data_dir);
  read(j, "output_dir", output_dir);
  c.data_dir = resolve(base_dir, data_dir);
  c.output_dir = resolve(base_dir, output_dir);
  read(j, "seed", c.seed);
  read(j, "generate_fixture", c.generate_fixture);
  read(j, "captioner", c.captioner);
  read(j, "plots", c.plots);
  read(j, "max_train_pairs", c.max_train_pairs);
  read(j, "text_embeddings", c.text_embeddings);
  if (!c.text_embeddings.empty()) c.text_embeddings = resolve(base_dir, c.text_embeddings).string();

  if (j.contains("fixture")) {
    const auto& f = j["fixture"];
    check_keys(f, "fixture", {"train_subsets", "val_subsets", "test_subsets", "series_per_subset",
                              "min_series_length", "max_series_length", "seed"});
    read(f, "train_subsets", c.fixture.train_subsets);
    read(f, "val_subsets", c.fixture.val_subsets);
    read(f, "test_subsets", c.fixture.test_subsets);
    read(f, "series_per_subset", c.fixture.series_per_subset);
    read(f, "min_series_length", c.fixture.min_series_length);
    read(f, "max_series_length", c.fixture.max_series_length);
    read(f, "seed", c.fixture.seed);
  }
  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    check_keys(s, "sampling", {"window_length", "target_windows", "initial_stride", "allow_duplicates"});
    read(s, "window_length", c.sampling.window_length);
    read(s, "target_windows", c.sampling.target_windows);
    read(s, "initial_stride", c.sampling.initial_stride);
    read(s, "allow_duplicates", c.sampling.allow_duplicates);
  }
  if (j.contains("segmentation")) {
    const auto& s = j["segmentation"];
    check_keys(s, "segmentation", {"lambda_init", "lambda_factor", "max_segments", "min_length",
                                   "sigma_multiplier", "max_escalations", "merge_radius"});
    read(s, "lambda_init", c.segmentation.lambda_init);
    read(s, "lambda_factor", c.segmentation.lambda_factor);
    read(s, "max_segments", c.segmentation.max_segments);
    read(s, "min_length", c.segmentation.min_length);
    read(s, "sigma_multiplier", c.segmentation.sigma_multiplier);
    read(s, "merge_radius", c.segmentation.merge_radius);
    read(s, "max_escalations", c.segmentation.max_escalations);
  }
  if (j.contains("vlm")) {
    const auto& v = j["vlm"];
    check_keys(v, "vlm", {"endpoint", "model", "timeout_seconds", "max_retries", "backoff_ms", "max_in_flight"});
    read(v, "endpoint", c.vlm.endpoint);
    read(v, "model", c.vlm.model);
    read(v, "timeout_seconds", c.vlm.timeout_seconds);
    read(v, "max_retries", c.vlm.max_retries);
    read(v, "backoff_ms", c.vlm.backoff_ms);
    read(v, "max_in_flight", c.vlm.max_in_flight);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, "train", {"tau", "batch_size", "epochs", "learning_rate", "weight_decay", "warmup_steps",
                            "grad_clip_norm", "embed_dim", "segment_hidden", "text_hidden"});
    read(t, "tau", c.train.tau);
    read(t, "batch_size", c.train.batch_size);
    read(t, "epochs", c.train.epochs);
    read(t, "learning_rate", c.train.learning_rate);
    read(t, "weight_decay", c.train.weight_decay);
    read(t, "warmup_steps", c.train.warmup_steps);
    read(t, "grad_clip_norm", c.train.grad_clip_norm);
    read(t, "embed_dim", c.train.embed_dim);
    read(t, "segment_hidden", c.train.segment_hidden);
    read(t, "text_hidden", c.train.text_hidden);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    check_keys(e, "eval", {"n_queries", "pool_sizes", "methods", "top_k", "judgments_dir",
                           "sentence_embeddings", "histogram_bins"});
    read(e, "n_queries", c.eval.n_queries);
    read(e, "pool_sizes", c.eval.pool_sizes);
    read(e, "methods", c.eval.methods);
    read(e, "top_k", c.eval.top_k);
    read(e, "judgments_dir", c.eval.judgments_dir);
    read(e, "sentence_embeddings", c.eval.sentence_embeddings);
    read(e, "histogram_bins", c.eval.histogram_bins);
    if (!c.eval.judgments_dir.empty()) c.eval.judgments_dir = resolve(base_dir, c.eval.judgments_dir).string();
    if (!c.eval.sentence_embeddings.empty()) {
      c.eval.sentence_embeddings = resolve(base_dir, c.eval.sentence_embeddings).string();
    }
  }
  c.set_seed(c.seed);
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidInput("config file '" + path.string() + "' not found");
  return from_json_text(read_text_file(path), path.parent_path());
}

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  sampling.rng_seed = s;
  train.rng_seed = s;
}

void PipelineConfig::validate() const {
  sampling.validate();
  segmentation.validate();
  train.validate();
  if (captioner != "synthetic" && captioner != "vlm") {
    throw InvalidInput("captioner must be 'synthetic' or 'vlm', got '" + captioner + "'");
  }
  if (captioner == "vlm") vlm.validate();
  if (max_train_pairs < 0) throw InvalidInput("max_train_pairs must be >= 0");
  if (eval.n_queries < 1) throw InvalidInput("eval.n_queries must be >= 1");
  if (eval.top_k < 1) throw InvalidInput("eval.top_k must be >= 1");
  if (eval.histogram_bins < 1) throw InvalidInput("eval.histogram_bins must be >= 1");
  for (int p : eval.pool_sizes) {
    if (p < 1) throw InvalidInput("eval.pool_sizes entries must be >= 1");
  }
  for (const auto& m : eval.methods) {
    if (m != "model" && m != "random") throw InvalidInput("unknown method '" + m + "' (model, random)");
  }
}

namespace {

std::string combo_name(const std::string& method, int pool) {
  return method + "_pool" + std::to_string(pool);
}

}  // namespace

fs::path OutputLayout::results(const std::string& method, int pool) const {
  return root / "results" / (combo_name(method, pool) + ".ndjson");
}
fs::path OutputLayout::judgments(const std::string& method, int pool) const {
  return root / "judgments" / (combo_name(method, pool) + ".ndjson");
}
fs::path OutputLayout::metrics(const std::string& method, int pool) const {
  return root / "metrics" / (combo_name(method, pool) + ".json");
}
fs::path OutputLayout::histogram(const std::string& method, int pool) const {
  return root / "histograms" / (combo_name(method, pool) + ".csv");
}

namespace {

const char* const kSplits[] = {"train", "val", "test"};

struct Manifest {
  std::map<std::string, std::vector<std::string>> splits;
  std::uint64_t seed = 0;
};

Manifest read_manifest(const OutputLayout& out) {
  const fs::path p = out.windows_dir() / "manifest.json";
  if (!fs::exists(p)) {
    throw InvalidInput("no windows found: '" + p.string() + "' is missing (run the windows command first)");
  }
  const json j = json::parse(read_text_file(p));
  Manifest m;
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const char* s : kSplits) m.splits[s] = j.at("splits").at(s).get<std::vector<std::string>>();
  return m;
}

void write_manifest(const fs::path& dir, const json& body) {
  write_text_file(dir / "manifest.json", body.dump(2) + "\n");
}

std::vector<Window> split_windows(const OutputLayout& out, const Manifest& m, const std::string& split) {
  std::vector<Window> all;
  for (const auto& subset : m.splits.at(split)) {
    auto ws = read_windows(out.windows_dir() / (subset + ".ndjson"));
    std::move(ws.begin(), ws.end(), std::back_inserter(all));
  }
  return all;
}

std::vector<SegmentRecord> split_pairs(const OutputLayout& out, const Manifest& m, const std::string& split) {
  std::vector<SegmentRecord> all;
  for (const auto& subset : m.splits.at(split)) {
    const fs::path p = out.pairs_dir() / (subset + ".ndjson");
    if (!fs::exists(p)) throw InvalidInput("pairs file '" + p.string() + "' not found (run caption first)");
    auto ps = read_pairs(p);
    std::move(ps.begin(), ps.end(), std::back_inserter(all));
  }
  return all;
}

std::vector<std::string> all_subsets(const Manifest& m) {
  std::vector<std::string> out;
  for (const char* s : kSplits) {
    const auto& v = m.splits.at(s);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::unique_ptr<TextEmbedder> make_text_embedder(const std::string& path) {
  if (path.empty()) return std::make_unique<HashTextEmbedder>();
  return std::make_unique<PrecomputedTextEmbedder>(fs::path(path));
}

std::string plot_name(const std::string& window_id) {
  std::string s = window_id;
  std::replace(s.begin(), s.end(), '/', '_');
  return s + ".svg";
}

}  // namespace

void cmd_make_fixture(const PipelineConfig& cfg) {
  write_fixture(cfg.data_dir, cfg.fixture);
  info("wrote synthetic fixture to " + cfg.data_dir.string());
}

void cmd_windows(const PipelineConfig& cfg) {
  cfg.validate();
  if (!fs::is_directory(cfg.data_dir)) {
    throw InvalidInput("data directory '" + cfg.data_dir.string() + "' does not exist");
  }
  const auto splits = load_split_lists(cfg.data_dir / "splits");
  const OutputLayout out{cfg.output_dir};
  fs::create_directories(out.windows_dir());
  json manifest;
  manifest["seed"] = cfg.seed;
  std::size_t total = 0;
  for (const char* split : kSplits) {
    manifest["splits"][split] = splits.at(split);
    for (const auto& subset : splits.at(split)) {
      const auto series = load_subset(cfg.data_dir / subset);
      if (series.empty()) throw InvalidInput("subset '" + subset + "' contains no series");
      const auto windows = sample_subset(series, cfg.sampling);
      write_windows(out.windows_dir() / (subset + ".ndjson"), windows);
      total += windows.size();
    }
  }
  write_manifest(out.windows_dir(), manifest);
  info("windows: " + std::to_string(total) + " windows");
}

void cmd_segment(const PipelineConfig& cfg) {
  cfg.validate();
  const OutputLayout out{cfg.output_dir};
  const Manifest m = read_manifest(out);
  fs::create_directories(out.segments_dir());
  std::size_t n_windows = 0, n_segments = 0, n_captionable = 0;
  for (const auto& subset : all_subsets(m)) {
    const auto windows = read_windows(out.windows_dir() / (subset + ".ndjson"));
    std::vector<SegmentRow> rows;
    for (const auto& w : windows) {
      const auto res = segment_window(w, cfg.segmentation);
      std::set<SegmentSpec> keep(res.captionable.begin(), res.captionable.end());
      for (const auto& s : res.segments) rows.push_back({s, res.lambda_used, keep.contains(s)});
      n_segments += res.segments.size();
      n_captionable += res.captionable.size();
      if (cfg.plots) {
        write_text_file(out.plots_dir() / plot_name(w.window_id), render_window_plot(w, res.captionable));
      }
    }
    n_windows += windows.size();
    write_segments(out.segments_dir() / (subset + ".ndjson"), rows);
  }
  if (n_windows == 0) throw InvalidInput("segment: no windows to process");
  write_manifest(out.segments_dir(), {{"seed", cfg.seed}, {"windows", n_windows}, {"segments", n_segments},
                                      {"captionable", n_captionable}});
  info("segment: " + std::to_string(n_windows) + " windows, " + std::to_string(n_segments) + " segments, " +
       std::to_string(n_captionable) + " captionable");
}

void cmd_caption(const PipelineConfig& cfg) {
  cfg.validate();
  const OutputLayout out{cfg.output_dir};
  const Manifest m = read_manifest(out);
  fs::create_directories(out.pairs_dir());
  std::size_t total = 0;
  for (const auto& subset : all_subsets(m)) {
    const auto windows = read_windows(out.windows_dir() / (subset + ".ndjson"));
    const fs::path seg_path = out.segments_dir() / (subset + ".ndjson");
    if (!fs::exists(seg_path)) throw InvalidInput("segments file '" + seg_path.string() + "' not found");
    std::map<std::string, std::vector<SegmentSpec>> by_window;
    for (const auto& r : read_segments(seg_path)) {
      if (r.captionable) by_window[r.spec.window_id].push_back(r.spec);
    }
    std::vector<SegmentRecord> records;
    if (cfg.captioner == "synthetic") {
      for (const auto& w : windows) {
        for (const auto& s : by_window[w.window_id]) {
          records.push_back({s, synthesize_caption(w, s), CaptionSource::kSynthetic});
        }
      }
    } else {
      // Requests go out max_in_flight at a time; results are stored by window
      // position so output order never depends on completion order.
      std::vector<std::vector<std::string>> captions(windows.size());
      const std::size_t step = static_cast<std::size_t>(cfg.vlm.max_in_flight);
      for (std::size_t start = 0; start < windows.size(); start += step) {
        std::vector<std::future<void>> inflight;
        for (std::size_t i = start; i < std::min(windows.size(), start + step); ++i) {
          const auto& specs = by_window[windows[i].window_id];
          if (specs.empty()) continue;
          const std::string svg = render_window_plot(windows[i], specs);
          inflight.push_back(std::async(std::launch::async, [&, i, svg, n = specs.size()] {
            auto local = make_http_transport();
            captions[i] = caption_via_vlm(svg, static_cast<int>(n), cfg.vlm, local.get()).captions;
          }));
        }
        for (auto& f : inflight) f.get();
      }
      for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& specs = by_window[windows[i].window_id];
        for (std::size_t k = 0; k < specs.size(); ++k) {
          records.push_back({specs[k], captions[i][k], CaptionSource::kVlm});
        }
      }
    }
    total += records.size();
    write_pairs(out.pairs_dir() / (subset + ".ndjson"), records);
  }
  write_manifest(out.pairs_dir(), {{"seed", cfg.seed}, {"captioner", cfg.captioner}, {"pairs", total}});
  info("caption: " + std::to_string(total) + " segment-caption pairs");
}

void cmd_train(const PipelineConfig& cfg) {
  cfg.validate();
  const OutputLayout out{cfg.output_dir};
  const Manifest m = read_manifest(out);
  auto train_pairs = split_pairs(out, m, "train");
  const auto val_pairs = split_pairs(out, m, "val");
  if (cfg.max_train_pairs > 0 && static_cast<int>(train_pairs.size()) > cfg.max_train_pairs) {
    std::vector<std::size_t> idx(train_pairs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(stable_hash("train-subsample", cfg.seed));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(cfg.max_train_pairs));
    std::sort(idx.begin(), idx.end());
    std::vector<SegmentRecord> kept;
    kept.reserve(idx.size());
    for (auto i : idx) kept.push_back(train_pairs[i]);
    train_pairs = std::move(kept);
  }
  auto windows = split_windows(out, m, "train");
  auto val_windows = split_windows(out, m, "val");
  std::move(val_windows.begin(), val_windows.end(), std::back_inserter(windows));
  const auto lookup = make_window_lookup(windows);
  const ReferenceFeaturizer frames;
  const auto text = make_text_embedder(cfg.text_embeddings);
  info("train: " + std::to_string(train_pairs.size()) + " train / " + std::to_string(val_pairs.size()) +
       " val pairs");
  const TrainResult res = train(train_pairs, val_pairs, lookup, cfg.train, frames, *text);
  save_checkpoint(out.checkpoint(), res, cfg.train);
  std::string log;
  for (const auto& e : res.log) {
    log += json{{"epoch", e.epoch},
                {"train_loss", e.train_loss},
                {"val_loss", e.val_loss},
                {"val_acc1", e.val_acc1},
                {"val_acc1_index", e.val_acc1_index}}
               .dump();
    log += '\n';
  }
  write_text_file(out.train_log(), log);
  info("train: best epoch " + std::to_string(res.best_epoch) + ", validation Acc@1 " +
       std::to_string(res.best_val_acc1));
}

void cmd_index(const PipelineConfig& cfg) {
  cfg.validate();
  const OutputLayout out{cfg.output_dir};
  const Manifest m = read_manifest(out);
  const Checkpoint ck = load_checkpoint(out.checkpoint());
  const auto windows = split_windows(out, m, "test");
  const auto pairs = split_pairs(out, m, "test");
  std::vector<SegmentSpec> specs;
  specs.reserve(pairs.size());
  for (const auto& p : pairs) specs.push_back(p.spec);
  std::size_t dups = 0;
  const auto index = build_index(specs, make_window_lookup(windows), ck.model, ReferenceFeaturizer{}, &dups);
  if (dups > 0) info("warning: dropped " + std::to_string(dups) + " duplicate segment specs");
  index.save(out.index_file());
  info("index: " + std::to_string(index.size()) + " segments");
}

void cmd_query(const PipelineConfig& cfg, const RunFilter& filter) {
  cfg.validate();
  const OutputLayout out{cfg.output_dir};
  const auto index = EmbeddingIndex::load(out.index_file());
  const Checkpoint ck = load_checkpoint(out.checkpoint());
  const Manifest m = read_manifest(out);
  const auto text = make_text_embedder(cfg.text_embeddings);
  if (text->dim() != ck.model.text_head.input_dim()) {
    throw InvalidInput("text embedder width does not match the checkpoint");
  }
  const auto pairs = split_pairs(out, m, "test");
  std::vector<std::string> test_windows;
  for (const auto& w : split_windows(out, m, "test")) test_windows.push_back(w.window_id);

  const auto queries = sample_queries(pairs, cfg.eval.n_queries, stable_hash("queries", cfg.seed));
  write_queries(out.queries(), queries);
  std::vector<Vector> q_emb;
  q_emb.reserve(queries.size());
  for (const auto& q : queries) q_emb.push_back(ck.model.embed_text(text->embed(q.caption)));

  for (int pool : cfg.eval.pool_sizes) {
    if (filter.pool_size && *filter.pool_size != pool) continue;
    for (const auto& method : cfg.eval.methods) {
      if (filter.method && *filter.method != method) continue;
      std::vector<RankedResult> results;
      results.reserve(queries.size());
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto cp = make_pool(queries[i].query_id, queries[i].gt, test_windows, index, pool,
                                  stable_hash("pool", cfg.seed));
        results.push_back(method == "random" ? random_rank(cp, cfg.eval.top_k, cfg.seed)
                                             : score_and_rank(q_emb[i], cp, index, cfg.eval.top_k));
      }
      write_text_file(out.results(method, pool), format_results(results, index));
      info("query: wrote " + out.results(method, pool).string());
    }
  }
}

void cmd_eval(const PipelineConfig& cfg, const RunFilter& filter) {
  cfg.validate();
  const OutputLayout out{cfg.output_dir};
  const Manifest m = read_manifest(out);
  if (!fs::exists(out.queries())) throw InvalidInput("query set '" + out.queries().string() + "' not found");
  const auto queries = read_queries(out.queries());
  std::map<SegmentSpec, std::string> caption_of;
  for (const auto& p : split_pairs(out, m, "test")) caption_of.emplace(p.spec, p.caption);
  const auto sentence = make_text_embedder(cfg.eval.sentence_embeddings);

  std::vector<std::string> qids;
  for (const auto& q : queries) qids.push_back(q.query_id);
  constexpr int kJudgeDepth = 10;

  for (int pool : cfg.eval.pool_sizes) {
    if (filter.pool_size && *filter.pool_size != pool) continue;
    for (const auto& method : cfg.eval.methods) {
      if (filter.method && *filter.method != method) continue;
      const fs::path rp = out.results(method, pool);
      if (!fs::exists(rp)) throw InvalidInput("results file '" + rp.string() + "' not found");
      std::map<std::string, std::vector<ResultRow>> by_query;
      for (auto& r : read_results(rp)) by_query[r.query_id].push_back(std::move(r));

      std::vector<int> ranks;
      std::vector<RetrievedCaptions> retrieved;
      std::vector<JudgeOutput> judgments;
      for (const auto& q : queries) {
        auto it = by_query.find(q.query_id);
        if (it == by_query.end()) throw InvalidInput("results lack query " + q.query_id);
        auto rows = it->second;
        std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.rank < b.rank; });
        ranks.push_back(rows.front().gt_rank);
        RetrievedCaptions rc{q.caption, {}};
        for (const auto& r : rows) {
          if (r.rank > kJudgeDepth) break;
          auto c = caption_of.find(r.spec);
          if (c == caption_of.end()) throw LookupError("no caption for retrieved segment in " + r.spec.window_id);
          rc.retrieved.push_back(c->second);
          judgments.push_back(stand_in_judge(q.query_id, r.rank, q.caption, c->second));
        }
        retrieved.push_back(std::move(rc));
      }
      const int depth = static_cast<int>(std::min_element(retrieved.begin(), retrieved.end(),
                                                          [](const auto& a, const auto& b) {
                                                            return a.retrieved.size() < b.retrieved.size();
                                                          })->retrieved.size());
      if (!cfg.eval.judgments_dir.empty()) {
        judgments = read_judgments(fs::path(cfg.eval.judgments_dir) / out.judgments(method, pool).filename());
      } else {
        write_judgments(out.judgments(method, pool), judgments);
      }
      const auto agg = vlm_aggregate(judgments, qids, std::min(depth, kJudgeDepth));
      MetricsRow row;
      row.pool = pool;
      row.method = method;
      row.n_queries = static_cast<int>(queries.size());
      row.seed = cfg.seed;
      row.recall_at_1 = recall_at_k(ranks, 1);
      row.recall_at_5 = recall_at_k(ranks, 5);
      row.recall_at_10 = recall_at_k(ranks, 10);
      row.map = mean_ap(ranks);
      row.sbert_at_10 = mean_sbert_at_k(retrieved, *sentence);
      row.vlm_score_at_10 = agg.score_at_k;
      row.vlm_precision_at_10 = agg.precision_at_k;
      write_text_file(out.metrics(method, pool), metrics_json(row));
      write_text_file(out.histogram(method, pool),
                      score_histogram(per_query_vlm_means(judgments, qids, std::min(depth, kJudgeDepth)),
                                      cfg.eval.histogram_bins));
      info("eval " + combo_name(method, pool) + ": R@1 " + std::to_string(row.recall_at_1) + ", R@10 " +
           std::to_string(row.recall_at_10) + ", mAP " + std::to_string(row.map));
    }
  }
}

void cmd_run_all(const PipelineConfig& cfg) {
  if (cfg.generate_fixture) cmd_make_fixture(cfg);
  cmd_windows(cfg);
  cmd_segment(cfg);
  cmd_caption(cfg);
  cmd_train(cfg);
  cmd_index(cfg);
  cmd_query(cfg);
  cmd_eval(cfg);
}

}  // namespace tsr
