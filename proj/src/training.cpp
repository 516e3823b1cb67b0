#include "tsr/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>

#include "tsr/error.hpp"

namespace tsr {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(tau > 0.0)) throw InvalidInput("train.tau must be > 0");
  if (batch_size < 2) throw InvalidInput("train.batch_size must be >= 2");
  if (epochs < 1) throw InvalidInput("train.epochs must be >= 1");
  if (learning_rate < 0.0) throw InvalidInput("train.learning_rate must be >= 0");
  if (weight_decay < 0.0) throw InvalidInput("train.weight_decay must be >= 0");
  if (warmup_steps < 0) throw InvalidInput("train.warmup_steps must be >= 0");
  if (!(grad_clip_norm > 0.0)) throw InvalidInput("train.grad_clip_norm must be > 0");
  if (embed_dim < 1) throw InvalidInput("train.embed_dim must be >= 1");
  if (segment_hidden < 0 || text_hidden < 0) throw InvalidInput("train hidden widths must be >= 0");
}

TrainConfig TrainConfig::full_scale_defaults() {
  TrainConfig cfg;
  cfg.batch_size = 512;
  cfg.learning_rate = 1e-4;
  cfg.epochs = 100;
  return cfg;
}

FeatureScaler FeatureScaler::fit(const Matrix& pooled) {
  if (pooled.rows() == 0) throw InvalidInput("FeatureScaler::fit: no rows");
  FeatureScaler s;
  s.mean = pooled.colwise().mean().transpose();
  s.scale = Vector::Ones(pooled.cols());
  for (Eigen::Index j = 0; j < pooled.cols(); ++j) {
    const double sd = std::sqrt((pooled.col(j).array() - s.mean[j]).square().mean());
    if (sd > 1e-12) s.scale[j] = 1.0 / sd;
  }
  return s;
}

FeatureScaler FeatureScaler::identity(int dim) { return {Vector::Zero(dim), Vector::Ones(dim)}; }

Matrix FeatureScaler::apply(const Matrix& rows) const {
  if (rows.cols() != mean.size()) throw InvalidInput("FeatureScaler: width mismatch");
  Matrix out = rows.rowwise() - mean.transpose();
  return out.array().rowwise() * scale.transpose().array();
}

Vector DualEncoder::embed_segment(const Matrix& H, int a, int b) const {
  const Matrix x = scaler.apply(pool_segment(H, a, b).transpose());
  return head_forward(segment_head, x).Z.row(0).transpose();
}

Vector DualEncoder::embed_text(const Vector& text_features) const {
  return project_and_normalize(text_features, text_head);
}

std::size_t DualEncoder::parameter_count() const {
  return segment_head.parameter_count() + text_head.parameter_count();
}

const Matrix& FeatureCache::get(const Window& window) {
  auto it = cache_.find(window.window_id);
  if (it == cache_.end()) it = cache_.emplace(window.window_id, encoder_.encode(window)).first;
  return it->second;
}

WindowLookup make_window_lookup(std::span<const Window> windows) {
  WindowLookup lookup;
  for (const auto& w : windows) lookup.emplace(w.window_id, &w);
  return lookup;
}

double batch_top1(const Matrix& psi, std::span<const std::string> captions, bool by_caption) {
  if (psi.rows() == 0) return 0.0;
  int hits = 0;
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < psi.cols(); ++j) {
      if (psi(i, j) > psi(i, best)) best = j;
    }
    if (best == i || (by_caption && captions[best] == captions[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(psi.rows());
}

namespace {

struct PairTensors {
  Matrix pooled;  // n x frame_dim
  Matrix text;    // n x text_dim
  std::vector<std::string> captions;
};

PairTensors build_tensors(std::span<const SegmentRecord> pairs, const WindowLookup& windows,
                          FeatureCache& cache, const FrameEncoder& frames, const TextEmbedder& text) {
  PairTensors t;
  const auto n = static_cast<Eigen::Index>(pairs.size());
  t.pooled.resize(n, frames.dim());
  t.text.resize(n, text.dim());
  t.captions.reserve(pairs.size());
  std::unordered_map<std::string, Vector> text_cache;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = pairs[i];
    auto it = windows.find(rec.spec.window_id);
    if (it == windows.end()) {
      throw InvalidInput("pair references unknown window '" + rec.spec.window_id + "'");
    }
    t.pooled.row(i) = pool_segment(cache.get(*it->second), rec.spec.a, rec.spec.b).transpose();
    auto tc = text_cache.find(rec.caption);
    if (tc == text_cache.end()) tc = text_cache.emplace(rec.caption, text.embed(rec.caption)).first;
    t.text.row(i) = tc->second.transpose();
    t.captions.push_back(rec.caption);
  }
  return t;
}

// Flat views over every trainable array, in a fixed order.
template <class Head>
auto param_blocks(Head& h) {
  return std::array{std::span<double>(h.W1.data(), h.W1.size()), std::span<double>(h.b1.data(), h.b1.size()),
                    std::span<double>(h.W2.data(), h.W2.size()), std::span<double>(h.b2.data(), h.b2.size())};
}

std::vector<std::span<double>> model_params(DualEncoder& m) {
  std::vector<std::span<double>> out;
  for (auto s : param_blocks(m.segment_head)) out.push_back(s);
  for (auto s : param_blocks(m.text_head)) out.push_back(s);
  return out;
}

std::vector<std::span<double>> grad_views(HeadGrad& seg, HeadGrad& txt) {
  std::vector<std::span<double>> out;
  for (auto s : param_blocks(seg)) out.push_back(s);
  for (auto s : param_blocks(txt)) out.push_back(s);
  return out;
}

void round_to_float(std::span<double> values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

void round_model(DualEncoder& m) {
  for (auto s : model_params(m)) round_to_float(s);
  round_to_float({m.scaler.mean.data(), static_cast<std::size_t>(m.scaler.mean.size())});
  round_to_float({m.scaler.scale.data(), static_cast<std::size_t>(m.scaler.scale.size())});
}

struct BatchEval {
  double loss = 0.0;
  double acc1 = 0.0;
  double acc1_index = 0.0;
};

// Validation in fixed, unshuffled chunks of batch_size.
BatchEval evaluate(const DualEncoder& model, const PairTensors& val, const Matrix& val_scaled,
                   int batch_size, double tau) {
  BatchEval out;
  const Eigen::Index n = val.pooled.rows();
  double weight = 0.0;
  for (Eigen::Index start = 0; start < n; start += batch_size) {
    const Eigen::Index len = std::min<Eigen::Index>(batch_size, n - start);
    const Matrix Z = head_forward(model.segment_head, val_scaled.middleRows(start, len)).Z;
    const Matrix U = head_forward(model.text_head, val.text.middleRows(start, len)).Z;
    const Matrix psi = similarity_matrix(Z, U, tau);
    std::span<const std::string> caps(val.captions.data() + start, static_cast<std::size_t>(len));
    out.loss += infonce_loss(psi).loss * len;
    out.acc1 += batch_top1(psi, caps, true) * len;
    out.acc1_index += batch_top1(psi, caps, false) * len;
    weight += len;
  }
  out.loss /= weight;
  out.acc1 /= weight;
  out.acc1_index /= weight;
  return out;
}

}  // namespace

TrainResult train(std::span<const SegmentRecord> train_pairs, std::span<const SegmentRecord> val_pairs,
                  const WindowLookup& windows, const TrainConfig& cfg, const FrameEncoder& frames,
                  const TextEmbedder& text) {
  cfg.validate();
  if (static_cast<int>(train_pairs.size()) < cfg.batch_size) {
    throw InvalidInput("train: " + std::to_string(train_pairs.size()) +
                       " training pairs is fewer than batch_size " + std::to_string(cfg.batch_size));
  }
  if (val_pairs.empty()) throw InvalidInput("train: validation split is empty");

  FeatureCache cache(frames);
  const PairTensors tr = build_tensors(train_pairs, windows, cache, frames, text);
  const PairTensors va = build_tensors(val_pairs, windows, cache, frames, text);

  std::mt19937_64 rng(cfg.rng_seed);
  DualEncoder model;
  model.scaler = FeatureScaler::fit(tr.pooled);
  const int fd = frames.dim();
  const int td = text.dim();
  model.segment_head = ProjectionHead::glorot(fd, cfg.segment_hidden > 0 ? cfg.segment_hidden : fd,
                                              cfg.embed_dim, rng);
  model.text_head = ProjectionHead::glorot(td, cfg.text_hidden > 0 ? cfg.text_hidden : td,
                                           cfg.embed_dim, rng);
  round_model(model);

  const Matrix tr_scaled = model.scaler.apply(tr.pooled);
  const Matrix va_scaled = model.scaler.apply(va.pooled);

  HeadGrad gseg(model.segment_head);
  HeadGrad gtxt(model.text_head);
  auto params = model_params(model);
  auto grads = grad_views(gseg, gtxt);
  std::vector<std::vector<double>> m1, m2;
  for (auto p : params) {
    m1.emplace_back(p.size(), 0.0);
    m2.emplace_back(p.size(), 0.0);
  }

  TrainResult result;
  result.best_val_acc1 = -1.0;
  DualEncoder best = model;
  std::vector<Eigen::Index> order(tr.pooled.rows());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  int step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    const auto n = static_cast<Eigen::Index>(order.size());
    for (Eigen::Index start = 0; start + 1 < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      if (len < 2) break;
      Matrix Xs(len, tr_scaled.cols());
      Matrix Xt(len, tr.text.cols());
      for (Eigen::Index r = 0; r < len; ++r) {
        Xs.row(r) = tr_scaled.row(order[start + r]);
        Xt.row(r) = tr.text.row(order[start + r]);
      }
      HeadForward fs, ft;
      InfoNceResult nce;
      try {
        fs = head_forward(model.segment_head, Xs);
        ft = head_forward(model.text_head, Xt);
        nce = infonce_loss(similarity_matrix(fs.Z, ft.Z, cfg.tau));
      } catch (const RuntimeFailure&) {
        // Overflowed parameters surface as zero/NaN norms or a non-finite loss.
        nce.loss = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(nce.loss)) {
        throw TrainingFailure("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                              std::to_string(step + 1));
      }
      loss_sum += nce.loss;
      ++batches;

      gseg.set_zero();
      gtxt.set_zero();
      head_backward(model.segment_head, fs, (nce.grad * ft.Z) / cfg.tau, gseg);
      head_backward(model.text_head, ft, (nce.grad.transpose() * fs.Z) / cfg.tau, gtxt);

      double sq = 0.0;
      for (auto g : grads) {
        for (double v : g) sq += v * v;
      }
      const double gnorm = std::sqrt(sq);
      if (!std::isfinite(gnorm)) {
        throw TrainingFailure("non-finite gradient at epoch " + std::to_string(epoch) + ", step " +
                              std::to_string(step + 1));
      }
      const double clip = gnorm > cfg.grad_clip_norm ? cfg.grad_clip_norm / gnorm : 1.0;

      ++step;
      const double lr = cfg.warmup_steps > 0
                            ? cfg.learning_rate * std::min(1.0, static_cast<double>(step) / cfg.warmup_steps)
                            : cfg.learning_rate;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, step);
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, step);
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto p = params[k];
        auto g = grads[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
          const double gi = g[i] * clip;
          m1[k][i] = cfg.adam_beta1 * m1[k][i] + (1.0 - cfg.adam_beta1) * gi;
          m2[k][i] = cfg.adam_beta2 * m2[k][i] + (1.0 - cfg.adam_beta2) * gi * gi;
          const double mhat = m1[k][i] / bc1;
          const double vhat = m2[k][i] / bc2;
          p[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) + cfg.weight_decay * p[i]);
        }
      }
    }

    const BatchEval ev = evaluate(model, va, va_scaled, cfg.batch_size, cfg.tau);
    result.log.push_back({epoch, batches > 0 ? loss_sum / batches : 0.0, ev.loss, ev.acc1, ev.acc1_index});
    if (ev.acc1 > result.best_val_acc1) {
      result.best_val_acc1 = ev.acc1;
      result.best_epoch = epoch;
      best = model;
    }
  }

  round_model(best);
  result.model = std::move(best);
  result.steps = step;
  return result;
}

namespace {

constexpr char kMagic[8] = {'T', 'S', 'R', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw InvalidInput("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

void put_floats(std::string& out, std::span<const double> values) {
  for (double v : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

void get_floats(const std::string& in, std::size_t& pos, std::span<double> values) {
  for (double& v : values) v = static_cast<double>(std::bit_cast<float>(get_u32(in, pos)));
}

json config_json(const TrainConfig& c) {
  return {{"tau", c.tau},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"warmup_steps", c.warmup_steps},
          {"grad_clip_norm", c.grad_clip_norm},
          {"rng_seed", c.rng_seed},
          {"embed_dim", c.embed_dim},
          {"segment_hidden", c.segment_hidden},
          {"text_hidden", c.text_hidden},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps}};
}

TrainConfig config_from(const json& j) {
  TrainConfig c;
  c.tau = j.at("tau").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.warmup_steps = j.at("warmup_steps").get<int>();
  c.grad_clip_norm = j.at("grad_clip_norm").get<double>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.segment_hidden = j.at("segment_hidden").get<int>();
  c.text_hidden = j.at("text_hidden").get<int>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  return c;
}

json head_dims(const ProjectionHead& h) {
  return {h.input_dim(), h.hidden_dim(), h.output_dim()};
}

ProjectionHead shaped_head(const json& dims) {
  ProjectionHead h;
  const int in = dims.at(0).get<int>();
  const int hid = dims.at(1).get<int>();
  const int out = dims.at(2).get<int>();
  if (in < 1 || hid < 1 || out < 1) throw InvalidInput("checkpoint: bad head dimensions");
  h.W1.resize(hid, in);
  h.b1.resize(hid);
  h.W2.resize(out, hid);
  h.b2.resize(out);
  return h;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainResult& result,
                     const TrainConfig& cfg) {
  const auto& m = result.model;
  json header;
  header["segment_head"] = head_dims(m.segment_head);
  header["text_head"] = head_dims(m.text_head);
  header["config"] = config_json(cfg);
  header["best_epoch"] = result.best_epoch;
  header["best_val_acc1"] = result.best_val_acc1;
  json log = json::array();
  for (const auto& e : result.log) {
    log.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"val_loss", e.val_loss},
                   {"val_acc1", e.val_acc1},
                   {"val_acc1_index", e.val_acc1_index}});
  }
  header["log"] = log;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  DualEncoder copy = m;
  put_floats(out, {copy.scaler.mean.data(), static_cast<std::size_t>(copy.scaler.mean.size())});
  put_floats(out, {copy.scaler.scale.data(), static_cast<std::size_t>(copy.scaler.scale.size())});
  for (auto block : model_params(copy)) put_floats(out, block);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write checkpoint '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("checkpoint '" + path.string() + "' not found");
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < sizeof kMagic || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0) {
    throw InvalidInput("'" + path.string() + "' is not a checkpoint");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = get_u32(in, pos);
  if (version != kCheckpointVersion) {
    throw InvalidInput("unsupported checkpoint version " + std::to_string(version));
  }
  const auto hlen = get_u32(in, pos);
  if (pos + hlen > in.size()) throw InvalidInput("checkpoint truncated");
  const json header = json::parse(in.substr(pos, hlen));
  pos += hlen;

  Checkpoint ck;
  ck.cfg = config_from(header.at("config"));
  ck.best_epoch = header.at("best_epoch").get<int>();
  ck.best_val_acc1 = header.at("best_val_acc1").get<double>();
  for (const auto& e : header.at("log")) {
    ck.log.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                      e.at("val_loss").get<double>(), e.at("val_acc1").get<double>(),
                      e.at("val_acc1_index").get<double>()});
  }
  auto& m = ck.model;
  m.segment_head = shaped_head(header.at("segment_head"));
  m.text_head = shaped_head(header.at("text_head"));
  const int fd = m.segment_head.input_dim();
  m.scaler.mean.resize(fd);
  m.scaler.scale.resize(fd);
  get_floats(in, pos, {m.scaler.mean.data(), static_cast<std::size_t>(fd)});
  get_floats(in, pos, {m.scaler.scale.data(), static_cast<std::size_t>(fd)});
  for (auto block : model_params(m)) get_floats(in, pos, block);
  if (pos != in.size()) throw InvalidInput("checkpoint has trailing bytes");
  return ck;
}

}  // namespace tsr
