#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsr/captioning.hpp"
#include "tsr/encoder.hpp"

namespace tsr {

struct TrainConfig {
  double tau = 0.07;
  int batch_size = 64;
  int epochs = 30;
  double learning_rate = 1e-3;
  double weight_decay = 0.05;
  int warmup_steps = 500;
  double grad_clip_norm = 1.0;
  std::uint64_t rng_seed = 0;
  int embed_dim = kEmbeddingDim;
  int segment_hidden = 0;  // 0: same as the head's input width
  int text_hidden = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  // Full-scale schedule: batch 512, lr 1e-4, 100 epochs.
  static TrainConfig full_scale_defaults();
};

// Per-feature standardization of pooled segment features, fitted on the
// training pairs. Constant features keep scale 1.
struct FeatureScaler {
  Vector mean;
  Vector scale;  // multiplies (x - mean)

  static FeatureScaler fit(const Matrix& pooled);
  static FeatureScaler identity(int dim);
  Matrix apply(const Matrix& rows) const;
};

struct DualEncoder {
  FeatureScaler scaler;
  ProjectionHead segment_head;
  ProjectionHead text_head;

  // pool(H, a, b) -> scaler -> head -> unit vector
  Vector embed_segment(const Matrix& H, int a, int b) const;
  Vector embed_text(const Vector& text_features) const;
  std::size_t parameter_count() const;
};

// Frame features keyed by window_id. Not thread-safe.
class FeatureCache {
 public:
  explicit FeatureCache(const FrameEncoder& encoder) : encoder_(encoder) {}
  const Matrix& get(const Window& window);
  std::size_t size() const { return cache_.size(); }

 private:
  const FrameEncoder& encoder_;
  std::unordered_map<std::string, Matrix> cache_;
};

using WindowLookup = std::unordered_map<std::string, const Window*>;
WindowLookup make_window_lookup(std::span<const Window> windows);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc1 = 0.0;        // top caption has the paired caption's text
  double val_acc1_index = 0.0;  // top caption is the paired row itself
};

struct TrainResult {
  DualEncoder model;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_acc1 = 0.0;
  int steps = 0;
};

// Fraction of rows whose argmax column (lowest index on ties) is a correct
// match. With by_caption, any column carrying the same caption text counts.
double batch_top1(const Matrix& psi, std::span<const std::string> captions, bool by_caption);

// Symmetric-InfoNCE training of both heads with AdamW, linear warmup and
// global-norm clipping; keeps the epoch with the best validation Acc@1.
// Parameters are rounded to float32 at the end so checkpoints round-trip exactly.
TrainResult train(std::span<const SegmentRecord> train_pairs, std::span<const SegmentRecord> val_pairs,
                  const WindowLookup& windows, const TrainConfig& cfg, const FrameEncoder& frames,
                  const TextEmbedder& text);

void save_checkpoint(const std::filesystem::path& path, const TrainResult& result,
                     const TrainConfig& cfg);

struct Checkpoint {
  DualEncoder model;
  TrainConfig cfg;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_acc1 = 0.0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tsr
