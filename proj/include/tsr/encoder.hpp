#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unordered_map>

#include "tsr/core.hpp"

namespace tsr {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kEmbeddingDim = 128;

// Maps a window to an L x d matrix whose row t describes frame t.
class FrameEncoder {
 public:
  virtual ~FrameEncoder() = default;
  virtual int dim() const = 0;
  virtual Matrix encode(const Window& window) const = 0;
};

// Eight hand-made per-frame features mixing local dynamics and window context:
//   0 value            4 local OLS slope (31)
//   1 first difference 5 value - window mean
//   2 rolling mean (31) 6 (t + 1) / L
//   3 rolling std (31)  7 rolling range (101)
// Rolling windows are centred and truncated at the edges.
class ReferenceFeaturizer final : public FrameEncoder {
 public:
  static constexpr int kDim = 8;
  static constexpr int kShortWidth = 31;
  static constexpr int kLongWidth = 101;
  int dim() const override { return kDim; }
  Matrix encode(const Window& window) const override;
};

Matrix encode_frames(const Window& window);

// Mean of rows a..b (1-based, inclusive).
Vector pool_segment(const Matrix& H, int a, int b);

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual int dim() const = 0;
  virtual Vector embed(const std::string& caption) const = 0;
};

// Signed feature hashing of lower-cased alphanumeric tokens, l2-normalized.
class HashTextEmbedder final : public TextEmbedder {
 public:
  explicit HashTextEmbedder(int buckets = 256, std::uint64_t seed = 0x5eedULL);
  int dim() const override { return buckets_; }
  Vector embed(const std::string& caption) const override;

 private:
  int buckets_;
  std::uint64_t seed_;
};

// Vectors keyed by caption text, from NDJSON {caption, vector}. Unknown
// captions throw LookupError.
class PrecomputedTextEmbedder final : public TextEmbedder {
 public:
  explicit PrecomputedTextEmbedder(const std::filesystem::path& ndjson);
  explicit PrecomputedTextEmbedder(std::unordered_map<std::string, Vector> table);
  int dim() const override { return dim_; }
  Vector embed(const std::string& caption) const override;
  bool contains(const std::string& caption) const { return table_.contains(caption); }

 private:
  std::unordered_map<std::string, Vector> table_;
  int dim_ = 0;
};

std::vector<std::string> tokenize(const std::string& text);

// in -> hidden -> out with a ReLU in between.
struct ProjectionHead {
  Matrix W1;  // hidden x in
  Vector b1;
  Matrix W2;  // out x hidden
  Vector b2;

  int input_dim() const { return static_cast<int>(W1.cols()); }
  int hidden_dim() const { return static_cast<int>(W1.rows()); }
  int output_dim() const { return static_cast<int>(W2.rows()); }
  std::size_t parameter_count() const { return W1.size() + b1.size() + W2.size() + b2.size(); }

  static ProjectionHead glorot(int in, int hidden, int out, std::mt19937_64& rng);
  // W1 = I, W2 = [I; 0], zero biases: non-negative inputs pass through unchanged.
  static ProjectionHead identity(int in, int out = kEmbeddingDim);
};

struct HeadGrad {
  Matrix W1, W2;
  Vector b1, b2;
  explicit HeadGrad(const ProjectionHead& head);
  void set_zero();
};

// Batched forward pass keeping what backward needs. Rows of X are inputs.
struct HeadForward {
  Matrix X, A1, R, Y, Z;  // Z = rows of Y scaled to unit norm
  Vector norms;
};

HeadForward head_forward(const ProjectionHead& head, const Matrix& X);

// Accumulates parameter gradients given dLoss/dZ.
void head_backward(const ProjectionHead& head, const HeadForward& fwd, const Matrix& dZ,
                   HeadGrad& grad);

// l2-normalized head output; throws DegenerateEmbedding on a zero output.
Vector project_and_normalize(const Vector& v, const ProjectionHead& head);

// Psi_ij = z_i . u_j / tau.
Matrix similarity_matrix(const Matrix& Z, const Matrix& U, double tau);

struct InfoNceResult {
  double loss = 0.0;
  Matrix grad;  // dLoss / dPsi
};

// 0.5 * (CE(Psi, diag) + CE(Psi^T, diag)), each CE averaged over rows.
InfoNceResult infonce_loss(const Matrix& psi);

}  // namespace tsr
