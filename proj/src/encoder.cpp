#include "tsr/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "tsr/error.hpp"
#include "tsr/records.hpp"

namespace tsr {

Matrix ReferenceFeaturizer::encode(const Window& window) const {
  const int L = static_cast<int>(window.length());
  if (L < 1) throw InvalidInput("encode_frames: empty window");
  const auto& x = window.values;
  Matrix H(L, kDim);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= L;

  const int hs = kShortWidth / 2;
  const int hl = kLongWidth / 2;
  for (int t = 0; t < L; ++t) {
    const int lo = std::max(0, t - hs);
    const int hi = std::min(L - 1, t + hs);
    const int n = hi - lo + 1;
    double m = 0.0, tc = 0.0;
    for (int k = lo; k <= hi; ++k) {
      m += x[k];
      tc += k;
    }
    m /= n;
    tc /= n;
    double var = 0.0, stt = 0.0, stx = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double dx = x[k] - m;
      const double dt = k - tc;
      var += dx * dx;
      stt += dt * dt;
      stx += dt * dx;
    }
    const int rlo = std::max(0, t - hl);
    const int rhi = std::min(L - 1, t + hl);
    const auto [mn, mx] = std::minmax_element(x.begin() + rlo, x.begin() + rhi + 1);

    H(t, 0) = x[t];
    H(t, 1) = L == 1 ? 0.0 : (t == 0 ? x[1] - x[0] : x[t] - x[t - 1]);
    H(t, 2) = m;
    H(t, 3) = std::sqrt(var / n);
    H(t, 4) = stt > 0.0 ? stx / stt : 0.0;
    H(t, 5) = x[t] - mean;
    H(t, 6) = static_cast<double>(t + 1) / L;
    H(t, 7) = *mx - *mn;
  }
  return H;
}

Matrix encode_frames(const Window& window) { return ReferenceFeaturizer{}.encode(window); }

Vector pool_segment(const Matrix& H, int a, int b) {
  if (a < 1 || b < a || b > H.rows()) {
    throw InvalidInput("pool_segment: interval (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") outside 1.." + std::to_string(H.rows()));
  }
  Vector sum = Vector::Zero(H.cols());
  for (int t = a - 1; t < b; ++t) sum += H.row(t).transpose();
  return sum / static_cast<double>(b - a + 1);
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

HashTextEmbedder::HashTextEmbedder(int buckets, std::uint64_t seed) : buckets_(buckets), seed_(seed) {
  if (buckets < 1) throw InvalidInput("HashTextEmbedder: buckets must be >= 1");
}

Vector HashTextEmbedder::embed(const std::string& caption) const {
  if (caption.empty()) throw InvalidInput("embed_text: empty caption");
  Vector v = Vector::Zero(buckets_);
  for (const auto& tok : tokenize(caption)) {
    const std::uint64_t h = stable_hash(tok, seed_);
    const double sign = (stable_hash(tok, ~seed_) >> 63) ? -1.0 : 1.0;
    v[static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(buckets_))] += sign;
  }
  const double n = v.norm();
  if (n == 0.0) throw InvalidInput("embed_text: caption '" + caption + "' has no tokens");
  return v / n;
}

PrecomputedTextEmbedder::PrecomputedTextEmbedder(std::unordered_map<std::string, Vector> table)
    : table_(std::move(table)) {
  if (table_.empty()) throw InvalidInput("precomputed embeddings: table is empty");
  dim_ = static_cast<int>(table_.begin()->second.size());
  for (const auto& [caption, vec] : table_) {
    if (vec.size() != dim_) throw InvalidInput("precomputed embeddings: mixed dimensions");
  }
}

namespace {

std::unordered_map<std::string, Vector> load_embedding_table(const std::filesystem::path& path) {
  std::unordered_map<std::string, Vector> table;
  for (const auto& line : read_nonempty_lines(path)) {
    const auto row = nlohmann::json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("caption") || !row.contains("vector")) {
      throw InvalidInput(path.string() + ": expected {caption, vector} records");
    }
    const auto values = row["vector"].get<std::vector<double>>();
    table[row["caption"].get<std::string>()] =
        Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  return table;
}

}  // namespace

PrecomputedTextEmbedder::PrecomputedTextEmbedder(const std::filesystem::path& ndjson)
    : PrecomputedTextEmbedder(load_embedding_table(ndjson)) {}

Vector PrecomputedTextEmbedder::embed(const std::string& caption) const {
  if (caption.empty()) throw InvalidInput("embed_text: empty caption");
  auto it = table_.find(caption);
  if (it == table_.end()) throw LookupError("no precomputed embedding for caption '" + caption + "'");
  return it->second;
}

ProjectionHead ProjectionHead::glorot(int in, int hidden, int out, std::mt19937_64& rng) {
  if (in < 1 || hidden < 1 || out < 1) throw InvalidInput("ProjectionHead: dimensions must be >= 1");
  auto fill = [&rng](Matrix& W) {
    const double limit = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = dist(rng);
  };
  ProjectionHead h;
  h.W1.resize(hidden, in);
  h.W2.resize(out, hidden);
  fill(h.W1);
  fill(h.W2);
  h.b1 = Vector::Zero(hidden);
  h.b2 = Vector::Zero(out);
  return h;
}

ProjectionHead ProjectionHead::identity(int in, int out) {
  if (out < in) throw InvalidInput("ProjectionHead::identity needs out >= in");
  ProjectionHead h;
  h.W1 = Matrix::Identity(in, in);
  h.W2 = Matrix::Zero(out, in);
  h.W2.topRows(in) = Matrix::Identity(in, in);
  h.b1 = Vector::Zero(in);
  h.b2 = Vector::Zero(out);
  return h;
}

HeadGrad::HeadGrad(const ProjectionHead& head)
    : W1(Matrix::Zero(head.W1.rows(), head.W1.cols())),
      W2(Matrix::Zero(head.W2.rows(), head.W2.cols())),
      b1(Vector::Zero(head.b1.size())),
      b2(Vector::Zero(head.b2.size())) {}

void HeadGrad::set_zero() {
  W1.setZero();
  W2.setZero();
  b1.setZero();
  b2.setZero();
}

HeadForward head_forward(const ProjectionHead& head, const Matrix& X) {
  if (X.cols() != head.input_dim()) {
    throw InvalidInput("projection head expects " + std::to_string(head.input_dim()) +
                       " inputs, got " + std::to_string(X.cols()));
  }
  HeadForward f;
  f.X = X;
  f.A1 = (X * head.W1.transpose()).rowwise() + head.b1.transpose();
  f.R = f.A1.cwiseMax(0.0);
  f.Y = (f.R * head.W2.transpose()).rowwise() + head.b2.transpose();
  f.norms = f.Y.rowwise().norm();
  f.Z.resize(f.Y.rows(), f.Y.cols());
  for (Eigen::Index i = 0; i < f.Y.rows(); ++i) {
    if (!(f.norms[i] > 0.0)) throw DegenerateEmbedding("projection produced a zero vector");
    f.Z.row(i) = f.Y.row(i) / f.norms[i];
  }
  return f;
}

void head_backward(const ProjectionHead& head, const HeadForward& fwd, const Matrix& dZ,
                   HeadGrad& grad) {
  // d(y/|y|) = (I - z z^T) dy / |y|
  Matrix dY(dZ.rows(), dZ.cols());
  for (Eigen::Index i = 0; i < dZ.rows(); ++i) {
    const double proj = fwd.Z.row(i).dot(dZ.row(i));
    dY.row(i) = (dZ.row(i) - proj * fwd.Z.row(i)) / fwd.norms[i];
  }
  grad.W2.noalias() += dY.transpose() * fwd.R;
  grad.b2 += dY.colwise().sum().transpose();
  Matrix dA1 = dY * head.W2;
  dA1 = dA1.cwiseProduct((fwd.A1.array() > 0.0).cast<double>().matrix());
  grad.W1.noalias() += dA1.transpose() * fwd.X;
  grad.b1 += dA1.colwise().sum().transpose();
}

Vector project_and_normalize(const Vector& v, const ProjectionHead& head) {
  const Matrix X = v.transpose();
  return head_forward(head, X).Z.row(0).transpose();
}

Matrix similarity_matrix(const Matrix& Z, const Matrix& U, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("similarity_matrix: tau must be > 0");
  if (Z.cols() != U.cols()) throw InvalidInput("similarity_matrix: embedding widths differ");
  return (Z * U.transpose()) / tau;
}

InfoNceResult infonce_loss(const Matrix& psi) {
  if (psi.rows() != psi.cols() || psi.rows() == 0) {
    throw InvalidInput("infonce_loss: Psi must be square and non-empty");
  }
  const Eigen::Index B = psi.rows();
  InfoNceResult out;
  out.grad = Matrix::Zero(B, B);
  double row_ce = 0.0;
  double col_ce = 0.0;
  const double w = 0.5 / static_cast<double>(B);
  for (Eigen::Index i = 0; i < B; ++i) {
    const double m = psi.row(i).maxCoeff();
    const Eigen::ArrayXd e = (psi.row(i).array() - m).exp().transpose();
    const double s = e.sum();
    row_ce += std::log(s) + m - psi(i, i);
    out.grad.row(i) += (w / s) * e.matrix().transpose();
    out.grad(i, i) -= w;
  }
  for (Eigen::Index j = 0; j < B; ++j) {
    const double m = psi.col(j).maxCoeff();
    const Eigen::ArrayXd e = (psi.col(j).array() - m).exp();
    const double s = e.sum();
    col_ce += std::log(s) + m - psi(j, j);
    out.grad.col(j) += (w / s) * e.matrix();
    out.grad(j, j) -= w;
  }
  out.loss = 0.5 * (row_ce + col_ce) / static_cast<double>(B);
  if (!std::isfinite(out.loss)) throw NumericalFailure("infonce_loss: non-finite loss");
  return out;
}

}  // namespace tsr
