#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tsr/encoder.hpp"
#include "tsr/error.hpp"
#include "tsr/records.hpp"

using namespace tsr;

namespace {

Window ramp(int L, double step) {
  Window w;
  w.window_id = "w";
  w.values.resize(L);
  for (int t = 0; t < L; ++t) w.values[t] = step * t;
  return w;
}

Matrix random_matrix(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  return M;
}

std::vector<std::vector<double>> to_rows(const Matrix& M) {
  std::vector<std::vector<double>> out(M.rows(), std::vector<double>(M.cols()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[i][j] = M(i, j);
  return out;
}

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Loss of a batch through both heads; the quantity whose gradient training uses.
double batch_loss(const ProjectionHead& f, const ProjectionHead& g, const Matrix& X, const Matrix& T, double tau) {
  return infonce_loss(similarity_matrix(head_forward(f, X).Z, head_forward(g, T).Z, tau)).loss;
}

}  // namespace

TEST(ReferenceFeaturizer, RampInteriorValues) {
  const double step = 0.01;
  const int L = 300;
  const Matrix H = encode_frames(ramp(L, step));
  ASSERT_EQ(H.rows(), L);
  ASSERT_EQ(H.cols(), ReferenceFeaturizer::kDim);
  const int t = 150;
  EXPECT_DOUBLE_EQ(H(t, 0), step * t);
  EXPECT_NEAR(H(t, 1), step, 1e-15);
  EXPECT_NEAR(H(t, 2), step * t, 1e-12);
  EXPECT_NEAR(H(t, 3), step * std::sqrt((31.0 * 31.0 - 1.0) / 12.0), 1e-12);
  EXPECT_NEAR(H(t, 4), step, 1e-12);
  EXPECT_NEAR(H(t, 5), step * (t - (L - 1) / 2.0), 1e-12);
  EXPECT_DOUBLE_EQ(H(t, 6), (t + 1.0) / L);
  EXPECT_NEAR(H(t, 7), 100 * step, 1e-12);
}

TEST(ReferenceFeaturizer, SlopeMatchesOlsAtEdges) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Window w;
  w.values.resize(80);
  for (double& v : w.values) v = g(rng);
  const Matrix H = encode_frames(w);
  for (int t : {0, 7, 40, 79}) {
    const int lo = std::max(0, t - 15), hi = std::min(79, t + 15);
    const std::vector<double> slice(w.values.begin() + lo, w.values.begin() + hi + 1);
    EXPECT_NEAR(H(t, 4), oracle::ols_slope(slice), 1e-12) << t;
  }
}

TEST(PoolSegment, MeanOfRowsAndLinear) {
  std::mt19937_64 rng(1);
  const Matrix H1 = random_matrix(50, 8, rng), H2 = random_matrix(50, 8, rng);
  const Vector p = pool_segment(H1, 3, 20);
  Vector ref = Vector::Zero(8);
  for (int t = 2; t < 20; ++t) ref += H1.row(t).transpose();
  EXPECT_LT((p - ref / 18.0).norm(), 1e-12);
  const Matrix mix = 2.0 * H1 - 0.5 * H2;
  EXPECT_LT((pool_segment(mix, 3, 20) - (2.0 * p - 0.5 * pool_segment(H2, 3, 20))).norm(), 1e-12);
  EXPECT_THROW(pool_segment(H1, 0, 3), InvalidInput);
  EXPECT_THROW(pool_segment(H1, 10, 51), InvalidInput);
}

TEST(TextEmbedding, HashEmbedderIsNormalizedAndCaseInsensitive) {
  const HashTextEmbedder e;
  const Vector a = e.embed("Smooth rising segment");
  EXPECT_EQ(a.size(), 256);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_LT((a - e.embed("smooth, RISING segment!")).norm(), 1e-15);
  EXPECT_GT((a - e.embed("smooth falling segment")).norm(), 0.1);
  EXPECT_THROW(e.embed(""), InvalidInput);
  EXPECT_THROW(e.embed("?!"), InvalidInput);
  EXPECT_EQ(tokenize("A-b  c9"), (std::vector<std::string>{"a", "b", "c9"}));
}

TEST(TextEmbedding, PrecomputedLookup) {
  const auto path = std::filesystem::temp_directory_path() / "tsr_precomputed.ndjson";
  write_text_file(path, "{\"caption\": \"up\", \"vector\": [1, 0]}\n{\"caption\": \"down\", \"vector\": [0, 1]}\n");
  const PrecomputedTextEmbedder e(path);
  EXPECT_EQ(e.dim(), 2);
  EXPECT_EQ(e.embed("down")[1], 1.0);
  EXPECT_THROW(e.embed("sideways"), LookupError);
  std::filesystem::remove(path);
}

TEST(ProjectionHead, IdentityHeadNormalizes) {
  const auto h = ProjectionHead::identity(8);
  Vector v = Vector::Zero(8);
  v[0] = 3.0;
  v[1] = 4.0;
  const Vector z = project_and_normalize(v, h);
  ASSERT_EQ(z.size(), kEmbeddingDim);
  EXPECT_DOUBLE_EQ(z[0], 0.6);
  EXPECT_DOUBLE_EQ(z[1], 0.8);
  EXPECT_EQ(z.tail(kEmbeddingDim - 2).norm(), 0.0);
  EXPECT_THROW(project_and_normalize(Vector::Zero(8), h), DegenerateEmbedding);
}

TEST(ProjectionHead, MatchesLoopOracle) {
  std::mt19937_64 rng(11);
  auto h = ProjectionHead::glorot(8, 16, 12, rng);
  h.b1 = random_matrix(16, 1, rng, 0.1);
  h.b2 = random_matrix(12, 1, rng, 0.1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = random_matrix(8, 1, rng);
    const Vector z = project_and_normalize(v, h);
    const auto ref = oracle::head(to_rows(h.W1), to_vec(h.b1), to_rows(h.W2), to_vec(h.b2), to_vec(v));
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(z[i], ref[i], 1e-12);
  }
}

TEST(ProjectionHead, GlorotIsSeeded) {
  std::mt19937_64 a(5), b(5);
  const auto h1 = ProjectionHead::glorot(8, 16, 4, a);
  const auto h2 = ProjectionHead::glorot(8, 16, 4, b);
  EXPECT_EQ(h1.W1, h2.W1);
  EXPECT_LE(h1.W1.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 24.0));
}

TEST(Similarity, ScaledDotProducts) {
  Matrix Z(2, 2), U(2, 2);
  Z << 1, 0, 0, 1;
  U << 0.6, 0.8, 1, 0;
  const Matrix S = similarity_matrix(Z, U, 0.5);
  EXPECT_DOUBLE_EQ(S(0, 0), 1.2);
  EXPECT_DOUBLE_EQ(S(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(S(1, 0), 1.6);
  EXPECT_THROW(similarity_matrix(Z, U, 0.0), InvalidInput);
}

TEST(InfoNce, KnownValues) {
  for (int B : {1, 2, 4, 16}) {
    EXPECT_NEAR(infonce_loss(Matrix::Constant(B, B, 0.3)).loss, std::log(B), 1e-12);
  }
  const Matrix sharp = 50.0 * Matrix::Identity(4, 4);
  EXPECT_LT(infonce_loss(sharp).loss, 1e-19);
  EXPECT_THROW(infonce_loss(Matrix::Zero(2, 3)), InvalidInput);
}

TEST(InfoNce, MatchesDefinitionAndSymmetries) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int B = 2 + trial % 7;
    const Matrix psi = random_matrix(B, B, rng, 3.0);
    const auto r = infonce_loss(psi);
    EXPECT_NEAR(r.loss, oracle::infonce(psi), 1e-12);
    EXPECT_NEAR(infonce_loss(psi.transpose()).loss, r.loss, 1e-12);
    EXPECT_NEAR(infonce_loss((psi.array() + 7.5).matrix()).loss, r.loss, 1e-12);
    EXPECT_NEAR(r.grad.sum(), 0.0, 1e-12);
  }
}

TEST(InfoNce, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  const Matrix psi = random_matrix(4, 4, rng, 2.0);
  const auto r = infonce_loss(psi);
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Matrix p = psi, m = psi;
      p(i, j) += h;
      m(i, j) -= h;
      const double fd = (infonce_loss(p).loss - infonce_loss(m).loss) / (2 * h);
      EXPECT_LE(std::abs(fd - r.grad(i, j)), 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(InfoNce, HeadGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(13);
  const double tau = 0.07;
  auto f = ProjectionHead::glorot(6, 10, 5, rng);
  auto g = ProjectionHead::glorot(7, 9, 5, rng);
  f.b1 = random_matrix(10, 1, rng, 0.1);
  g.b2 = random_matrix(5, 1, rng, 0.1);
  const Matrix X = random_matrix(4, 6, rng), T = random_matrix(4, 7, rng);

  const auto fz = head_forward(f, X);
  const auto gz = head_forward(g, T);
  const auto r = infonce_loss(similarity_matrix(fz.Z, gz.Z, tau));
  HeadGrad df(f), dg(g);
  head_backward(f, fz, r.grad * gz.Z / tau, df);
  head_backward(g, gz, r.grad.transpose() * fz.Z / tau, dg);

  const double h = 1e-6;
  auto check = [&](double& param, double analytic, ProjectionHead& fp, ProjectionHead& gp) {
    const double keep = param;
    param = keep + h;
    const double lp = batch_loss(fp, gp, X, T, tau);
    param = keep - h;
    const double lm = batch_loss(fp, gp, X, T, tau);
    param = keep;
    const double fd = (lp - lm) / (2 * h);
    EXPECT_LE(std::abs(fd - analytic), 1e-6 * std::max(1.0, std::abs(fd)));
  };
  for (Eigen::Index k = 0; k < f.W1.size(); ++k) check(f.W1.data()[k], df.W1.data()[k], f, g);
  for (Eigen::Index k = 0; k < f.b1.size(); ++k) check(f.b1[k], df.b1[k], f, g);
  for (Eigen::Index k = 0; k < f.W2.size(); ++k) check(f.W2.data()[k], df.W2.data()[k], f, g);
  for (Eigen::Index k = 0; k < g.W1.size(); ++k) check(g.W1.data()[k], dg.W1.data()[k], f, g);
  for (Eigen::Index k = 0; k < g.b2.size(); ++k) check(g.b2[k], dg.b2[k], f, g);
}
