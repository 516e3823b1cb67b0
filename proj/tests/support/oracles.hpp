// Reference implementations used only by tests. They favour directness over
// speed and share no code with the library beyond plain data types.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace oracle {

// Dense (L-2) x L second-difference matrix.
inline Eigen::MatrixXd second_diff_matrix(int L) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(L - 2, L);
  for (int r = 0; r < L - 2; ++r) {
    D(r, r) = 1.0;
    D(r, r + 1) = -2.0;
    D(r, r + 2) = 1.0;
  }
  return D;
}

inline double tv2_objective(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double lambda) {
  const Eigen::MatrixXd D = second_diff_matrix(static_cast<int>(x.size()));
  return (u - x).squaredNorm() + lambda * (D * u).lpNorm<1>();
}

struct Tv2Reference {
  Eigen::VectorXd u;
  double primal = 0.0;  // objective at u
  double dual = 0.0;    // certified lower bound on the optimum
};

// Log-barrier method on the dual box QP
//   max  2 (Dx)^T nu - ||D^T nu||^2   s.t. |nu_i| <= lambda / 2,
// with u = x - D^T nu. Dense Newton steps; fine for L <= ~100.
inline Tv2Reference tv2_barrier(const Eigen::VectorXd& x, double lambda) {
  const int L = static_cast<int>(x.size());
  const int m = L - 2;
  const Eigen::MatrixXd D = second_diff_matrix(L);
  const Eigen::MatrixXd Q = D * D.transpose();
  const Eigen::VectorXd c = D * x;
  const double mu = lambda / 2.0;
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);

  // Minimise t * (nu^T Q nu - 2 c^T nu) - sum log(mu^2 - nu_i^2).
  auto phi = [&](const Eigen::VectorXd& v, double t) {
    double s = t * (v.dot(Q * v) - 2.0 * c.dot(v));
    for (int i = 0; i < m; ++i) {
      const double slack = mu * mu - v[i] * v[i];
      if (slack <= 0.0) return std::numeric_limits<double>::infinity();
      s -= std::log(slack);
    }
    return s;
  };
  for (double t = 1.0 / std::max(mu, 1e-12); t < 1e14 / std::max(1.0, mu); t *= 8.0) {
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd g = t * (2.0 * Q * nu - 2.0 * c);
      Eigen::MatrixXd H = 2.0 * t * Q;
      for (int i = 0; i < m; ++i) {
        const double slack = mu * mu - nu[i] * nu[i];
        g[i] += 2.0 * nu[i] / slack;
        H(i, i) += 2.0 * (mu * mu + nu[i] * nu[i]) / (slack * slack);
      }
      const Eigen::VectorXd step = -H.ldlt().solve(g);
      const double decrement = -g.dot(step);
      if (decrement < 1e-14) break;
      double s = 1.0;
      const double f0 = phi(nu, t);
      while (s > 1e-16) {
        const Eigen::VectorXd cand = nu + s * step;
        const double f1 = phi(cand, t);
        // Near the centre the Armijo test drowns in rounding of f; a
        // feasible full Newton step converges quadratically there.
        if (f1 <= f0 - 0.25 * s * decrement || (s == 1.0 && decrement < 0.1 && std::isfinite(f1))) break;
        s *= 0.5;
      }
      if (s <= 1e-16) break;
      nu += s * step;
    }
  }
  Tv2Reference ref;
  ref.u = x - D.transpose() * nu;
  ref.primal = tv2_objective(x, ref.u, lambda);
  ref.dual = 2.0 * c.dot(nu) - (D.transpose() * nu).squaredNorm();
  return ref;
}

// Literal change-point rule: Delta^2 over t = 2..L-1 (1-based), mean-centred
// std with denominator L-2, strict comparison against multiplier * sigma.
inline std::vector<int> change_points(const std::vector<double>& x, double multiplier) {
  const int L = static_cast<int>(x.size());
  std::vector<double> d;
  for (int t = 2; t <= L - 1; ++t) d.push_back(x[t] - 2.0 * x[t - 1] + x[t - 2]);
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= (L - 2);
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  const double theta = multiplier * std::sqrt(var / (L - 2));
  std::vector<int> out;
  for (int t = 2; t <= L - 1; ++t) {
    if (std::fabs(d[t - 2]) > theta) out.push_back(t);
  }
  return out;
}

// Full sort of candidate scores; ties by candidate row.
struct Ranked {
  std::vector<std::size_t> order;  // candidate positions, best first
  int gt_rank = 0;
};

inline Ranked full_sort(const std::vector<double>& scores, const std::vector<std::size_t>& rows,
                        std::size_t gt) {
  Ranked r;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return rows[a] < rows[b];
  });
  int greater = 0;
  for (double s : scores) {
    if (s > scores[gt]) ++greater;
  }
  r.gt_rank = greater + 1;
  return r;
}

inline double recall(const std::vector<int>& ranks, int k) {
  double hits = 0.0;
  for (int r : ranks) hits += (r <= k) ? 1.0 : 0.0;
  return hits / static_cast<double>(ranks.size());
}

inline double reciprocal_mean(const std::vector<int>& ranks) {
  double s = 0.0;
  for (int r : ranks) s += 1.0 / static_cast<double>(r);
  return s / static_cast<double>(ranks.size());
}

// Symmetric InfoNCE written from the definition, no shared helpers.
inline double infonce(const Eigen::MatrixXd& psi) {
  const int B = static_cast<int>(psi.rows());
  double rows = 0.0, cols = 0.0;
  for (int i = 0; i < B; ++i) {
    double denom = 0.0;
    for (int j = 0; j < B; ++j) denom += std::exp(psi(i, j));
    rows += -std::log(std::exp(psi(i, i)) / denom);
  }
  for (int j = 0; j < B; ++j) {
    double denom = 0.0;
    for (int i = 0; i < B; ++i) denom += std::exp(psi(i, j));
    cols += -std::log(std::exp(psi(j, j)) / denom);
  }
  return 0.5 * (rows / B + cols / B);
}

// Two-layer head with loops: y = W2 relu(W1 v + b1) + b2, then y / |y|.
inline std::vector<double> head(const std::vector<std::vector<double>>& W1, const std::vector<double>& b1,
                                const std::vector<std::vector<double>>& W2, const std::vector<double>& b2,
                                const std::vector<double>& v) {
  std::vector<double> h(W1.size());
  for (std::size_t i = 0; i < W1.size(); ++i) {
    double s = b1[i];
    for (std::size_t j = 0; j < v.size(); ++j) s += W1[i][j] * v[j];
    h[i] = s > 0.0 ? s : 0.0;
  }
  std::vector<double> y(W2.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < W2.size(); ++i) {
    double s = b2[i];
    for (std::size_t j = 0; j < h.size(); ++j) s += W2[i][j] * h[j];
    y[i] = s;
    norm += s * s;
  }
  norm = std::sqrt(norm);
  for (double& e : y) e /= norm;
  return y;
}

inline double ols_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    st += t;
    sy += y[t];
    stt += static_cast<double>(t) * t;
    sty += t * y[t];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

// Piecewise-linear resampling by explicit segment search.
inline std::vector<double> resample(const std::vector<double>& v, int target) {
  std::vector<double> out;
  const double n = static_cast<double>(v.size());
  for (int j = 0; j < target; ++j) {
    const double pos = (n - 1.0) * j / (target - 1.0);
    std::size_t seg = 0;
    while (seg + 2 < v.size() && pos > seg + 1.0) ++seg;
    const double w = pos - seg;
    out.push_back((1.0 - w) * v[seg] + w * v[seg + 1]);
  }
  return out;
}

}  // namespace oracle
