#include "tsr/trend_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <utility>

#include "tsr/error.hpp"

namespace tsr {

std::vector<double> second_diff(std::span<const double> u) {
  if (u.size() < 3) throw InvalidInput("second_diff: length must be >= 3");
  std::vector<double> d(u.size() - 2);
  for (std::size_t t = 1; t + 1 < u.size(); ++t) d[t - 1] = u[t + 1] - 2.0 * u[t] + u[t - 1];
  return d;
}

std::vector<double> second_diff_transpose(std::span<const double> v) {
  std::vector<double> out(v.size() + 2, 0.0);
  for (std::size_t r = 0; r < v.size(); ++r) {
    out[r] += v[r];
    out[r + 1] -= 2.0 * v[r];
    out[r + 2] += v[r];
  }
  return out;
}

double tv2_objective(std::span<const double> x, std::span<const double> u, double lambda) {
  if (x.size() != u.size()) throw InvalidInput("tv2_objective: length mismatch");
  if (x.size() < 3) throw InvalidInput("tv2_objective: length must be >= 3");
  double fit = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) fit += (u[i] - x[i]) * (u[i] - x[i]);
  double tv = 0.0;
  for (double d : second_diff(u)) tv += std::abs(d);
  return fit + lambda * tv;
}

namespace {

std::vector<double> system_band(std::size_t n, double rho) {
  constexpr std::size_t p = 2;
  std::vector<double> band(n * (p + 1), 0.0);
  auto add = [&](std::size_t i, std::size_t j, double v) { band[i * (p + 1) + (p - (i - j))] += v; };
  for (std::size_t i = 0; i < n; ++i) add(i, i, 2.0);
  const double c[3] = {1.0, -2.0, 1.0};
  for (std::size_t r = 0; r + 2 < n; ++r) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b <= a; ++b) add(r + a, r + b, rho * c[a] * c[b]);
    }
  }
  return band;
}

struct FactorCache {
  std::mutex mu;
  std::map<std::pair<std::size_t, double>, std::shared_ptr<const BandedCholesky>> entries;
};

FactorCache& factor_cache() {
  static FactorCache cache;
  return cache;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

// out = D2^T v without allocating; out.size() == v.size() + 2 >= 3.
void apply_second_diff_transpose(std::span<const double> v, std::span<double> out) {
  const std::size_t m = v.size();
  if (m == 1) {
    out[0] = v[0];
    out[1] = -2.0 * v[0];
    out[2] = v[0];
    return;
  }
  out[0] = v[0];
  out[1] = v[1] - 2.0 * v[0];
  for (std::size_t i = 2; i < m; ++i) out[i] = v[i] - 2.0 * v[i - 1] + v[i - 2];
  out[m] = -2.0 * v[m - 1] + v[m - 2];
  out[m + 1] = v[m - 1];
}

}  // namespace

std::shared_ptr<const BandedCholesky> tv2_system_factor(std::size_t length, double rho) {
  constexpr std::size_t kMaxEntries = 256;
  auto& cache = factor_cache();
  const auto key = std::make_pair(length, rho);
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    if (auto it = cache.entries.find(key); it != cache.entries.end()) return it->second;
  }
  auto factor = std::make_shared<const BandedCholesky>(length, 2, system_band(length, rho));
  std::lock_guard<std::mutex> lock(cache.mu);
  if (cache.entries.size() >= kMaxEntries) cache.entries.clear();
  return cache.entries.emplace(key, std::move(factor)).first->second;
}

namespace {

void check_problem(const Tv2Problem& problem) {
  if (problem.x.size() < 3) throw InvalidInput("solve_tv2: length must be >= 3");
  if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda)) {
    throw InvalidInput("solve_tv2: lambda must be finite and >= 0");
  }
  for (double v : problem.x) {
    if (!std::isfinite(v)) throw InvalidInput("solve_tv2: non-finite input");
  }
}

// D2 D2^T is the Toeplitz band (6, -4, 1); `extra` adds to its diagonal.
BandedCholesky factor_ddt(std::size_t m, std::span<const double> extra = {}) {
  std::vector<double> band(3 * m);
  for (std::size_t i = 0; i < m; ++i) {
    band[3 * i] = i >= 2 ? 1.0 : 0.0;
    band[3 * i + 1] = i >= 1 ? -4.0 : 0.0;
    band[3 * i + 2] = 6.0 + (extra.empty() ? 0.0 : extra[i]);
  }
  return BandedCholesky(m, 2, std::move(band));
}

void apply_second_diff(std::span<const double> u, std::span<double> out) {
  for (std::size_t t = 1; t + 1 < u.size(); ++t) out[t - 1] = u[t + 1] - 2.0 * u[t] + u[t - 1];
}

// Primal-dual interior point on the box-constrained dual (below), run to a
// loose duality gap to seed the projected Newton phase. Returns the last
// strictly feasible dual iterate.
std::vector<double> interior_point_warm_start(std::span<const double> dx, double mu, double gap_rel,
                                              int max_iter) {
  constexpr double kAlpha = 0.01;
  constexpr double kBeta = 0.5;
  constexpr double kGrowth = 2.0;
  constexpr int kMaxLineSearch = 40;

  const std::size_t m = dx.size();
  const std::size_t n = m + 2;
  const BandedCholesky ddt = factor_ddt(m);
  std::vector<double> nu(m, 0.0), mu1(m, 1.0), mu2(m, 1.0), f1(m, -mu), f2(m, -mu);
  std::vector<double> dt_nu(n, 0.0), ddt_nu(m, 0.0), w(m), tmp(m), dnu(m), dmu1(m), dmu2(m),
      extra(m);
  std::vector<double> nu0, mu10, mu20;

  auto dot = [](std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  };

  double t = -1.0;
  double step = 1.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double quad = dot(dt_nu, dt_nu);
    for (std::size_t i = 0; i < m; ++i) w[i] = dx[i] - (mu1[i] - mu2[i]);
    tmp = w;
    ddt.solve_in_place(tmp);
    double sum_mu = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum_mu += mu1[i] + mu2[i];
      l1 += std::abs(dx[i] - ddt_nu[i]);
    }
    const double pobj = std::min(0.5 * dot(w, tmp) + mu * sum_mu, 0.5 * quad + mu * l1);
    const double dobj = -0.5 * quad + dot(dx, nu);
    const double gap = pobj - dobj;
    if (!std::isfinite(gap) || gap <= gap_rel * std::max(1.0, std::abs(pobj))) break;

    if (step >= 0.2) t = std::max(2.0 * static_cast<double>(m) * kGrowth / gap, 1.2 * t);
    const double inv_t = 1.0 / t;
    double res_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double rz = ddt_nu[i] - w[i];
      const double c1 = -mu1[i] * f1[i] - inv_t;
      const double c2 = -mu2[i] * f2[i] - inv_t;
      res_sq += rz * rz + c1 * c1 + c2 * c2;
      dnu[i] = dx[i] - ddt_nu[i] + inv_t / f1[i] - inv_t / f2[i];
      extra[i] = -mu1[i] / f1[i] - mu2[i] / f2[i];
    }
    const double residual = std::sqrt(res_sq);
    factor_ddt(m, extra).solve_in_place(dnu);
    for (std::size_t i = 0; i < m; ++i) {
      dmu1[i] = -(mu1[i] + (inv_t + dnu[i] * mu1[i]) / f1[i]);
      dmu2[i] = -(mu2[i] + (inv_t - dnu[i] * mu2[i]) / f2[i]);
    }
    double ratio = 2.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (dmu1[i] < 0.0) ratio = std::min(ratio, -mu1[i] / dmu1[i]);
      if (dmu2[i] < 0.0) ratio = std::min(ratio, -mu2[i] / dmu2[i]);
    }
    step = std::min(1.0, 0.99 * ratio);

    nu0 = nu;
    mu10 = mu1;
    mu20 = mu2;
    bool accepted = false;
    for (int ls = 0; ls < kMaxLineSearch && !accepted; ++ls, step *= kBeta) {
      bool feasible = true;
      for (std::size_t i = 0; i < m; ++i) {
        nu[i] = nu0[i] + step * dnu[i];
        mu1[i] = mu10[i] + step * dmu1[i];
        mu2[i] = mu20[i] + step * dmu2[i];
        f1[i] = nu[i] - mu;
        f2[i] = -nu[i] - mu;
        if (!(f1[i] < 0.0 && f2[i] < 0.0)) feasible = false;
      }
      if (!feasible) continue;
      apply_second_diff_transpose(nu, dt_nu);
      apply_second_diff(dt_nu, ddt_nu);
      double new_sq = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double r = ddt_nu[i] - dx[i] + mu1[i] - mu2[i];
        const double c1 = -mu1[i] * f1[i] - inv_t;
        const double c2 = -mu2[i] * f2[i] - inv_t;
        new_sq += r * r + c1 * c1 + c2 * c2;
      }
      if (std::sqrt(new_sq) <= (1.0 - kAlpha * step) * residual) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      nu = std::move(nu0);
      break;
    }
  }
  return nu;
}

// Projected Newton (Bertsekas) on the box-constrained dual of
//   1/2 ||u - x||^2 + mu ||D2 u||_1,   mu = lambda / 2:
//   min_nu  1/2 ||D2^T nu||^2 - (D2 x)^T nu   s.t. |nu_i| <= mu,
// with u = x - D2^T nu. The Hessian D2 D2^T is pentadiagonal and so is every
// principal submatrix in the free-index ordering, so each Newton step is one
// banded factor-and-solve. Once the active set settles the step is exact.
Tv2Solution solve_dual_projected_newton(const Tv2Problem& problem, const Tv2Options& options) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktrack = 60;

  const auto& x = problem.x;
  const std::size_t n = x.size();
  const std::size_t m = n - 2;
  const double mu = 0.5 * problem.lambda;

  std::vector<double> dx(m), nu(m), grad(m), dir(m), trial(m), dt(n), hv(m);
  apply_second_diff(x, dx);

  auto project = [mu](double v) { return std::clamp(v, -mu, mu); };
  // f(nu) and its gradient D D^T nu - D x.
  auto evaluate = [&](std::span<const double> v, std::span<double> g) {
    apply_second_diff_transpose(v, dt);
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) f += 0.5 * dt[i] * dt[i];
    for (std::size_t i = 0; i < m; ++i) f -= dx[i] * v[i];
    if (!g.empty()) {
      apply_second_diff(dt, hv);
      for (std::size_t i = 0; i < m; ++i) g[i] = hv[i] - dx[i];
    }
    return f;
  };

  nu = interior_point_warm_start(dx, mu, options.warm_start_gap, options.warm_start_iter);
  for (auto& v : nu) v = project(v);

  double scale = 1.0;
  for (double v : dx) scale = std::max(scale, std::abs(v));
  const double tol = options.gap_rel * scale;

  Tv2Solution sol;
  double f = evaluate(nu, grad);
  double pg_norm = 0.0;
  std::vector<std::size_t> free_idx;
  free_idx.reserve(m);
  for (int iter = 1; iter <= options.max_newton_iter; ++iter) {
    pg_norm = 0.0;
    double pg_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = nu[i] - project(nu[i] - grad[i]);
      pg_norm = std::max(pg_norm, std::abs(r));
      pg_sq += r * r;
    }
    sol.iterations = iter - 1;
    if (!std::isfinite(f) || !std::isfinite(pg_norm)) {
      throw NumericalFailure("solve_tv2: non-finite dual iterate at iteration " + std::to_string(iter));
    }
    if (pg_norm <= tol) {
      sol.converged = true;
      break;
    }

    const double eps = std::min(1e-3 * mu, std::sqrt(pg_sq));
    free_idx.clear();
    std::fill(dir.begin(), dir.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const bool at_upper = nu[i] >= mu - eps && grad[i] < 0.0;
      const bool at_lower = nu[i] <= -mu + eps && grad[i] > 0.0;
      if (at_upper || at_lower) {
        dir[i] = -grad[i] / 6.0;
      } else {
        free_idx.push_back(i);
      }
    }
    if (!free_idx.empty()) {
      const std::size_t k = free_idx.size();
      std::vector<double> band(3 * k, 0.0);
      std::vector<double> rhs(k);
      for (std::size_t r = 0; r < k; ++r) {
        band[3 * r + 2] = 6.0;
        if (r >= 1) {
          const std::size_t gap1 = free_idx[r] - free_idx[r - 1];
          band[3 * r + 1] = gap1 == 1 ? -4.0 : (gap1 == 2 ? 1.0 : 0.0);
        }
        if (r >= 2 && free_idx[r] - free_idx[r - 2] == 2) band[3 * r] = 1.0;
        rhs[r] = -grad[free_idx[r]];
      }
      BandedCholesky(k, 2, std::move(band)).solve_in_place(rhs);
      for (std::size_t r = 0; r < k; ++r) dir[free_idx[r]] = rhs[r];
    }

    double alpha = 1.0;
    double f_trial = f;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktrack; ++bt) {
      double decrease = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        trial[i] = project(nu[i] + alpha * dir[i]);
        decrease += grad[i] * (trial[i] - nu[i]);
      }
      f_trial = evaluate(trial, {});
      if (f_trial <= f + kArmijo * decrease) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no further progress at working precision
    nu.swap(trial);
    f = evaluate(nu, grad);
  }

  apply_second_diff_transpose(nu, dt);
  sol.u.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.u[i] = x[i] - dt[i];
  sol.dual.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.dual[i] = 2.0 * nu[i];
  sol.primal_residual = pg_norm;
  sol.dual_residual = 0.0;
  sol.objective = tv2_objective(x, sol.u, problem.lambda);
  if (!std::isfinite(sol.objective)) throw NumericalFailure("solve_tv2: non-finite solution");
  return sol;
}

}  // namespace

Tv2Solution solve_tv2(const Tv2Problem& problem, const Tv2Options& options) {
  check_problem(problem);
  if (options.method == Tv2Method::kDualNewton && problem.lambda > 0.0) {
    if (options.max_newton_iter < 1) throw InvalidInput("solve_tv2: max_newton_iter must be >= 1");
    return solve_dual_projected_newton(problem, options);
  }
  const auto& x = problem.x;
  const std::size_t n = x.size();
  if (options.max_iter < 1) throw InvalidInput("solve_tv2: max_iter must be >= 1");

  const double lambda = problem.lambda;
  Tv2Solution sol;
  sol.rho = options.rho > 0.0 ? options.rho : std::max(lambda, 1.0);
  if (lambda == 0.0) {
    sol.u = x;
    sol.dual.assign(n - 2, 0.0);
    sol.objective = 0.0;
    sol.converged = true;
    return sol;
  }

  double rho = sol.rho;
  double kappa = lambda / rho;
  auto factor = tv2_system_factor(n, rho);
  const std::size_t m = n - 2;
  const double rho_min = 1e-4 * rho;
  const double rho_max = std::min(1e4 * rho, std::max(rho, 1e10));

  std::vector<double> u = x;
  std::vector<double> z = second_diff(x);
  std::vector<double> w(m, 0.0);
  std::vector<double> z_prev(m), diff(m), rhs(n), du(m), back(n);

  const double sqrt_m = std::sqrt(static_cast<double>(m));
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    for (std::size_t r = 0; r < m; ++r) diff[r] = z[r] - w[r];
    apply_second_diff_transpose(diff, back);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = 2.0 * x[i] + rho * back[i];
    factor->solve_in_place(rhs);
    u.swap(rhs);

    for (std::size_t t = 1; t + 1 < n; ++t) du[t - 1] = u[t + 1] - 2.0 * u[t] + u[t - 1];
    z_prev = z;
    double primal_sq = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double v = du[r] + w[r];
      z[r] = v > kappa ? v - kappa : (v < -kappa ? v + kappa : 0.0);
      const double res = du[r] - z[r];
      w[r] += res;
      primal_sq += res * res;
    }
    for (std::size_t r = 0; r < m; ++r) diff[r] = z[r] - z_prev[r];
    apply_second_diff_transpose(diff, back);
    const double dual_res = rho * norm2(back);
    const double primal_res = std::sqrt(primal_sq);
    if (!std::isfinite(primal_res) || !std::isfinite(dual_res)) {
      throw NumericalFailure("solve_tv2: non-finite iterate at iteration " + std::to_string(iter));
    }

    double fit_grad_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) fit_grad_sq += 4.0 * (u[i] - x[i]) * (u[i] - x[i]);
    // A split gap r inflates the objective by about lambda * ||r||_1, so the
    // primal tolerance shrinks with lambda.
    const double eps_pri =
        (options.eps_abs * sqrt_m + options.eps_rel * std::max(norm2(du), norm2(z))) / std::max(1.0, lambda);
    const double eps_dual = options.eps_abs * sqrt_n + options.eps_rel * std::sqrt(fit_grad_sq);

    sol.iterations = iter;
    sol.primal_residual = primal_res;
    sol.dual_residual = dual_res;
    if (primal_res <= eps_pri && dual_res <= eps_dual) {
      sol.converged = true;
      break;
    }

    // Residual balancing, compared against each residual's tolerance.
    // Adaptation stops halfway through the budget so the tail runs at fixed rho.
    if (options.adapt_rho && iter % 10 == 0 && iter < options.max_iter / 2) {
      const double p = primal_res / eps_pri;
      const double d = dual_res / eps_dual;
      double scale = 1.0;
      if (p > 10.0 * d) scale = 2.0;
      if (d > 10.0 * p) scale = 0.5;
      // Bounded so the banded system stays well conditioned.
      if (rho * scale > rho_max || rho * scale < rho_min) scale = 1.0;
      if (scale != 1.0) {
        rho *= scale;
        kappa = lambda / rho;
        for (double& v : w) v /= scale;
        factor = tv2_system_factor(n, rho);
      }
    }
  }
  sol.rho = rho;

  sol.dual.resize(m);
  for (std::size_t r = 0; r < m; ++r) sol.dual[r] = rho * w[r];
  sol.objective = tv2_objective(x, u, lambda);
  sol.u = std::move(u);
  return sol;
}

}  // namespace tsr
