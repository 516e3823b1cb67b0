#pragma once

#include <memory>
#include <span>
#include <vector>

#include "tsr/banded_cholesky.hpp"

namespace tsr {

// (D2 u)_t = u[t+1] - 2 u[t] + u[t-1] over the interior; length L - 2.
std::vector<double> second_diff(std::span<const double> u);

// D2^T applied to a vector of length L - 2; result has length L.
std::vector<double> second_diff_transpose(std::span<const double> v);

// ||u - x||_2^2 + lambda * ||D2 u||_1 (no 1/2 factor on the data term).
double tv2_objective(std::span<const double> x, std::span<const double> u, double lambda);

struct Tv2Problem {
  std::vector<double> x;
  double lambda = 0.0;
};

enum class Tv2Method {
  kAdmm,           // split z = D2 u, banded u-update, soft-threshold z-update
  kDualNewton,  // projected Newton on the box-constrained dual, banded steps
};

struct Tv2Options {
  Tv2Method method = Tv2Method::kAdmm;
  // ADMM
  double rho = 0.0;  // initial penalty; <= 0 selects max(lambda, 1)
  double eps_abs = 1e-10;  // the primal test divides both by max(1, lambda)
  double eps_rel = 1e-9;
  int max_iter = 20000;
  bool adapt_rho = true;  // residual balancing by factors of 2
  // Dual Newton: interior-point warm start to a relative duality gap of
  // warm_start_gap, then projected Newton until the projected dual gradient
  // (equivalently |D2 u| on the free set) is <= gap_rel * max(1, ||D2 x||_inf).
  double warm_start_gap = 1e-6;
  int warm_start_iter = 100;
  double gap_rel = 1e-10;
  int max_newton_iter = 500;
};

struct Tv2Solution {
  std::vector<double> u;
  // Unscaled multiplier y for the split z = D2 u, so that 2(u - x) + D2^T y ~ 0
  // at convergence; y / lambda is a subgradient of ||.||_1 at z.
  std::vector<double> dual;
  double objective = 0.0;
  int iterations = 0;
  // ADMM: ||D2 u - z|| and rho ||D2^T (z - z_prev)||. Dual Newton: the
  // projected dual gradient (inf-norm) and 0, since u = x - D2^T nu is exactly stationary.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rho = 0.0;  // final penalty
  bool converged = false;
};

// Factor of (2 I + rho D2^T D2), shared across solves with the same (L, rho).
std::shared_ptr<const BandedCholesky> tv2_system_factor(std::size_t length, double rho);

// Minimizes ||u - x||^2 + lambda ||D2 u||_1 with the selected method. Returns
// converged = false at the iteration cap rather than throwing; throws
// NumericalFailure if the iterates go non-finite.
Tv2Solution solve_tv2(const Tv2Problem& problem, const Tv2Options& options = {});

}  // namespace tsr
