#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tsr {

// Cholesky factorization A = L L^T of a symmetric positive-definite band
// matrix with `bandwidth` sub-diagonals. Storage is the lower band, row-major:
// entry (i, i - k) lives at band[i * (bandwidth + 1) + (bandwidth - k)].
class BandedCholesky {
 public:
  // `lower_band` holds A in the layout above. Throws NumericalFailure if A is
  // not numerically positive definite.
  BandedCholesky(std::size_t n, std::size_t bandwidth, std::vector<double> lower_band);

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return p_; }

  // Solves A x = b in place.
  void solve_in_place(std::span<double> b) const;

  // (i, j) of the factor L, zero outside the band.
  double factor_at(std::size_t i, std::size_t j) const;

 private:
  double& at(std::size_t i, std::size_t j) { return band_[i * (p_ + 1) + (p_ - (i - j))]; }
  double at(std::size_t i, std::size_t j) const { return band_[i * (p_ + 1) + (p_ - (i - j))]; }

  std::size_t n_;
  std::size_t p_;
  std::vector<double> band_;
  std::vector<double> inv_diag_;
};

}  // namespace tsr
