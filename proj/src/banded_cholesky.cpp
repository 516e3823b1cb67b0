#include "tsr/banded_cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsr/error.hpp"

namespace tsr {

BandedCholesky::BandedCholesky(std::size_t n, std::size_t bandwidth, std::vector<double> lower_band)
    : n_(n), p_(bandwidth), band_(std::move(lower_band)) {
  if (band_.size() != n_ * (p_ + 1)) {
    throw InvalidInput("BandedCholesky: band storage has wrong size");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jlo = i > p_ ? i - p_ : 0;
    for (std::size_t j = jlo; j <= i; ++j) {
      double sum = at(i, j);
      const std::size_t klo = std::max(jlo, j > p_ ? j - p_ : 0);
      for (std::size_t k = klo; k < j; ++k) sum -= at(i, k) * at(j, k);
      if (j == i) {
        if (!(sum > 0.0)) {
          throw NumericalFailure("BandedCholesky: matrix not positive definite at row " +
                                 std::to_string(i));
        }
        at(i, i) = std::sqrt(sum);
      } else {
        at(i, j) = sum / at(j, j);
      }
    }
  }
  inv_diag_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) inv_diag_[i] = 1.0 / at(i, i);
}

void BandedCholesky::solve_in_place(std::span<double> b) const {
  if (b.size() != n_) throw InvalidInput("BandedCholesky: rhs size mismatch");
  if (p_ == 2) {
    // Pentadiagonal fast path; same arithmetic as the general loops below.
    const double* f = band_.data();
    const double* inv = inv_diag_.data();
    const std::size_t n = n_;
    b[0] *= inv[0];
    if (n > 1) b[1] = (b[1] - f[4] * b[0]) * inv[1];
    for (std::size_t i = 2; i < n; ++i) {
      const double* row = f + 3 * i;
      b[i] = (b[i] - row[0] * b[i - 2] - row[1] * b[i - 1]) * inv[i];
    }
    b[n - 1] *= inv[n - 1];
    if (n == 1) return;
    b[n - 2] = (b[n - 2] - f[3 * (n - 1) + 1] * b[n - 1]) * inv[n - 2];
    for (std::size_t ii = n - 2; ii-- > 0;) {
      b[ii] = (b[ii] - f[3 * (ii + 1) + 1] * b[ii + 1] - f[3 * (ii + 2)] * b[ii + 2]) * inv[ii];
    }
    return;
  }
  // L y = b
  for (std::size_t i = 0; i < n_; ++i) {
    double sum = b[i];
    const std::size_t jlo = i > p_ ? i - p_ : 0;
    for (std::size_t j = jlo; j < i; ++j) sum -= at(i, j) * b[j];
    b[i] = sum / at(i, i);
  }
  // L^T x = y
  for (std::size_t ii = n_; ii-- > 0;) {
    double sum = b[ii];
    const std::size_t jhi = std::min(n_ - 1, ii + p_);
    for (std::size_t j = ii + 1; j <= jhi; ++j) sum -= at(j, ii) * b[j];
    b[ii] = sum / at(ii, ii);
  }
}

double BandedCholesky::factor_at(std::size_t i, std::size_t j) const {
  if (j > i || i - j > p_ || i >= n_) return 0.0;
  return at(i, j);
}

}  // namespace tsr
