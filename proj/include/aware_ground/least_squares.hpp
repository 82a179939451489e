#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "aware_ground/error.hpp"

namespace aware_ground {

/// Ordinary least squares for a small, fixed number of unknowns by Householder
/// QR on the full design matrix (the normal equations are never formed).
/// Throws IllConditioned when a column is numerically dependent on the others.
template <std::size_t Cols>
std::array<double, Cols> solve_least_squares(std::span<const std::array<double, Cols>> rows,
                                             std::span<const double> rhs) {
  const std::size_t n = rows.size();
  if (n < Cols || rhs.size() != n) {
    throw Error(Errc::kInsufficientSamples, "least squares needs at least as many rows as unknowns");
  }
  // Column-major copy; the last column is the right-hand side.
  std::vector<double> a((Cols + 1) * n);
  const auto at = [&](std::size_t r, std::size_t c) -> double& { return a[c * n + r]; };
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < Cols; ++c) at(r, c) = rows[r][c];
    at(r, Cols) = rhs[r];
  }

  std::array<double, Cols> col_scale{};
  for (std::size_t c = 0; c < Cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += at(r, c) * at(r, c);
    col_scale[c] = std::sqrt(s);
  }

  for (std::size_t k = 0; k < Cols; ++k) {
    double norm2 = 0.0;
    for (std::size_t r = k; r < n; ++r) norm2 += at(r, k) * at(r, k);
    const double alpha = at(k, k) > 0.0 ? -std::sqrt(norm2) : std::sqrt(norm2);
    if (!(std::abs(alpha) > 1e-12 * col_scale[k])) {
      throw Error(Errc::kIllConditioned, "design matrix is rank deficient");
    }
    // v = x - alpha e1, stored in place; H = I - 2 v v^T / (v^T v).
    at(k, k) -= alpha;
    double vtv = 0.0;
    for (std::size_t r = k; r < n; ++r) vtv += at(r, k) * at(r, k);
    for (std::size_t c = k + 1; c <= Cols; ++c) {
      double proj = 0.0;
      for (std::size_t r = k; r < n; ++r) proj += at(r, k) * at(r, c);
      const double f = 2.0 * proj / vtv;
      for (std::size_t r = k; r < n; ++r) at(r, c) -= f * at(r, k);
    }
    at(k, k) = alpha;
  }

  std::array<double, Cols> x{};
  for (std::size_t i = Cols; i-- > 0;) {
    double s = at(i, Cols);
    for (std::size_t c = i + 1; c < Cols; ++c) s -= at(i, c) * x[c];
    x[i] = s / at(i, i);
  }
  return x;
}

}  // namespace aware_ground
