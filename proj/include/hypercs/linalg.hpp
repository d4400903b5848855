#pragma once

#include <cmath>
#include <cstddef>

namespace hypercs::linalg {

// In-place lower Cholesky of a symmetric positive-definite matrix stored
// row-major; the strict upper triangle is left as-is. Returns false on a
// non-positive pivot (matrix not PD to working precision).
inline bool cholesky_lower(double* a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  return true;
}

// forward substitution: L y = b
inline void solve_lower(const double* L, std::size_t n, const double* b, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
    y[i] = s / L[i * n + i];
  }
}

// back substitution: L^T x = y
inline void solve_lower_transposed(const double* L, std::size_t n, const double* y, double* x) {
  for (std::size_t ip = n; ip-- > 0;) {
    double s = y[ip];
    for (std::size_t k = ip + 1; k < n; ++k) s -= L[k * n + ip] * x[k];
    x[ip] = s / L[ip * n + ip];
  }
}

}  // namespace hypercs::linalg
