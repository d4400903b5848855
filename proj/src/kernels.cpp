#include "hypercs/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>

namespace hypercs::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void shrink(const double* v, double gamma, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::fabs(v[i]) - gamma;
    out[i] = m > 0.0 ? std::copysign(m, v[i]) : 0.0;
  }
}

void wht(double* v, std::size_t n) {
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t base = 0; base < n; base += h << 1) {
      double* p = v + base;
      double* q = p + h;
      for (std::size_t j = 0; j < h; ++j) {
        const double x = p[j];
        const double y = q[j];
        p[j] = x + y;
        q[j] = x - y;
      }
    }
  }
}

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

void haar_pass_fwd(const double* in, double* out, std::size_t len) {
  const std::size_t half = len / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = in[2 * i];
    const double b = in[2 * i + 1];
    out[i] = (a + b) * kInvSqrt2;
    out[half + i] = (a - b) * kInvSqrt2;
  }
}

void haar_pass_inv(const double* in, double* out, std::size_t len) {
  const std::size_t half = len / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double s = in[i];
    const double d = in[half + i];
    out[2 * i] = (s + d) * kInvSqrt2;
    out[2 * i + 1] = (s - d) * kInvSqrt2;
  }
}

}  // namespace scalar

namespace {

Isa detect_isa() {
  if (const char* env = std::getenv("HYPERCS_NO_SIMD"); env && env[0] && env[0] != '0')
    return Isa::scalar;
#if defined(HYPERCS_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<Isa> g_isa{detect_isa()};

}  // namespace

Isa active_isa() { return g_isa.load(std::memory_order_relaxed); }

void force_isa(Isa isa) { g_isa.store(isa, std::memory_order_relaxed); }

#if defined(HYPERCS_WITH_AVX2)
#define HYPERCS_DISPATCH(fn, ...) \
  (active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define HYPERCS_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) {
  return HYPERCS_DISPATCH(dot, a, b, n);
}

double norm2sq(const double* v, std::size_t n) { return dot(v, v, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  HYPERCS_DISPATCH(axpy, a, x, y, n);
}

void shrink(const double* v, double gamma, double* out, std::size_t n) {
  HYPERCS_DISPATCH(shrink, v, gamma, out, n);
}

void wht(double* v, std::size_t n) { HYPERCS_DISPATCH(wht, v, n); }

void haar_pass_fwd(const double* in, double* out, std::size_t len) {
  HYPERCS_DISPATCH(haar_pass_fwd, in, out, len);
}

void haar_pass_inv(const double* in, double* out, std::size_t len) {
  HYPERCS_DISPATCH(haar_pass_inv, in, out, len);
}

#undef HYPERCS_DISPATCH

}  // namespace hypercs::kernels
