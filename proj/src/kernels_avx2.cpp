// AVX2 variants of the inner-loop kernels. This translation unit is the
// only one compiled with -mavx2; it is reached solely through the runtime
// dispatch in kernels.cpp. Elementwise kernels use the same operation
// order as the scalar reference so results match bit for bit; only dot
// reassociates (4 partial accumulators).

#include "hypercs/kernels.hpp"

#if defined(HYPERCS_WITH_AVX2)

#include <immintrin.h>

#include <cmath>

namespace hypercs::kernels::avx2 {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}
}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void shrink(const double* v, double gamma, double* out, std::size_t n) {
  const __m256d gv = _mm256_set1_pd(gamma);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d signmask = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(v + i);
    __m256d sign = _mm256_and_pd(x, signmask);
    __m256d mag = _mm256_max_pd(_mm256_sub_pd(_mm256_andnot_pd(signmask, x), gv), zero);
    // keep +0.0 (not -0.0) where the magnitude clamps, like the scalar path
    __m256d live = _mm256_cmp_pd(mag, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_or_pd(mag, _mm256_and_pd(sign, live)));
  }
  for (; i < n; ++i) {
    const double m = std::fabs(v[i]) - gamma;
    out[i] = m > 0.0 ? std::copysign(m, v[i]) : 0.0;
  }
}

void wht(double* v, std::size_t n) {
  for (std::size_t h = 1; h < n; h <<= 1) {
    if (h >= 4) {
      for (std::size_t base = 0; base < n; base += h << 1) {
        double* p = v + base;
        double* q = p + h;
        for (std::size_t j = 0; j < h; j += 4) {
          __m256d x = _mm256_loadu_pd(p + j);
          __m256d y = _mm256_loadu_pd(q + j);
          _mm256_storeu_pd(p + j, _mm256_add_pd(x, y));
          _mm256_storeu_pd(q + j, _mm256_sub_pd(x, y));
        }
      }
    } else {
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
}

void haar_pass_fwd(const double* in, double* out, std::size_t len) {
  const std::size_t half = len / 2;
  const __m256d c = _mm256_set1_pd(kInvSqrt2);
  std::size_t i = 0;
  // 4 input pairs per step: deinterleave, combine, reorder (0,2,1,3).
  for (; i + 4 <= half; i += 4) {
    __m256d v0 = _mm256_loadu_pd(in + 2 * i);
    __m256d v1 = _mm256_loadu_pd(in + 2 * i + 4);
    __m256d lo = _mm256_unpacklo_pd(v0, v1);  // a0 a2 a1 a3
    __m256d hi = _mm256_unpackhi_pd(v0, v1);  // b0 b2 b1 b3
    __m256d s = _mm256_mul_pd(_mm256_add_pd(lo, hi), c);
    __m256d d = _mm256_mul_pd(_mm256_sub_pd(lo, hi), c);
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(s, 0xD8));
    _mm256_storeu_pd(out + half + i, _mm256_permute4x64_pd(d, 0xD8));
  }
  for (; i < half; ++i) {
    const double a = in[2 * i];
    const double b = in[2 * i + 1];
    out[i] = (a + b) * kInvSqrt2;
    out[half + i] = (a - b) * kInvSqrt2;
  }
}

void haar_pass_inv(const double* in, double* out, std::size_t len) {
  const std::size_t half = len / 2;
  const __m256d c = _mm256_set1_pd(kInvSqrt2);
  std::size_t i = 0;
  for (; i + 4 <= half; i += 4) {
    __m256d s = _mm256_loadu_pd(in + i);
    __m256d d = _mm256_loadu_pd(in + half + i);
    __m256d p = _mm256_permute4x64_pd(_mm256_mul_pd(_mm256_add_pd(s, d), c), 0xD8);
    __m256d m = _mm256_permute4x64_pd(_mm256_mul_pd(_mm256_sub_pd(s, d), c), 0xD8);
    _mm256_storeu_pd(out + 2 * i, _mm256_unpacklo_pd(p, m));
    _mm256_storeu_pd(out + 2 * i + 4, _mm256_unpackhi_pd(p, m));
  }
  for (; i < half; ++i) {
    const double s = in[i];
    const double d = in[half + i];
    out[2 * i] = (s + d) * kInvSqrt2;
    out[2 * i + 1] = (s - d) * kInvSqrt2;
  }
}

}  // namespace hypercs::kernels::avx2

#endif  // HYPERCS_WITH_AVX2
