#pragma once

// Data-parallel inner-loop kernels shared by the transforms and solvers.
//
// Every kernel has a scalar reference implementation and, when the build
// supports it, an AVX2 variant. The active variant is resolved once from
// CPUID; setting HYPERCS_NO_SIMD=1 in the environment (or calling
// force_isa) pins the scalar path. tests/test_kernels.cpp checks the two
// paths against each other.

#include <cstddef>

namespace hypercs::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
void force_isa(Isa isa);

double dot(const double* a, const double* b, std::size_t n);
double norm2sq(const double* v, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// out[i] = sign(v[i]) * max(|v[i]| - gamma, 0)
void shrink(const double* v, double gamma, double* out, std::size_t n);

// In-place fast Walsh-Hadamard transform, natural (Sylvester) row order.
// n must be a power of two. Unnormalized: wht(wht(v)) == n * v.
void wht(double* v, std::size_t n);

// One orthonormal Haar analysis pass over len entries (len even):
//   out[i]         = (in[2i] + in[2i+1]) / sqrt(2)
//   out[len/2 + i] = (in[2i] - in[2i+1]) / sqrt(2)
void haar_pass_fwd(const double* in, double* out, std::size_t len);

// Inverse pass; in = [s | d] halves of length len/2 each:
//   out[2i]   = (s[i] + d[i]) / sqrt(2)
//   out[2i+1] = (s[i] - d[i]) / sqrt(2)
void haar_pass_inv(const double* in, double* out, std::size_t len);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void shrink(const double* v, double gamma, double* out, std::size_t n);
void wht(double* v, std::size_t n);
void haar_pass_fwd(const double* in, double* out, std::size_t len);
void haar_pass_inv(const double* in, double* out, std::size_t len);
}  // namespace scalar

#if defined(HYPERCS_WITH_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void shrink(const double* v, double gamma, double* out, std::size_t n);
void wht(double* v, std::size_t n);
void haar_pass_fwd(const double* in, double* out, std::size_t len);
void haar_pass_inv(const double* in, double* out, std::size_t len);
}  // namespace avx2
#endif

}  // namespace hypercs::kernels
