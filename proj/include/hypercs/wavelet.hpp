#pragma once

#include <cstddef>

namespace hypercs::wavelet {

// Multilevel orthonormal Haar transform on signals of power-of-two length.
// The inverse is the transpose, so inverse(forward(x)) == x and the
// transform preserves the 2-norm at every depth.
struct HaarSpec {
  std::size_t n = 0;
  std::size_t levels = 0;
};

// full decomposition depth: levels = log2(n)
HaarSpec make_haar(std::size_t n);
HaarSpec make_haar(std::size_t n, std::size_t levels);

void forward(const HaarSpec& spec, const double* x, double* u);
void inverse(const HaarSpec& spec, const double* u, double* x);

bool is_pow2(std::size_t n);
std::size_t log2_exact(std::size_t n);

}  // namespace hypercs::wavelet
