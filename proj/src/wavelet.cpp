#include "hypercs/wavelet.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "hypercs/kernels.hpp"

namespace hypercs::wavelet {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t log2_exact(std::size_t n) {
  if (!is_pow2(n)) throw std::invalid_argument("log2_exact: not a power of two");
  std::size_t m = 0;
  while ((std::size_t(1) << m) < n) ++m;
  return m;
}

HaarSpec make_haar(std::size_t n) { return make_haar(n, log2_exact(n)); }

HaarSpec make_haar(std::size_t n, std::size_t levels) {
  if (!is_pow2(n)) throw std::invalid_argument("make_haar: n must be a power of two");
  if (levels > log2_exact(n)) throw std::invalid_argument("make_haar: too many levels");
  return HaarSpec{n, levels};
}

void forward(const HaarSpec& spec, const double* x, double* u) {
  std::copy(x, x + spec.n, u);
  if (spec.levels == 0) return;
  std::vector<double> scratch(spec.n);
  std::size_t len = spec.n;
  for (std::size_t level = 0; level < spec.levels; ++level, len /= 2) {
    kernels::haar_pass_fwd(u, scratch.data(), len);
    std::copy(scratch.begin(), scratch.begin() + std::ptrdiff_t(len), u);
  }
}

void inverse(const HaarSpec& spec, const double* u, double* x) {
  std::copy(u, u + spec.n, x);
  if (spec.levels == 0) return;
  std::vector<double> scratch(spec.n);
  std::size_t len = spec.n >> (spec.levels - 1);
  for (std::size_t level = 0; level < spec.levels; ++level, len *= 2) {
    kernels::haar_pass_inv(x, scratch.data(), len);
    std::copy(scratch.begin(), scratch.begin() + std::ptrdiff_t(len), x);
  }
}

}  // namespace hypercs::wavelet
