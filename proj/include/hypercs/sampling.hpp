#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hypercs/cube.hpp"

namespace hypercs::sampling {

enum class RowOrdering { max_variance, sequency };

std::string ordering_name(RowOrdering o);
RowOrdering ordering_from_name(const std::string& name);

// Which Walsh-Hadamard rows to measure, in measurement order. Row indices
// are in natural (Sylvester) order; index 0 is the all-ones row and always
// comes first so shifted measurements can be corrected.
struct SamplingPlan {
  std::size_t n = 0;  // pixels per band, power of two
  std::size_t k = 0;  // measurements per band
  double compression = 0.0;
  bool shifted = true;
  RowOrdering ordering = RowOrdering::sequency;
  std::vector<std::uint32_t> row_order;
  std::uint64_t seed = 0;

  void validate() const;  // throws InputError on any inconsistency
};

// k = round((1 - compression) * n)
std::size_t rows_for_compression(std::size_t n, double compression);

// natural-order index of the row with the given sequency (sign-change count)
std::uint32_t sequency_to_natural(std::uint32_t s, std::size_t bits);

SamplingPlan build_plan_sequency(std::size_t n, double compression, bool shifted,
                                 std::uint64_t seed);

// Ranks rows by the variance of their measurement across every
// (frame, band) sample of the training sequence, descending, ties broken by
// ascending natural index; the all-ones row is moved to the front.
SamplingPlan build_plan_max_variance(std::size_t n, double compression, bool shifted,
                                     const std::vector<cube::HyperCube>& training,
                                     std::uint64_t seed);

// Per-band measurements, row-major k x b (bands are columns).
struct Measurements {
  std::size_t k = 0;
  std::size_t b = 0;
  std::vector<double> data;

  Measurements() = default;
  Measurements(std::size_t rows, std::size_t bands)
      : k(rows), b(bands), data(rows * bands, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * b + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * b + j]; }
};

// Applies the plan to every band of the cube. With plan.shifted the stored
// values are the physical {0,1}-mask measurements y01 = (y_ones + y_pm) / 2;
// otherwise they are the raw +/-1 row products.
Measurements sample_cube(const SamplingPlan& plan, const cube::HyperCube& c);

// Undo the shifted-mask encoding: y_pm[i] = 2*y01[i] - y01[0] per band.
// Identity when the plan is not shifted.
Measurements to_pm_domain(const SamplingPlan& plan, const Measurements& m);

// Fast S / S^T products against flattened bands. Holds scratch, so give
// each thread its own instance.
class WalshOp {
 public:
  explicit WalshOp(const SamplingPlan& plan);

  std::size_t n() const { return n_; }
  std::size_t k() const { return rows_.size(); }

  void apply(const double* x, double* y);          // y = S x   (k from n)
  void apply_adjoint(const double* y, double* x);  // x = S^T y (n from k)

 private:
  std::size_t n_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> scratch_;
};

// "HSM1" | u32 k | u32 b | k*b f64, row-major, little-endian
void save_measurements(const Measurements& m, const std::filesystem::path& path);
Measurements load_measurements(const std::filesystem::path& path);

void save_plan(const SamplingPlan& plan, const std::filesystem::path& path);
SamplingPlan load_plan(const std::filesystem::path& path);

}  // namespace hypercs::sampling
