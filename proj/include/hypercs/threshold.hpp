#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hypercs/detection.hpp"

namespace hypercs::threshold {

// Order-statistic cut: sort ascending and take index ceil(alpha*N/100),
// zero-based, clamped to N-1. alpha in [0,100].
double percentile_cut(std::vector<double> values, double alpha);

double median(std::vector<double> values);  // even count: mean of the two central values

struct ThresholdSpec {
  double alpha = 99.0;
  double beta = 1.0;
};

struct ThresholdResult {
  double threshold = 0.0;        // beta * median(per_cube)
  std::vector<double> per_cube;  // alpha-percentile of each background map
  double alpha = 0.0;
  double beta = 0.0;
};

// One statistic map per background cube; the threshold is beta times the
// median of their per-map percentiles.
ThresholdResult compute_threshold(const std::vector<detection::Map>& background_maps,
                                  const ThresholdSpec& spec);

// the fixed sweep grid applied around an operating threshold
const std::array<double, 7>& sweep_multipliers();
std::vector<double> make_sweep(double t);

// pixels strictly above the threshold
std::size_t count_over(const detection::Map& m, double t);

void save_threshold(const ThresholdResult& r, const std::filesystem::path& path,
                    const std::string& method, const std::string& statistic);
ThresholdResult load_threshold(const std::filesystem::path& path);

}  // namespace hypercs::threshold
