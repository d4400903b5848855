#include "hypercs/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "hypercs/errors.hpp"

namespace hypercs::threshold {

double percentile_cut(std::vector<double> values, double alpha) {
  if (values.empty()) throw InputError("percentile_cut: no values");
  if (!(alpha >= 0.0) || alpha > 100.0) throw InputError("percentile_cut: alpha outside [0,100]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::size_t idx = std::size_t(std::ceil(alpha * double(n) / 100.0));
  if (idx >= n) idx = n - 1;
  return values[idx];
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ThresholdResult compute_threshold(const std::vector<detection::Map>& background_maps,
                                  const ThresholdSpec& spec) {
  if (background_maps.empty()) throw InputError("compute_threshold: no background maps");
  if (!(spec.beta > 0.0)) throw InputError("compute_threshold: beta must be > 0");
  ThresholdResult r;
  r.alpha = spec.alpha;
  r.beta = spec.beta;
  r.per_cube.reserve(background_maps.size());
  for (const auto& m : background_maps) r.per_cube.push_back(percentile_cut(m.data, spec.alpha));
  r.threshold = spec.beta * median(r.per_cube);
  return r;
}

const std::array<double, 7>& sweep_multipliers() {
  static const std::array<double, 7> m = {0.85, 0.90, 0.95, 1.00, 1.05, 1.10, 1.15};
  return m;
}

std::vector<double> make_sweep(double t) {
  std::vector<double> out;
  out.reserve(7);
  for (double m : sweep_multipliers()) out.push_back(m * t);
  return out;
}

std::size_t count_over(const detection::Map& m, double t) {
  std::size_t c = 0;
  for (double v : m.data)
    if (v > t) ++c;
  return c;
}

void save_threshold(const ThresholdResult& r, const std::filesystem::path& path,
                    const std::string& method, const std::string& statistic) {
  nlohmann::json j;
  j["threshold"] = r.threshold;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["per_cube"] = r.per_cube;
  j["method"] = method;
  j["statistic"] = statistic;
  j["sweep_multipliers"] = sweep_multipliers();
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os << j.dump(2) << "\n";
}

ThresholdResult load_threshold(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open for reading: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  ThresholdResult r;
  try {
    r.threshold = j.at("threshold").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.beta = j.at("beta").get<double>();
    r.per_cube = j.at("per_cube").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return r;
}

}  // namespace hypercs::threshold
