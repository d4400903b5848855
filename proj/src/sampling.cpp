#include "hypercs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "binio.hpp"
#include "hypercs/errors.hpp"
#include "hypercs/kernels.hpp"
#include "hypercs/wavelet.hpp"

namespace fs = std::filesystem;

namespace hypercs::sampling {

std::string ordering_name(RowOrdering o) {
  return o == RowOrdering::max_variance ? "max_variance" : "sequency";
}

RowOrdering ordering_from_name(const std::string& name) {
  if (name == "max_variance") return RowOrdering::max_variance;
  if (name == "sequency") return RowOrdering::sequency;
  throw InputError("unknown row ordering: " + name);
}

std::size_t rows_for_compression(std::size_t n, double compression) {
  if (!(compression >= 0.0) || compression >= 1.0)
    throw InputError("compression must lie in [0, 1)");
  return std::size_t(std::llround((1.0 - compression) * double(n)));
}

std::uint32_t sequency_to_natural(std::uint32_t s, std::size_t bits) {
  std::uint32_t g = s ^ (s >> 1);  // Gray code
  std::uint32_t r = 0;
  for (std::size_t i = 0; i < bits; ++i)
    if (g & (1u << i)) r |= 1u << (bits - 1 - i);
  return r;
}

void SamplingPlan::validate() const {
  if (!wavelet::is_pow2(n)) throw InputError("plan: n must be a power of two");
  if (k == 0 || k > n) throw InputError("plan: k out of range");
  if (k != rows_for_compression(n, compression))
    throw InputError("plan: k does not match compression");
  if (row_order.size() != k) throw InputError("plan: row_order length != k");
  std::unordered_set<std::uint32_t> seen;
  for (auto r : row_order) {
    if (r >= n) throw InputError("plan: row index out of range");
    if (!seen.insert(r).second) throw InputError("plan: duplicate row index");
  }
  if (shifted && row_order[0] != 0)
    throw InputError("plan: shifted sampling needs the all-ones row first");
}

SamplingPlan build_plan_sequency(std::size_t n, double compression, bool shifted,
                                 std::uint64_t seed) {
  SamplingPlan plan;
  plan.n = n;
  plan.compression = compression;
  plan.k = rows_for_compression(n, compression);
  plan.shifted = shifted;
  plan.ordering = RowOrdering::sequency;
  plan.seed = seed;
  const std::size_t bits = wavelet::log2_exact(n);
  plan.row_order.resize(plan.k);
  for (std::size_t s = 0; s < plan.k; ++s)
    plan.row_order[s] = sequency_to_natural(std::uint32_t(s), bits);
  plan.validate();
  return plan;
}

SamplingPlan build_plan_max_variance(std::size_t n, double compression, bool shifted,
                                     const std::vector<cube::HyperCube>& training,
                                     std::uint64_t seed) {
  if (training.empty()) throw InputError("max-variance plan needs training frames");
  for (const auto& f : training)
    if (f.pixels() != n) throw InputError("training frame pixel count != n");

  // One Walsh transform per (frame, band) yields that sample's measurement
  // under every candidate row at once.
  std::vector<double> sum(n, 0.0), sumsq(n, 0.0), work(n);
  std::size_t samples = 0;
  for (const auto& f : training) {
    for (std::size_t band = 0; band < f.b; ++band) {
      std::copy(f.band_ptr(band), f.band_ptr(band) + n, work.begin());
      kernels::wht(work.data(), n);
      for (std::size_t r = 0; r < n; ++r) {
        sum[r] += work[r];
        sumsq[r] += work[r] * work[r];
      }
      ++samples;
    }
  }
  std::vector<double> variance(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double mean = sum[r] / double(samples);
    variance[r] = std::max(0.0, sumsq[r] / double(samples) - mean * mean);
  }

  std::vector<std::uint32_t> ranked(n);
  for (std::size_t r = 0; r < n; ++r) ranked[r] = std::uint32_t(r);
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (variance[a] != variance[b]) return variance[a] > variance[b];
    return a < b;
  });

  SamplingPlan plan;
  plan.n = n;
  plan.compression = compression;
  plan.k = rows_for_compression(n, compression);
  plan.shifted = shifted;
  plan.ordering = RowOrdering::max_variance;
  plan.seed = seed;
  plan.row_order.reserve(plan.k);
  plan.row_order.push_back(0);
  for (auto r : ranked) {
    if (plan.row_order.size() == plan.k) break;
    if (r != 0) plan.row_order.push_back(r);
  }
  plan.validate();
  return plan;
}

Measurements sample_cube(const SamplingPlan& plan, const cube::HyperCube& c) {
  plan.validate();
  if (c.pixels() != plan.n) throw InputError("sample_cube: cube pixel count != plan n");
  Measurements m(plan.k, c.b);
  std::vector<double> work(plan.n);
  for (std::size_t band = 0; band < c.b; ++band) {
    std::copy(c.band_ptr(band), c.band_ptr(band) + plan.n, work.begin());
    kernels::wht(work.data(), plan.n);
    const double y_ones = work[0];
    for (std::size_t i = 0; i < plan.k; ++i) {
      const double y_pm = work[plan.row_order[i]];
      m.at(i, band) = plan.shifted ? 0.5 * (y_ones + y_pm) : y_pm;
    }
  }
  return m;
}

Measurements to_pm_domain(const SamplingPlan& plan, const Measurements& m) {
  if (m.k != plan.k) throw InputError("to_pm_domain: measurement rows != plan k");
  if (!plan.shifted) return m;
  Measurements out(m.k, m.b);
  for (std::size_t band = 0; band < m.b; ++band) {
    const double y_ones = m.at(0, band);
    for (std::size_t i = 0; i < m.k; ++i) out.at(i, band) = 2.0 * m.at(i, band) - y_ones;
  }
  return out;
}

WalshOp::WalshOp(const SamplingPlan& plan) : n_(plan.n), rows_(plan.row_order), scratch_(plan.n) {
  plan.validate();
}

void WalshOp::apply(const double* x, double* y) {
  std::copy(x, x + n_, scratch_.begin());
  kernels::wht(scratch_.data(), n_);
  for (std::size_t i = 0; i < rows_.size(); ++i) y[i] = scratch_[rows_[i]];
}

void WalshOp::apply_adjoint(const double* y, double* x) {
  std::fill(scratch_.begin(), scratch_.end(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) scratch_[rows_[i]] += y[i];
  kernels::wht(scratch_.data(), n_);
  std::copy(scratch_.begin(), scratch_.end(), x);
}

void save_measurements(const Measurements& m, const fs::path& path) {
  if (m.k == 0 || m.b == 0) throw InputError("save_measurements: empty set");
  auto os = binio::open_out(path);
  os.write("HSM1", 4);
  binio::put_u32(os, std::uint32_t(m.k));
  binio::put_u32(os, std::uint32_t(m.b));
  binio::put_f64_array(os, m.data.data(), m.data.size());
  if (!os) throw InputError("save_measurements: write failed for " + path.string());
}

Measurements load_measurements(const fs::path& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, "HSM1", path.string());
  Measurements m;
  m.k = binio::get_u32(is, path.string() + " k");
  m.b = binio::get_u32(is, path.string() + " b");
  if (m.k == 0 || m.b == 0) throw InputError(path.string() + ": zero dimension in header");
  m.data.resize(m.k * m.b);
  binio::get_f64_array(is, m.data.data(), m.data.size(), path.string() + " payload");
  char extra;
  if (is.read(&extra, 1)) throw InputError(path.string() + ": trailing bytes after payload");
  return m;
}

void save_plan(const SamplingPlan& plan, const fs::path& path) {
  plan.validate();
  nlohmann::json j;
  j["n"] = plan.n;
  j["k"] = plan.k;
  j["compression"] = plan.compression;
  j["shifted"] = plan.shifted;
  j["ordering"] = ordering_name(plan.ordering);
  j["row_order"] = plan.row_order;
  j["seed"] = plan.seed;
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os << j.dump(2) << "\n";
}

SamplingPlan load_plan(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open for reading: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  SamplingPlan plan;
  try {
    plan.n = j.at("n").get<std::size_t>();
    plan.k = j.at("k").get<std::size_t>();
    plan.compression = j.at("compression").get<double>();
    plan.shifted = j.at("shifted").get<bool>();
    plan.ordering = ordering_from_name(j.at("ordering").get<std::string>());
    plan.row_order = j.at("row_order").get<std::vector<std::uint32_t>>();
    plan.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  plan.validate();
  return plan;
}

}  // namespace hypercs::sampling
