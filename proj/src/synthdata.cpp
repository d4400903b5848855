#include "hypercs/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "hypercs/errors.hpp"
#include "scene_json.hpp"

namespace fs = std::filesystem;

namespace hypercs::synthdata {

namespace {
constexpr double kReleaseStrength = 12.0;
constexpr double kReturnFraction = 0.25;
}  // namespace

void SceneSpec::validate() const {
  if (n1 == 0 || n2 == 0 || b == 0 || frames == 0) throw InputError("scene: empty dimensions");
  if (signature.size() != b) throw InputError("scene: signature length != band count");
  if (!(plume_sigma > 0.0)) throw InputError("scene: plume_sigma must be > 0");
  if (!(noise_scale >= 0.0)) throw InputError("scene: noise_scale must be >= 0");
  if (!(spectral_ripple >= 0.0)) throw InputError("scene: spectral_ripple must be >= 0");
  if (2 * smooth_radius + 1 > n1 || 2 * smooth_radius + 1 > n2)
    throw InputError("scene: smoothing window exceeds the image");
  for (const auto& p : phases) {
    if (p.last < p.first || p.last >= frames) throw InputError("scene: bad phase frame range");
    if (!(p.strength >= 0.0)) throw InputError("scene: phase strength must be >= 0");
  }
  for (std::size_t i = 0; i < phases.size(); ++i)
    for (std::size_t j = i + 1; j < phases.size(); ++j)
      if (phases[i].first <= phases[j].last && phases[j].first <= phases[i].last)
        throw InputError("scene: overlapping plume phases");
}

std::vector<std::string> preset_names() { return {"release", "dissipated_return"}; }

SceneSpec preset_scenario(const std::string& name) {
  SceneSpec s;
  s.name = name;
  s.signature = preset_signature(s.b);
  // presets use one flat spectral mode: gray-body brightness fluctuations,
  // the regime where per-band compressed sampling behaves uniformly
  s.spectral_corr_length = double(s.b);
  if (name == "release") {
    s.seed = 1;
    s.phases = {{30, 60, kReleaseStrength}};
  } else if (name == "dissipated_return") {
    s.seed = 2;
    s.phases = {{30, 60, kReleaseStrength}, {70, 110, kReturnFraction * kReleaseStrength}};
  } else {
    throw InputError("unknown scenario preset: " + name);
  }
  s.validate();
  return s;
}

std::vector<double> mean_spectrum(std::size_t b) {
  // flat gray-body baseline: a constant image is measured only by the
  // all-ones row, so the baseline never couples into the other rows
  return std::vector<double>(b, 10.0);
}

std::vector<double> preset_signature(std::size_t b) {
  std::vector<double> sig(b);
  const double c1 = 0.3 * double(b - 1), w1 = 0.08 * double(b);
  const double c2 = 0.7 * double(b - 1), w2 = 0.05 * double(b);
  double norm = 0.0;
  for (std::size_t k = 0; k < b; ++k) {
    const double d1 = (double(k) - c1) / w1;
    const double d2 = (double(k) - c2) / w2;
    sig[k] = std::exp(-0.5 * d1 * d1) + 0.6 * std::exp(-0.5 * d2 * d2);
    norm += sig[k] * sig[k];
  }
  norm = std::sqrt(norm);
  for (auto& v : sig) v /= norm;
  return sig;
}

double plume_strength(const SceneSpec& s, std::size_t frame) {
  for (const auto& p : s.phases)
    if (frame >= p.first && frame <= p.last) return p.strength;
  return 0.0;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel,
                       std::uint64_t band, std::uint64_t lane) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ frame);
  h = mix64(h ^ pixel);
  h = mix64(h ^ band);
  h = mix64(h ^ lane);
  return double(h >> 11) * 0x1.0p-53;
}

double counter_normal(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel,
                      std::uint64_t band) {
  double s = 0.0;
  for (std::uint64_t lane = 0; lane < 12; ++lane)
    s += counter_uniform(seed, frame, pixel, band, lane);
  return s - 6.0;
}

namespace {

// periodic box blur along rows then columns; dividing each pass by
// sqrt(window) keeps an iid unit-variance input at exactly unit variance
void smooth_band(double* img, std::size_t n1, std::size_t n2, std::size_t r) {
  if (r == 0) return;
  const double scale = 1.0 / std::sqrt(double(2 * r + 1));
  std::vector<double> tmp(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d <= 2 * r; ++d) {
        const std::size_t jj = (j + n2 + d - r) % n2;
        s += img[i * n2 + jj];
      }
      tmp[i * n2 + j] = s * scale;
    }
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t i = 0; i < n1; ++i) {
      double s = 0.0;
      for (std::size_t d = 0; d <= 2 * r; ++d) {
        const std::size_t ii = (i + n1 + d - r) % n1;
        s += tmp[ii * n2 + j];
      }
      img[i * n2 + j] = s * scale;
    }
}

// Smooth Gaussian bumps across the band axis, one row per mode, rescaled so
// every band sums its squared weights to 1 (the mixed field keeps unit
// per-band variance). Roughly b/len modes: long correlation lengths give few
// modes, i.e. the near-singular spectral covariance real multispectral
// backgrounds exhibit, which is what keeps background ACE cold.
std::vector<double> spectral_basis(std::size_t b, double len, std::size_t& r_out) {
  const std::size_t r =
      std::clamp<std::size_t>(std::size_t(std::lround(double(b) / len)), 1, b);
  r_out = r;
  // a single mode normalizes to the flat vector; make that exact
  if (r == 1) return std::vector<double>(b, 1.0);
  std::vector<double> basis(r * b);
  const double spacing = double(b - 1) / double(r);
  const double sigma = std::max(0.85 * spacing, 0.5);
  for (std::size_t j = 0; j < r; ++j) {
    const double center = (double(j) + 0.5) * spacing;
    for (std::size_t band = 0; band < b; ++band) {
      const double d = (double(band) - center) / sigma;
      basis[j * b + band] = std::exp(-0.5 * d * d);
    }
  }
  for (std::size_t band = 0; band < b; ++band) {
    double norm = 0.0;
    for (std::size_t j = 0; j < r; ++j) norm += basis[j * b + band] * basis[j * b + band];
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < r; ++j) basis[j * b + band] /= norm;
  }
  return basis;
}

}  // namespace

cube::HyperCube gen_background_frame(const SceneSpec& s, std::size_t frame) {
  s.validate();
  if (frame >= s.frames) throw InputError("gen: frame index past the end of the scene");
  const std::size_t n = s.n1 * s.n2;
  cube::HyperCube c(s.n1, s.n2, s.b);

  std::size_t modes = 0;
  if (s.spectral_corr_length > 0.0 && s.b > 1) {
    const auto basis = spectral_basis(s.b, s.spectral_corr_length, modes);
    std::vector<std::vector<double>> fields(modes, std::vector<double>(n));
    for (std::size_t j = 0; j < modes; ++j) {
      for (std::size_t p = 0; p < n; ++p) fields[j][p] = counter_normal(s.seed, frame, p, j);
      smooth_band(fields[j].data(), s.n1, s.n2, s.smooth_radius);
    }
    for (std::size_t band = 0; band < s.b; ++band) {
      double* img = c.band_ptr(band);
      for (std::size_t p = 0; p < n; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < modes; ++j) acc += basis[j * s.b + band] * fields[j][p];
        img[p] = acc;
      }
    }
  } else {
    modes = s.b;
    for (std::size_t band = 0; band < s.b; ++band) {
      double* img = c.band_ptr(band);
      for (std::size_t p = 0; p < n; ++p) img[p] = counter_normal(s.seed, frame, p, band);
      smooth_band(img, s.n1, s.n2, s.smooth_radius);
    }
  }

  if (s.spectral_ripple > 0.0) {
    // one more smooth field on the stream slot past the mixing modes,
    // weighted across bands by a fixed gaussian bump
    std::vector<double> extra(n);
    for (std::size_t p = 0; p < n; ++p) extra[p] = counter_normal(s.seed, frame, p, modes);
    smooth_band(extra.data(), s.n1, s.n2, s.smooth_radius);
    const double c0 = 0.35 * double(s.b - 1), w = 0.18 * double(s.b);
    for (std::size_t band = 0; band < s.b; ++band) {
      const double d = (double(band) - c0) / w;
      const double amp = s.spectral_ripple * std::exp(-0.5 * d * d);
      double* img = c.band_ptr(band);
      for (std::size_t p = 0; p < n; ++p) img[p] += amp * extra[p];
    }
  }

  const auto mu = mean_spectrum(s.b);
  for (std::size_t band = 0; band < s.b; ++band) {
    double* img = c.band_ptr(band);
    for (std::size_t p = 0; p < n; ++p) img[p] = mu[band] + s.noise_scale * img[p];
  }
  return c;
}

void inject_plume(cube::HyperCube& c, const SceneSpec& s, double strength) {
  if (strength == 0.0) return;
  if (c.n1 != s.n1 || c.n2 != s.n2 || c.b != s.b)
    throw InputError("inject_plume: cube does not match the scene");
  const std::size_t n = s.n1 * s.n2;
  const double inv2s2 = 1.0 / (2.0 * s.plume_sigma * s.plume_sigma);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < s.n1; ++i)
    for (std::size_t j = 0; j < s.n2; ++j) {
      const double di = double(i) - s.plume_row;
      const double dj = double(j) - s.plume_col;
      g[i * s.n2 + j] = std::exp(-(di * di + dj * dj) * inv2s2);
    }
  for (std::size_t band = 0; band < s.b; ++band) {
    double* img = c.band_ptr(band);
    const double amp = strength * s.signature[band];
    for (std::size_t p = 0; p < n; ++p) img[p] += amp * g[p];
  }
}

cube::HyperCube gen_frame(const SceneSpec& s, std::size_t frame) {
  auto c = gen_background_frame(s, frame);
  inject_plume(c, s, plume_strength(s, frame));
  return c;
}

nlohmann::json scene_to_json(const SceneSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["n1"] = s.n1;
  j["n2"] = s.n2;
  j["b"] = s.b;
  j["frames"] = s.frames;
  j["seed"] = s.seed;
  j["noise_scale"] = s.noise_scale;
  j["smooth_radius"] = s.smooth_radius;
  j["spectral_corr_length"] = s.spectral_corr_length;
  j["spectral_ripple"] = s.spectral_ripple;
  j["plume_row"] = s.plume_row;
  j["plume_col"] = s.plume_col;
  j["plume_sigma"] = s.plume_sigma;
  auto phases = nlohmann::json::array();
  for (const auto& p : s.phases)
    phases.push_back({{"first", p.first}, {"last", p.last}, {"strength", p.strength}});
  j["phases"] = phases;
  j["signature"] = s.signature;
  return j;
}

SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec s;
  try {
    s.name = j.at("name").get<std::string>();
    s.n1 = j.at("n1").get<std::size_t>();
    s.n2 = j.at("n2").get<std::size_t>();
    s.b = j.at("b").get<std::size_t>();
    s.frames = j.at("frames").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.noise_scale = j.at("noise_scale").get<double>();
    s.smooth_radius = j.at("smooth_radius").get<std::size_t>();
    s.spectral_corr_length = j.at("spectral_corr_length").get<double>();
    s.spectral_ripple = j.at("spectral_ripple").get<double>();
    s.plume_row = j.at("plume_row").get<double>();
    s.plume_col = j.at("plume_col").get<double>();
    s.plume_sigma = j.at("plume_sigma").get<double>();
    for (const auto& p : j.at("phases"))
      s.phases.push_back({p.at("first").get<std::size_t>(), p.at("last").get<std::size_t>(),
                          p.at("strength").get<double>()});
    s.signature = j.at("signature").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("scene json: ") + e.what());
  }
  s.validate();
  return s;
}

void save_scene(const SceneSpec& s, const fs::path& path) {
  s.validate();
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path.string());
  os << scene_to_json(s).dump(2) << "\n";
}

SceneSpec load_scene(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open for reading: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace hypercs::synthdata
