#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hypercs/cube.hpp"

namespace hypercs::synthdata {

struct PlumePhase {
  std::size_t first = 0;  // inclusive frame range
  std::size_t last = 0;
  double strength = 0.0;
};

struct SceneSpec {
  std::string name = "custom";
  std::size_t n1 = 64;
  std::size_t n2 = 64;
  std::size_t b = 20;
  std::size_t frames = 120;
  std::uint64_t seed = 1;
  double noise_scale = 1.0;
  std::size_t smooth_radius = 1;
  // Perturbations span ~b/corr_length smooth spectral modes, so longer
  // lengths mean a lower-rank band covariance; <= 0 makes bands independent.
  double spectral_corr_length = 4.0;
  // Amplitude of one faint extra mode (a spectral bump on its own smooth
  // field). Keeps the band covariance from being exactly singular, so
  // score percentiles rank real values instead of rounding ties.
  double spectral_ripple = 1e-8;
  double plume_row = 32.0;
  double plume_col = 32.0;
  double plume_sigma = 5.0;
  std::vector<PlumePhase> phases;
  std::vector<double> signature;  // unit 2-norm, one entry per band

  void validate() const;
};

std::vector<std::string> preset_names();
SceneSpec preset_scenario(const std::string& name);

// flat positive baseline radiance, identical in every band
std::vector<double> mean_spectrum(std::size_t b);
// two-peak nonnegative spectrum, normalized to unit 2-norm
std::vector<double> preset_signature(std::size_t b);

double plume_strength(const SceneSpec& s, std::size_t frame);

// background = mean spectrum + noise_scale * correlated unit-variance field;
// spatial smoothing and the spectral-mode mixing both preserve variance
cube::HyperCube gen_background_frame(const SceneSpec& s, std::size_t frame);
// background plus the plume scheduled for this frame
cube::HyperCube gen_frame(const SceneSpec& s, std::size_t frame);
// adds strength * gaussian(i,j) * signature(k)
void inject_plume(cube::HyperCube& c, const SceneSpec& s, double strength);

// Counter-based randomness: every draw is a pure function of its
// coordinates, so generation order and thread count cannot change a scene.
std::uint64_t mix64(std::uint64_t x);
double counter_uniform(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel,
                       std::uint64_t band, std::uint64_t lane);
// sum of 12 uniforms minus 6: exactly unit variance, no libm involved
double counter_normal(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel,
                      std::uint64_t band);

void save_scene(const SceneSpec& s, const std::filesystem::path& path);
SceneSpec load_scene(const std::filesystem::path& path);

}  // namespace hypercs::synthdata
