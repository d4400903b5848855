#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hypercs/cube.hpp"

namespace hypercs::detection {

struct Signature {
  std::string name;
  std::vector<double> values;
};

// CSV with a "band,value" header, one row per band, band indices 0..b-1
void save_signature(const Signature& s, const std::filesystem::path& path);
Signature load_signature(const std::filesystem::path& path);

// Gaussian background: sample mean plus ML covariance with a ridge chosen
// just large enough for a Cholesky factorization to go through.
class BackgroundModel {
 public:
  static BackgroundModel fit(const double* spectra, std::size_t count, std::size_t bands);
  static BackgroundModel fit_frames(const std::vector<cube::HyperCube>& frames);
  static BackgroundModel from_moments(std::vector<double> mean, std::vector<double> cov);

  std::size_t bands() const { return b_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& covariance() const { return cov_; }  // pre-ridge
  double ridge() const { return ridge_; }

  // out = L^{-1} v where (cov + ridge I) = L L^T
  void whiten(const double* v, double* out) const;

 private:
  BackgroundModel() = default;
  void factorize();

  std::size_t b_ = 0;
  std::vector<double> mean_;
  std::vector<double> cov_;
  std::vector<double> chol_;
  double ridge_ = 0.0;
};

// Squared cosine between signature and pixel in whitened coordinates,
// clamped to [0,1]. With center=true the pixel has the background mean
// removed first; the signature is used as given. A zero whitened vector
// scores 0.
double ace(const BackgroundModel& m, const double* signature, const double* pixel,
           bool center = true);

struct Map {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<double> data;

  Map() = default;
  Map(std::size_t rows, std::size_t cols) : n1(rows), n2(cols), data(rows * cols, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return data[i * n2 + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * n2 + j]; }
};

Map ace_map(const BackgroundModel& m, const Signature& sig, const cube::HyperCube& c,
            bool center = true);

// per-pixel fusion over the 3x3 neighborhood (truncated at the borders):
// 1 - prod(1 - score)
Map bulk_coherence(const Map& scores);

// Binary maps: 1 where the score exceeded the threshold in every one of the
// `window` frames ending at t. The first window-1 frames are all zero.
std::vector<Map> persistence_filter(const std::vector<Map>& series, double threshold,
                                    std::size_t window = 5);

// Grid CSV (one line per image row) plus a .json sidecar with dimensions
// and labels.
void save_map(const Map& m, const std::filesystem::path& path, const std::string& kind,
              std::int64_t frame);
Map load_map(const std::filesystem::path& path);

}  // namespace hypercs::detection
