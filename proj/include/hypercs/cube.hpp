#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace hypercs::cube {

// Dense hyperspectral cube, band-major so each band image is contiguous:
// data[band * n1 * n2 + row * n2 + col].
struct HyperCube {
  std::size_t n1 = 0;  // rows
  std::size_t n2 = 0;  // cols
  std::size_t b = 0;   // bands
  std::vector<double> data;

  HyperCube() = default;
  HyperCube(std::size_t rows, std::size_t cols, std::size_t bands)
      : n1(rows), n2(cols), b(bands), data(rows * cols * bands, 0.0) {}

  std::size_t pixels() const { return n1 * n2; }

  double& at(std::size_t i, std::size_t j, std::size_t band) {
    return data[band * n1 * n2 + i * n2 + j];
  }
  double at(std::size_t i, std::size_t j, std::size_t band) const {
    return data[band * n1 * n2 + i * n2 + j];
  }

  double* band_ptr(std::size_t band) { return data.data() + band * n1 * n2; }
  const double* band_ptr(std::size_t band) const { return data.data() + band * n1 * n2; }

  // gather the spectrum of one pixel (strided across bands) into out[0..b)
  void spectrum(std::size_t i, std::size_t j, double* out) const {
    const std::size_t stride = n1 * n2;
    const double* p = data.data() + i * n2 + j;
    for (std::size_t k = 0; k < b; ++k) out[k] = p[k * stride];
  }
  void set_spectrum(std::size_t i, std::size_t j, const double* in) {
    const std::size_t stride = n1 * n2;
    double* p = data.data() + i * n2 + j;
    for (std::size_t k = 0; k < b; ++k) p[k * stride] = in[k];
  }
};

HyperCube crop_fov(const HyperCube& c, std::size_t row0, std::size_t col0, std::size_t rows,
                   std::size_t cols);

// Single-cube binary format: "HSC1" | u32 n1 | u32 n2 | u32 b | n1*n2*b f64,
// all little-endian, payload band-major.
void save_cube(const HyperCube& c, const std::filesystem::path& path);
HyperCube load_cube(const std::filesystem::path& path);

// A sequence is a directory of frame_0000.hsc, frame_0001.hsc, ... plus a
// manifest.json recording {frames, n1, n2, b}.
void save_sequence(const std::vector<HyperCube>& frames, const std::filesystem::path& dir);
std::vector<HyperCube> load_sequence(const std::filesystem::path& dir);
std::size_t sequence_length(const std::filesystem::path& dir);
HyperCube load_sequence_frame(const std::filesystem::path& dir, std::size_t index);
std::filesystem::path sequence_frame_path(const std::filesystem::path& dir, std::size_t index);

}  // namespace hypercs::cube
