#include "hypercs/cube.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "binio.hpp"
#include "hypercs/errors.hpp"

namespace fs = std::filesystem;

namespace hypercs::cube {

HyperCube crop_fov(const HyperCube& c, std::size_t row0, std::size_t col0, std::size_t rows,
                   std::size_t cols) {
  if (rows == 0 || cols == 0) throw InputError("crop_fov: empty crop window");
  if (row0 + rows > c.n1 || col0 + cols > c.n2)
    throw InputError("crop_fov: window exceeds cube bounds");
  HyperCube out(rows, cols, c.b);
  for (std::size_t k = 0; k < c.b; ++k) {
    const double* src = c.band_ptr(k);
    double* dst = out.band_ptr(k);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) dst[i * cols + j] = src[(row0 + i) * c.n2 + col0 + j];
  }
  return out;
}

void save_cube(const HyperCube& c, const fs::path& path) {
  if (c.n1 == 0 || c.n2 == 0 || c.b == 0) throw InputError("save_cube: empty cube");
  if (c.data.size() != c.n1 * c.n2 * c.b) throw std::invalid_argument("save_cube: size mismatch");
  auto os = binio::open_out(path);
  os.write("HSC1", 4);
  binio::put_u32(os, std::uint32_t(c.n1));
  binio::put_u32(os, std::uint32_t(c.n2));
  binio::put_u32(os, std::uint32_t(c.b));
  binio::put_f64_array(os, c.data.data(), c.data.size());
  if (!os) throw InputError("save_cube: write failed for " + path.string());
}

HyperCube load_cube(const fs::path& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, "HSC1", path.string());
  HyperCube c;
  c.n1 = binio::get_u32(is, path.string() + " n1");
  c.n2 = binio::get_u32(is, path.string() + " n2");
  c.b = binio::get_u32(is, path.string() + " b");
  if (c.n1 == 0 || c.n2 == 0 || c.b == 0)
    throw InputError(path.string() + ": zero dimension in header");
  const std::size_t total = c.n1 * c.n2 * c.b;
  if (total > (std::size_t(1) << 31))
    throw InputError(path.string() + ": header implies an implausibly large cube");
  c.data.resize(total);
  binio::get_f64_array(is, c.data.data(), total, path.string() + " payload");
  // must be exactly at EOF now
  char extra;
  if (is.read(&extra, 1)) throw InputError(path.string() + ": trailing bytes after payload");
  return c;
}

fs::path sequence_frame_path(const fs::path& dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%04zu.hsc", index);
  return dir / name;
}

void save_sequence(const std::vector<HyperCube>& frames, const fs::path& dir) {
  if (frames.empty()) throw InputError("save_sequence: no frames");
  const std::size_t n1 = frames[0].n1, n2 = frames[0].n2, b = frames[0].b;
  for (const auto& f : frames)
    if (f.n1 != n1 || f.n2 != n2 || f.b != b)
      throw InputError("save_sequence: frames disagree on dimensions");
  fs::create_directories(dir);
  for (std::size_t t = 0; t < frames.size(); ++t) save_cube(frames[t], sequence_frame_path(dir, t));
  nlohmann::json manifest;
  manifest["frames"] = frames.size();
  manifest["n1"] = n1;
  manifest["n2"] = n2;
  manifest["b"] = b;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw InputError("save_sequence: cannot write manifest in " + dir.string());
  os << manifest.dump(2) << "\n";
}

namespace {
nlohmann::json load_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw InputError("missing manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    is >> m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(dir.string() + "/manifest.json: " + e.what());
  }
  for (const char* key : {"frames", "n1", "n2", "b"})
    if (!m.contains(key)) throw InputError(dir.string() + "/manifest.json: missing " + key);
  return m;
}
}  // namespace

std::size_t sequence_length(const fs::path& dir) {
  return load_manifest(dir).at("frames").get<std::size_t>();
}

HyperCube load_sequence_frame(const fs::path& dir, std::size_t index) {
  const auto m = load_manifest(dir);
  if (index >= m.at("frames").get<std::size_t>())
    throw InputError("frame index out of range in " + dir.string());
  HyperCube c = load_cube(sequence_frame_path(dir, index));
  if (c.n1 != m.at("n1").get<std::size_t>() || c.n2 != m.at("n2").get<std::size_t>() ||
      c.b != m.at("b").get<std::size_t>())
    throw InputError("frame disagrees with manifest in " + dir.string());
  return c;
}

std::vector<HyperCube> load_sequence(const fs::path& dir) {
  const std::size_t count = sequence_length(dir);
  std::vector<HyperCube> frames;
  frames.reserve(count);
  for (std::size_t t = 0; t < count; ++t) frames.push_back(load_sequence_frame(dir, t));
  return frames;
}

}  // namespace hypercs::cube
