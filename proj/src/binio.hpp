#pragma once

// Little-endian binary helpers shared by the .hsc/.hsm readers and writers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "hypercs/errors.hpp"

namespace hypercs::binio {

static_assert(std::endian::native == std::endian::little,
              "file I/O assumes a little-endian host");

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  os.write(buf, 4);
}

inline std::uint32_t get_u32(std::istream& is, const std::string& what) {
  char buf[4];
  if (!is.read(buf, 4)) throw InputError("truncated file while reading " + what);
  std::uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

inline void put_f64_array(std::ostream& os, const double* v, std::size_t n) {
  os.write(reinterpret_cast<const char*>(v), std::streamsize(n * sizeof(double)));
}

inline void get_f64_array(std::istream& is, double* v, std::size_t n, const std::string& what) {
  if (!is.read(reinterpret_cast<char*>(v), std::streamsize(n * sizeof(double))))
    throw InputError("truncated file while reading " + what);
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& what) {
  char buf[4];
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    throw InputError(what + ": bad magic, expected " + magic);
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + p.string());
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw InputError("cannot open for reading: " + p.string());
  return is;
}

}  // namespace hypercs::binio
