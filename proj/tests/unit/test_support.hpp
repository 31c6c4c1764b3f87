// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/rng.hpp"
#include "ccreg/volume.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace ccreg::test {

// Fresh empty directory under the system temp dir, named after the test.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ccreg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline Grid make_grid(std::int64_t nx, std::int64_t ny, std::int64_t nz, Vec3 spacing = Vec3::Ones(),
                      Vec3 origin = Vec3::Zero()) {
  Grid g;
  g.dims = {nx, ny, nz};
  g.spacing = spacing;
  g.origin = origin;
  return g;
}

inline Volume3D random_volume(const Grid& g, Rng& rng) {
  Volume3D v(g, DType::Float32);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(rng.uniform(-100.0, 100.0));
  return v;
}

inline Vec3 random_vec(Rng& rng, double lo = -1.0, double hi = 1.0) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

}  // namespace ccreg::test
