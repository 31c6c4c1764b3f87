// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/coord_space.hpp"

#include "ccreg/errors.hpp"

#include <cmath>
#include <limits>

namespace ccreg {

NormTransform make_norm_transform(const Grid& grid, bool isotropic) {
  grid.validate();
  const Vec3 extent = grid.extent();
  for (int a = 0; a < 3; ++a) {
    if (!(extent[a] > 0.0)) throw ContractError("normalization needs at least two voxels along every axis");
  }
  const Vec3 center = grid.origin + 0.5 * extent;
  NormTransform t;
  if (isotropic) {
    const double longest = extent.maxCoeff();
    t.scale = Vec3::Constant(2.0 / longest);
    t.padded_extent = Vec3::Constant(longest);
  } else {
    t.scale = extent.cwiseInverse() * 2.0;
    t.padded_extent = extent;
  }
  t.offset = -t.scale.cwiseProduct(center);
  return t;
}

ForegroundSampler::ForegroundSampler(const Volume3D& mask, const NormTransform& t) : grid_(mask.grid()), t_(t) {
  if (mask.size() > std::numeric_limits<std::uint32_t>::max()) throw ContractError("mask too large for sampler");
  const auto data = mask.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] != 0.0f) voxels_.push_back(static_cast<std::uint32_t>(i));
  }
  if (voxels_.empty()) throw DomainError("foreground mask is empty");
}

CoordBatch ForegroundSampler::sample(Eigen::Index n, Rng& rng, Domain domain) const {
  if (n < 0) throw ContractError("negative sample count");
  CoordBatch b;
  b.domain = domain;
  b.rng_key = rng.key();
  b.rng_counter = rng.counter();
  b.coords.resize(3, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto idx = voxels_[rng.uniform_index(voxels_.size())];
    b.coords.col(s) = t_.to_norm(grid_.voxel_center(idx));
  }
  return b;
}

CoordBatch sample_foreground(const Volume3D& mask, const NormTransform& t, Eigen::Index n, Rng& rng, Domain domain) {
  return ForegroundSampler(mask, t).sample(n, rng, domain);
}

IntensitySample trilinear_sample_voxel(const Volume3D& v, const Vec3& ijk) {
  const Grid& g = v.grid();
  std::int64_t lo[3];
  double f[3];
  bool clamped[3];
  bool knot[3];
  for (int a = 0; a < 3; ++a) {
    const auto n = g.dims[a];
    double p = ijk[a];
    clamped[a] = false;
    if (!(p >= 0.0)) {  // also catches NaN
      p = 0.0;
      clamped[a] = true;
    } else if (p > static_cast<double>(n - 1)) {
      p = static_cast<double>(n - 1);
      clamped[a] = true;
    }
    if (n == 1) {
      lo[a] = 0;
      f[a] = 0.0;
      clamped[a] = true;
      knot[a] = false;
      continue;
    }
    auto i0 = static_cast<std::int64_t>(std::floor(p));
    if (i0 > n - 2) i0 = n - 2;
    lo[a] = i0;
    f[a] = p - static_cast<double>(i0);
    knot[a] = !clamped[a] && f[a] == 0.0 && i0 > 0;
  }
  auto hi = [&](int a) { return g.dims[a] == 1 ? lo[a] : lo[a] + 1; };

  IntensitySample out;
  // value
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? f[2] : 1.0 - f[2];
    if (wz == 0.0) continue;
    const auto k = dz ? hi(2) : lo[2];
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? f[1] : 1.0 - f[1];
      if (wy == 0.0) continue;
      const auto j = dy ? hi(1) : lo[1];
      for (int dx = 0; dx < 2; ++dx) {
        const double wx = dx ? f[0] : 1.0 - f[0];
        if (wx == 0.0) continue;
        acc += wz * wy * wx * static_cast<double>(v.at(dx ? hi(0) : lo[0], j, k));
      }
    }
  }
  out.value = acc;

  // gradient, axis by axis: slope along `a` of the bilinear interpolant over the other two axes
  for (int a = 0; a < 3; ++a) {
    if (clamped[a]) continue;
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    std::int64_t a_lo = lo[a];
    std::int64_t a_hi = lo[a] + 1;
    double denom = 1.0;
    if (knot[a]) {
      a_lo = lo[a] - 1;
      denom = 2.0;
    }
    double slope = 0.0;
    for (int db = 0; db < 2; ++db) {
      const double wb = db ? f[b] : 1.0 - f[b];
      if (wb == 0.0) continue;
      for (int dc = 0; dc < 2; ++dc) {
        const double wc = dc ? f[c] : 1.0 - f[c];
        if (wc == 0.0) continue;
        std::int64_t idx_hi[3], idx_lo[3];
        idx_hi[a] = a_hi;
        idx_lo[a] = a_lo;
        idx_hi[b] = idx_lo[b] = db ? hi(b) : lo[b];
        idx_hi[c] = idx_lo[c] = dc ? hi(c) : lo[c];
        slope += wb * wc *
                 (static_cast<double>(v.at(idx_hi[0], idx_hi[1], idx_hi[2])) -
                  static_cast<double>(v.at(idx_lo[0], idx_lo[1], idx_lo[2])));
      }
    }
    out.gradient[a] = slope / denom;
  }
  return out;
}

IntensitySample trilinear_sample(const Volume3D& v, const Vec3& coord, const NormTransform& t) {
  const Grid& g = v.grid();
  const Vec3 world = t.to_world(coord);
  IntensitySample s = trilinear_sample_voxel(v, g.world_to_index(world));
  // d ijk / d n = 1 / (scale * spacing)
  s.gradient = s.gradient.cwiseQuotient(t.scale.cwiseProduct(g.spacing));
  return s;
}

}  // namespace ccreg
