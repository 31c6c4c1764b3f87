// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/rng.hpp"
#include "ccreg/volume.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace ccreg {

using Coords = Eigen::Matrix<double, 3, Eigen::Dynamic>;

/// Affine per-axis map world mm -> normalized network coordinates: n = scale * p + offset.
struct NormTransform {
  Vec3 scale = Vec3::Ones();
  Vec3 offset = Vec3::Zero();
  Vec3 padded_extent = Vec3::Constant(2.0);  // mm spanned by [-1, 1] on each axis

  Vec3 to_norm(const Vec3& world) const { return scale.cwiseProduct(world) + offset; }
  Vec3 to_world(const Vec3& n) const { return (n - offset).cwiseQuotient(scale); }
  /// Converts a normalized-space difference vector to mm.
  Vec3 delta_to_mm(const Vec3& dn) const { return dn.cwiseQuotient(scale); }

  bool operator==(const NormTransform& o) const noexcept {
    return scale == o.scale && offset == o.offset && padded_extent == o.padded_extent;
  }
};

/// Maps the voxel-center span of `grid` onto [-1, 1].
///
/// With `isotropic` the largest axis spans [-1, 1] and every axis shares that
/// scale; shorter axes are centered, as if zero-padded to a cube.
/// Requires at least two voxels along every axis.
NormTransform make_norm_transform(const Grid& grid, bool isotropic);

enum class Domain : std::uint8_t { Source, Target };

struct CoordBatch {
  Coords coords;  // 3 x N, normalized units
  Domain domain = Domain::Target;
  std::uint64_t rng_key = 0;
  std::uint64_t rng_counter = 0;  // counter at the first draw

  Eigen::Index size() const noexcept { return coords.cols(); }
};

/// Precomputed foreground voxel list for repeated uniform sampling.
class ForegroundSampler {
 public:
  ForegroundSampler(const Volume3D& mask, const NormTransform& t);

  /// n voxel centers drawn uniformly with replacement; consumes `rng`.
  CoordBatch sample(Eigen::Index n, Rng& rng, Domain domain) const;

  std::size_t foreground_count() const noexcept { return voxels_.size(); }
  const std::vector<std::uint32_t>& voxels() const noexcept { return voxels_; }

 private:
  Grid grid_;
  NormTransform t_;
  std::vector<std::uint32_t> voxels_;  // ascending linear indices
};

CoordBatch sample_foreground(const Volume3D& mask, const NormTransform& t, Eigen::Index n, Rng& rng,
                             Domain domain = Domain::Target);

struct IntensitySample {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();  // d value / d normalized coordinate
};

/// Trilinear intensity and its analytic gradient at a normalized coordinate.
///
/// Positions outside the voxel-center lattice are clamped to the border and
/// the gradient component along a clamped axis is zero. At a position lying
/// exactly on an interior lattice plane the derivative across that plane is
/// the mean of the two one-sided slopes (the central difference).
IntensitySample trilinear_sample(const Volume3D& v, const Vec3& coord, const NormTransform& t);

/// Same, with the position already expressed in (continuous) voxel indices.
IntensitySample trilinear_sample_voxel(const Volume3D& v, const Vec3& ijk);

}  // namespace ccreg
