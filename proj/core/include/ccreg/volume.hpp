// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ccreg {

using Vec3 = Eigen::Vector3d;
using Index3 = std::array<std::int64_t, 3>;

enum class DType : std::uint8_t { Float32, UInt8 };

std::string_view dtype_name(DType d) noexcept;

/// Voxel lattice geometry. Voxel (i,j,k) has its center at origin + (i,j,k) * spacing (mm).
struct Grid {
  Index3 dims{1, 1, 1};
  Vec3 spacing = Vec3::Ones();
  Vec3 origin = Vec3::Zero();

  std::size_t voxel_count() const noexcept {
    return static_cast<std::size_t>(dims[0] * dims[1] * dims[2]);
  }
  /// z-major linear index, x fastest.
  std::size_t linear(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
    return static_cast<std::size_t>((k * dims[1] + j) * dims[0] + i);
  }
  Index3 unravel(std::size_t idx) const noexcept;

  Vec3 index_to_world(const Vec3& ijk) const { return origin + ijk.cwiseProduct(spacing); }
  Vec3 world_to_index(const Vec3& p) const { return (p - origin).cwiseQuotient(spacing); }
  Vec3 voxel_center(std::size_t idx) const;

  /// Span between the first and last voxel centers along each axis, mm.
  Vec3 extent() const;

  bool operator==(const Grid& o) const noexcept {
    return dims == o.dims && spacing == o.spacing && origin == o.origin;
  }

  /// Throws ContractError unless dims > 0 and spacing > 0 and finite.
  void validate() const;
};

/// Scalar volume. Values are held as float; a UInt8 volume holds integers in [0, 255].
class Volume3D {
 public:
  Volume3D() = default;
  Volume3D(Grid grid, DType dtype, std::vector<float> data);
  /// Zero-filled volume.
  Volume3D(Grid grid, DType dtype);

  const Grid& grid() const noexcept { return grid_; }
  DType dtype() const noexcept { return dtype_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  float at(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
    return data_[grid_.linear(i, j, k)];
  }
  float& at(std::int64_t i, std::int64_t j, std::int64_t k) noexcept { return data_[grid_.linear(i, j, k)]; }
  float operator[](std::size_t idx) const noexcept { return data_[idx]; }
  float& operator[](std::size_t idx) noexcept { return data_[idx]; }

  bool is_binary_mask() const noexcept;
  std::size_t count_nonzero() const noexcept;

  bool operator==(const Volume3D& o) const noexcept;

 private:
  Grid grid_;
  DType dtype_ = DType::Float32;
  std::vector<float> data_;
};

/// Throws ContractError if `mask` is not a {0,1} UInt8 volume on the same grid as `image`.
void require_mask_for(const Volume3D& mask, const Volume3D& image, std::string_view what);

/// World-space points (mm) with optional labels.
struct LandmarkSet {
  std::vector<Vec3> points;
  std::vector<std::string> labels;  // empty or same length as points

  std::size_t size() const noexcept { return points.size(); }
  void validate() const;
};

}  // namespace ccreg
