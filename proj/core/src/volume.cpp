// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/volume.hpp"

#include "ccreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace ccreg {

std::string_view dtype_name(DType d) noexcept { return d == DType::UInt8 ? "uint8" : "float32"; }

Index3 Grid::unravel(std::size_t idx) const noexcept {
  const auto n = static_cast<std::int64_t>(idx);
  return {n % dims[0], (n / dims[0]) % dims[1], n / (dims[0] * dims[1])};
}

Vec3 Grid::voxel_center(std::size_t idx) const {
  const auto ijk = unravel(idx);
  return index_to_world(Vec3(static_cast<double>(ijk[0]), static_cast<double>(ijk[1]), static_cast<double>(ijk[2])));
}

Vec3 Grid::extent() const {
  return Vec3(static_cast<double>(dims[0] - 1), static_cast<double>(dims[1] - 1), static_cast<double>(dims[2] - 1))
      .cwiseProduct(spacing);
}

void Grid::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) throw ContractError("grid dims must be positive");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) throw ContractError("grid spacing must be positive");
    if (!std::isfinite(origin[a])) throw ContractError("grid origin must be finite");
  }
}

Volume3D::Volume3D(Grid grid, DType dtype, std::vector<float> data)
    : grid_(std::move(grid)), dtype_(dtype), data_(std::move(data)) {
  grid_.validate();
  if (data_.size() != grid_.voxel_count()) {
    throw ContractError("volume data length " + std::to_string(data_.size()) + " does not match dims product " +
                        std::to_string(grid_.voxel_count()));
  }
  if (dtype_ == DType::UInt8) {
    for (float v : data_) {
      if (!(v >= 0.0f && v <= 255.0f) || v != std::floor(v)) throw ContractError("uint8 volume holds a non-byte value");
    }
  }
}

Volume3D::Volume3D(Grid grid, DType dtype) : grid_(std::move(grid)), dtype_(dtype) {
  grid_.validate();
  data_.assign(grid_.voxel_count(), 0.0f);
}

bool Volume3D::is_binary_mask() const noexcept {
  return dtype_ == DType::UInt8 && std::all_of(data_.begin(), data_.end(), [](float v) { return v == 0.0f || v == 1.0f; });
}

std::size_t Volume3D::count_nonzero() const noexcept {
  return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](float v) { return v != 0.0f; }));
}

bool Volume3D::operator==(const Volume3D& o) const noexcept {
  return grid_ == o.grid_ && dtype_ == o.dtype_ && data_.size() == o.data_.size() &&
         std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(float)) == 0;
}

void require_mask_for(const Volume3D& mask, const Volume3D& image, std::string_view what) {
  if (!mask.is_binary_mask()) throw ContractError(std::string(what) + ": mask must be a uint8 volume of {0,1}");
  if (!(mask.grid() == image.grid())) throw ContractError(std::string(what) + ": mask grid does not match its image");
}

void LandmarkSet::validate() const {
  if (!labels.empty() && labels.size() != points.size()) throw ContractError("landmark labels/points length mismatch");
  for (const auto& p : points) {
    if (!p.allFinite()) throw ContractError("landmark with non-finite coordinate");
  }
}

}  // namespace ccreg
