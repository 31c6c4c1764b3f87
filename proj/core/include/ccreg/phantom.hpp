// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/volume.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ccreg {

/// Smooth displacement field in world mm: maps p to p + u(p).
class AnalyticField {
 public:
  virtual ~AnalyticField() = default;
  virtual Vec3 displacement(const Vec3& p) const = 0;
  /// d u / d p.
  virtual Eigen::Matrix3d displacement_jacobian(const Vec3& p) const = 0;

  Vec3 map(const Vec3& p) const { return p + displacement(p); }
  Eigen::Matrix3d jacobian(const Vec3& p) const { return Eigen::Matrix3d::Identity() + displacement_jacobian(p); }
  /// Newton solve of map(p) = q. Throws NumericalError if it does not converge.
  Vec3 inverse(const Vec3& q) const;
};

/// u(p) = (A - I) p + b.
class AffineField final : public AnalyticField {
 public:
  AffineField(const Eigen::Matrix3d& a, const Vec3& b) : a_(a), b_(b) {}
  Vec3 displacement(const Vec3& p) const override { return a_ * p + b_ - p; }
  Eigen::Matrix3d displacement_jacobian(const Vec3&) const override {
    return a_ - Eigen::Matrix3d::Identity();
  }

 private:
  Eigen::Matrix3d a_;
  Vec3 b_;
};

enum class PhantomKind : std::uint8_t { Sinusoid, GaussianCompression, PiecewiseContraction };

std::string_view phantom_kind_name(PhantomKind k) noexcept;
/// Accepts the names above ("sinusoid", "gaussian_compression", "piecewise_contraction").
PhantomKind parse_phantom_kind(std::string_view s);

struct PhantomSpec {
  PhantomKind kind = PhantomKind::Sinusoid;
  int size = 64;              // voxels per axis
  double amplitude_mm = 4.0;  // peak displacement
  std::uint64_t seed = 0;
  double spacing_mm = 1.0;
  int landmarks = 100;
  /// Grid-wide lower bound on det(d Phi / d p); smaller values are rejected.
  double min_det = 0.05;
};

/// Synthetic pair with known correspondence. The true mapping sends fixed
/// (target) world positions to moving (source) world positions, the same
/// direction as the forward network.
struct Phantom {
  PhantomSpec spec;
  Volume3D fixed;
  Volume3D moving;
  Volume3D mask;  // foreground of both images
  std::shared_ptr<const AnalyticField> field;
  std::array<Volume3D, 3> true_displacement;  // u at fixed voxel centers, mm
  LandmarkSet landmarks_fixed;
  LandmarkSet landmarks_moving;
  double min_det = 1.0;  // smallest det over fixed voxel centers
};

/// Builds the analytic field alone (no rasterization or texture).
std::shared_ptr<const AnalyticField> make_phantom_field(const PhantomSpec& spec);

/// Throws ParameterError naming the smallest determinant when the field is
/// not safely invertible on the grid.
Phantom generate_phantom(const PhantomSpec& spec);

}  // namespace ccreg
