// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/trainer.hpp"
#include "ccreg/volume.hpp"

#include <array>
#include <optional>
#include <vector>

namespace ccreg {

struct InferenceOptions {
  /// Uncertainty reported for degenerate samples and the cap for all others, mm.
  double saturation_mm = 10.0;
  /// Samples whose backward Jacobian has a larger condition number are degenerate.
  double cond_threshold = 1e6;
};

struct TaylorInverse {
  Vec3 inv_b = Vec3::Zero();
  bool degenerate = false;
};

/// Second-order inverse-function step: given y = Phi_F(x) and Phi_B's value,
/// Jacobian and Hessian at y, estimates Phi_B^{-1}(x) as
///   y + d - 1/2 J^{-1} H[d, d],  d = J^{-1} (x - Phi_B(y)).
/// Flags the sample degenerate (and returns y) if cond(J) exceeds the threshold
/// or the result is not finite.
TaylorInverse taylor_inverse(const Vec3& x, const Vec3& y, const SpatialEval& b_at_y, double cond_threshold = 1e6);

/// Phi_B^{-1}(x) for a trained pair.
TaylorInverse invert_backward(const InrPair& pair, const Vec3& x, const InferenceOptions& opt = {});

struct DeformationSample {
  Vec3 x = Vec3::Zero();       // query, normalized target coordinates
  Vec3 fwd = Vec3::Zero();     // Phi_F(x), normalized source coordinates
  Vec3 inv_b = Vec3::Zero();   // Phi_B^{-1}(x); equals fwd for degenerate samples
  Vec3 mid = Vec3::Zero();     // (fwd + inv_b) / 2
  double uncertainty_mm = 0.0;
  bool degenerate = false;
};

/// Consensus transform of every column of `x`. Requires a paired registration.
std::vector<DeformationSample> cc_transform(const InrPair& pair, const Coords& x, const InferenceOptions& opt = {});

/// Dense outputs on a target grid: displacement (mm, source world minus target
/// world) of the consensus estimate and the uncertainty norm. Voxels outside
/// `roi` are zero. For a single-network registration the forward estimate is
/// used and the uncertainty volume is zero.
struct DenseField {
  std::array<Volume3D, 3> displacement;
  Volume3D uncertainty;
};
DenseField dense_field(const InrPair& pair, const Grid& grid, const Volume3D* roi = nullptr,
                       const InferenceOptions& opt = {});

/// Resamples `moving` at target voxel world position + displacement, trilinear
/// with border clamp. Displacement volumes must share the moving image's grid.
Volume3D warp_image(const Volume3D& moving, const std::array<Volume3D, 3>& displacement);

struct TransformedLandmarks {
  LandmarkSet consensus;                 // source world mm, midpoint estimate
  LandmarkSet forward_only;              // source world mm, Phi_F alone
  std::vector<double> uncertainty_mm;    // empty for single-network registrations
  std::vector<bool> degenerate;
};

/// Maps target-world landmarks into the source image: normalize, transform, de-normalize.
TransformedLandmarks transform_landmarks(const InrPair& pair, const LandmarkSet& lm, const InferenceOptions& opt = {});

}  // namespace ccreg
