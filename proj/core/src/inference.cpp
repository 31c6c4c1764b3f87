// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/inference.hpp"

#include "ccreg/coord_space.hpp"
#include "ccreg/errors.hpp"

#include <Eigen/LU>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccreg {
namespace {

using Eigen::Index;

double condition_number(const Eigen::Matrix3d& j) {
  // Singular values from the eigenvalues of J^T J (ascending).
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(j.transpose() * j, Eigen::EigenvaluesOnly);
  const Vec3& ev = es.eigenvalues();
  if (!(ev[0] > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(ev[2] / ev[0]);
}

// Adjugate inverse on the common path; LU with full pivoting when the determinant is tiny.
Vec3 solve3(const Eigen::Matrix3d& j, const Vec3& rhs) {
  const double det = j.determinant();
  const double scale = j.cwiseAbs().maxCoeff();
  if (std::abs(det) > 1e-12 * scale * scale * scale) return j.inverse() * rhs;
  return j.fullPivLu().solve(rhs);
}

constexpr Index kDenseChunk = 1 << 16;

}  // namespace

TaylorInverse taylor_inverse(const Vec3& x, const Vec3& y, const SpatialEval& b_at_y, double cond_threshold) {
  if (b_at_y.order < 2) throw ContractError("taylor_inverse needs second-order evaluations");
  TaylorInverse out{y, false};
  const Eigen::Matrix3d& j = b_at_y.jac;
  if (!j.allFinite() || !(condition_number(j) <= cond_threshold)) {
    out.degenerate = true;
    return out;
  }
  const Vec3 delta = x - b_at_y.phi;
  const Vec3 d = solve3(j, delta);
  Vec3 hdd;
  for (int k = 0; k < 3; ++k) hdd[k] = d.dot(b_at_y.hess[k] * d);
  const Vec3 est = y + d - 0.5 * solve3(j, hdd);
  if (!est.allFinite()) {
    out.degenerate = true;
    return out;
  }
  out.inv_b = est;
  return out;
}

TaylorInverse invert_backward(const InrPair& pair, const Vec3& x, const InferenceOptions& opt) {
  if (!pair.paired()) throw ContractError("invert_backward needs a paired registration");
  Coords xc(3, 1);
  xc.col(0) = x;
  const SpatialBatch f = eval_spatial(pair.forward, xc, 0);
  const SpatialBatch b = eval_spatial(*pair.backward, f.phi, 2);
  return taylor_inverse(x, f.phi.col(0), b.at(0), opt.cond_threshold);
}

std::vector<DeformationSample> cc_transform(const InrPair& pair, const Coords& x, const InferenceOptions& opt) {
  if (!pair.paired()) throw ContractError("cc_transform needs a paired registration");
  const SpatialBatch f = eval_spatial(pair.forward, x, 0);
  const SpatialBatch b = eval_spatial(*pair.backward, f.phi, 2);
  std::vector<DeformationSample> out(static_cast<std::size_t>(x.cols()));
  for (Index s = 0; s < x.cols(); ++s) {
    DeformationSample& d = out[static_cast<std::size_t>(s)];
    d.x = x.col(s);
    d.fwd = f.phi.col(s);
    const TaylorInverse inv = taylor_inverse(d.x, d.fwd, b.at(s), opt.cond_threshold);
    d.inv_b = inv.inv_b;
    d.degenerate = inv.degenerate;
    d.mid = (d.fwd + d.inv_b) / 2.0;
    if (d.degenerate) {
      d.uncertainty_mm = opt.saturation_mm;
    } else {
      const double u = pair.t_source.delta_to_mm(d.fwd - d.inv_b).norm();
      d.uncertainty_mm = std::isfinite(u) ? std::min(u, opt.saturation_mm) : opt.saturation_mm;
    }
  }
  return out;
}

DenseField dense_field(const InrPair& pair, const Grid& grid, const Volume3D* roi, const InferenceOptions& opt) {
  grid.validate();
  if (roi && !(roi->grid() == grid)) throw ContractError("dense_field: roi grid does not match the output grid");
  DenseField out{{Volume3D(grid, DType::Float32), Volume3D(grid, DType::Float32), Volume3D(grid, DType::Float32)},
                 Volume3D(grid, DType::Float32)};
  std::vector<std::size_t> voxels;
  for (std::size_t i = 0; i < grid.voxel_count(); ++i) {
    if (!roi || (*roi)[i] != 0.0f) voxels.push_back(i);
  }
  for (std::size_t start = 0; start < voxels.size(); start += kDenseChunk) {
    const std::size_t m = std::min<std::size_t>(kDenseChunk, voxels.size() - start);
    Coords x(3, static_cast<Index>(m));
    for (std::size_t s = 0; s < m; ++s) {
      x.col(static_cast<Index>(s)) = pair.t_target.to_norm(grid.voxel_center(voxels[start + s]));
    }
    auto write = [&](std::size_t s, const Vec3& mapped_norm, double unc) {
      const std::size_t idx = voxels[start + s];
      const Vec3 disp = pair.t_source.to_world(mapped_norm) - grid.voxel_center(idx);
      for (int a = 0; a < 3; ++a) out.displacement[a][idx] = static_cast<float>(disp[a]);
      out.uncertainty[idx] = static_cast<float>(unc);
    };
    if (pair.paired()) {
      const auto samples = cc_transform(pair, x, opt);
      for (std::size_t s = 0; s < m; ++s) write(s, samples[s].mid, samples[s].uncertainty_mm);
    } else {
      const SpatialBatch f = eval_spatial(pair.forward, x, 0);
      for (std::size_t s = 0; s < m; ++s) write(s, f.phi.col(static_cast<Index>(s)), 0.0);
    }
  }
  return out;
}

Volume3D warp_image(const Volume3D& moving, const std::array<Volume3D, 3>& displacement) {
  const Grid& g = moving.grid();
  for (const auto& d : displacement) {
    if (!(d.grid() == g)) throw ContractError("warp_image: displacement grid does not match the moving image");
  }
  Volume3D out(g, DType::Float32);
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const Vec3 p = g.voxel_center(i) + Vec3(displacement[0][i], displacement[1][i], displacement[2][i]);
    out[i] = static_cast<float>(trilinear_sample_voxel(moving, g.world_to_index(p)).value);
  }
  return out;
}

TransformedLandmarks transform_landmarks(const InrPair& pair, const LandmarkSet& lm, const InferenceOptions& opt) {
  lm.validate();
  const auto n = static_cast<Index>(lm.size());
  Coords x(3, n);
  for (Index s = 0; s < n; ++s) x.col(s) = pair.t_target.to_norm(lm.points[static_cast<std::size_t>(s)]);
  TransformedLandmarks out;
  out.consensus.labels = lm.labels;
  out.forward_only.labels = lm.labels;
  if (pair.paired()) {
    const auto samples = cc_transform(pair, x, opt);
    for (const auto& s : samples) {
      out.consensus.points.push_back(pair.t_source.to_world(s.mid));
      out.forward_only.points.push_back(pair.t_source.to_world(s.fwd));
      out.uncertainty_mm.push_back(s.uncertainty_mm);
      out.degenerate.push_back(s.degenerate);
    }
  } else {
    const SpatialBatch f = eval_spatial(pair.forward, x, 0);
    for (Index s = 0; s < n; ++s) out.forward_only.points.push_back(pair.t_source.to_world(f.phi.col(s)));
    out.consensus.points = out.forward_only.points;
    out.degenerate.assign(lm.size(), false);
  }
  return out;
}

}  // namespace ccreg
