// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/coord_space.hpp"
#include "ccreg/siren.hpp"
#include "ccreg/volume.hpp"

#include <optional>
#include <span>
#include <string_view>

namespace ccreg {

enum class RegKind { Jacobian, SymmetricJacobian, Bending };

std::string_view reg_kind_name(RegKind k) noexcept;
RegKind parse_reg_kind(std::string_view s);
/// Derivative order a regularizer needs from the network.
int required_order(RegKind k) noexcept;
/// Regularizer weight used when none is configured: 0.05 for the determinant terms, 10 for bending.
double default_alpha(RegKind k) noexcept;

struct LossWeights {
  double alpha = 0.05;
  double beta = 1e-3;
  double tau = 10.0;
  RegKind reg_kind = RegKind::SymmetricJacobian;

  void validate() const;
};

/// The six objective components and their weighted total. Terms that a run
/// does not compute (backward network, cycle) are empty.
struct LossBreakdown {
  double data_f = 0.0;
  std::optional<double> data_b;
  double reg_f = 0.0;
  std::optional<double> reg_b;
  std::optional<double> cycle_fb;
  std::optional<double> cycle_bf;
  double total = 0.0;

  bool all_finite() const;
};

/// Scalar loss with its adjoint with respect to the network outputs.
struct LossWithAdjoint {
  double value = 0.0;
  SpatialAdjoint adjoint;
};

/// Pearson normalized cross-correlation. Zero-variance input gives 0.
double ncc(std::span<const double> a, std::span<const double> b);

/// NCC plus d ncc / d b_i in `grad_b` (resized). Zero variance gives 0 and a zero gradient.
double ncc_with_gradient(std::span<const double> a, std::span<const double> b, std::vector<double>& grad_b);

/// -NCC between the fixed image at `x` and the moving image at `phi.phi`, as one
/// correlation over the whole batch. The adjoint has order 0 (w.r.t. Phi only).
LossWithAdjoint data_loss(const Volume3D& fixed, const Volume3D& moving, const Coords& x, const SpatialBatch& phi,
                          const NormTransform& t_fixed, const NormTransform& t_moving);

/// mean |1 - det grad Phi|; subgradient 0 where det == 1.
LossWithAdjoint jac_det_loss(const SpatialBatch& ev);

/// mean min((det - 1)^2 / det, tau); det <= 0 gives tau; zero adjoint where clipped.
LossWithAdjoint sym_jac_det_loss(const SpatialBatch& ev, double tau);

/// Per-sample penalty of the symmetric determinant term (exposed for property tests).
double sym_jac_penalty(double det, double tau) noexcept;

/// mean over samples of sum_k [ sum_i (d2 phi_k/dx_i^2)^2 + 2 sum_{i<j} (d2 phi_k/dx_i dx_j)^2 ].
LossWithAdjoint bending_loss(const SpatialBatch& ev);

/// Dispatches on `w.reg_kind`, returning the unweighted regularizer.
LossWithAdjoint regularizer_loss(const SpatialBatch& ev, const LossWeights& w);

/// mean ||outer_phi - x||^2 and its adjoint with respect to outer_phi.
struct CycleResidual {
  double value = 0.0;
  Coords adjoint;
};
CycleResidual cycle_residual(const Coords& x, const Coords& outer_phi);

/// Cycle loss through the composition Phi_outer(Phi_inner(x)) with parameter
/// gradients for both networks.
struct CycleLossResult {
  double value = 0.0;
  SirenGradients grad_inner;
  SirenGradients grad_outer;
};
CycleLossResult cycle_loss(const Coords& x, const SirenParams& inner, const SirenParams& outer);

/// Fills `terms.total` = data_f + data_b + alpha (reg_f + reg_b) + beta (cycle_fb + cycle_bf).
LossBreakdown total_loss(LossBreakdown terms, const LossWeights& w);

/// dst += scale * src over every block src carries. dst must have at least src's order.
void accumulate(SpatialAdjoint& dst, const SpatialAdjoint& src, double scale);

}  // namespace ccreg
