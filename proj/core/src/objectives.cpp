// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/objectives.hpp"

#include "ccreg/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cmath>
#include <string>

namespace ccreg {
namespace {

using Eigen::Index;

// d det / d column i of J.
inline void det_gradient(const Eigen::Matrix3d& j, Eigen::Matrix3d& g) {
  g.col(0) = j.col(1).cross(j.col(2));
  g.col(1) = j.col(2).cross(j.col(0));
  g.col(2) = j.col(0).cross(j.col(1));
}

void require_order(const SpatialBatch& ev, int order, const char* what) {
  if (ev.order < order) {
    throw ContractError(std::string(what) + " needs derivatives of order " + std::to_string(order));
  }
}

}  // namespace

std::string_view reg_kind_name(RegKind k) noexcept {
  switch (k) {
    case RegKind::Jacobian:
      return "jacobian";
    case RegKind::SymmetricJacobian:
      return "symmetric_jacobian";
    case RegKind::Bending:
      return "bending";
  }
  return "?";
}

RegKind parse_reg_kind(std::string_view s) {
  if (s == "jacobian" || s == "jac") return RegKind::Jacobian;
  if (s == "symmetric_jacobian" || s == "sjac") return RegKind::SymmetricJacobian;
  if (s == "bending" || s == "bend") return RegKind::Bending;
  throw ContractError("unknown regularizer '" + std::string(s) + "'");
}

int required_order(RegKind k) noexcept { return k == RegKind::Bending ? 2 : 1; }

double default_alpha(RegKind k) noexcept { return k == RegKind::Bending ? 10.0 : 0.05; }

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ContractError("loss weights alpha and beta must be >= 0");
  if (!(tau > 0.0)) throw ContractError("jacobian clip tau must be > 0");
}

bool LossBreakdown::all_finite() const {
  auto ok = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
  return std::isfinite(data_f) && std::isfinite(reg_f) && ok(data_b) && ok(reg_b) && ok(cycle_fb) && ok(cycle_bf) &&
         std::isfinite(total);
}

double ncc_with_gradient(std::span<const double> a, std::span<const double> b, std::vector<double>& grad_b) {
  if (a.size() != b.size()) throw ContractError("ncc: length mismatch");
  if (a.size() < 2) throw ContractError("ncc: need at least two samples");
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0, raa = 0.0, rbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
    raa += a[i] * a[i];
    rbb += b[i] * b[i];
  }
  grad_b.assign(n, 0.0);
  // Flat input: variance is rounding noise relative to the signal energy.
  constexpr double kFlat = 1e-24;
  if (saa <= kFlat * raa || sbb <= kFlat * rbb || saa == 0.0 || sbb == 0.0) return 0.0;
  const double denom = std::sqrt(saa * sbb);
  const double r = sab / denom;
  for (std::size_t i = 0; i < n; ++i) {
    grad_b[i] = (a[i] - ma) / denom - r * (b[i] - mb) / sbb;
  }
  return r;
}

double ncc(std::span<const double> a, std::span<const double> b) {
  std::vector<double> unused;
  return ncc_with_gradient(a, b, unused);
}

LossWithAdjoint data_loss(const Volume3D& fixed, const Volume3D& moving, const Coords& x, const SpatialBatch& phi,
                          const NormTransform& t_fixed, const NormTransform& t_moving) {
  const Index n = x.cols();
  if (phi.size() != n) throw ContractError("data_loss: evaluations do not align with the batch");
  std::vector<double> fv(static_cast<std::size_t>(n)), mv(static_cast<std::size_t>(n));
  Coords mgrad(3, n);
  for (Index s = 0; s < n; ++s) {
    fv[static_cast<std::size_t>(s)] = trilinear_sample(fixed, x.col(s), t_fixed).value;
    const auto m = trilinear_sample(moving, phi.phi.col(s), t_moving);
    mv[static_cast<std::size_t>(s)] = m.value;
    mgrad.col(s) = m.gradient;
  }
  std::vector<double> g;
  const double r = ncc_with_gradient(fv, mv, g);
  LossWithAdjoint out{-r, SpatialAdjoint::zeros(0, n)};
  for (Index s = 0; s < n; ++s) out.adjoint.phi.col(s) = -g[static_cast<std::size_t>(s)] * mgrad.col(s);
  return out;
}

LossWithAdjoint jac_det_loss(const SpatialBatch& ev) {
  require_order(ev, 1, "jac_det_loss");
  const Index n = ev.size();
  if (n == 0) throw ContractError("jac_det_loss: empty batch");
  LossWithAdjoint out{0.0, SpatialAdjoint::zeros(1, n)};
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::Matrix3d dg;
  for (Index s = 0; s < n; ++s) {
    const Eigen::Matrix3d j = ev.jacobian(s);
    const double det = j.determinant();
    const double diff = 1.0 - det;
    out.value += std::abs(diff);
    if (diff == 0.0) continue;
    det_gradient(j, dg);
    const double sign = diff > 0.0 ? -1.0 : 1.0;  // d|1-det|/d det
    for (int i = 0; i < 3; ++i) out.adjoint.d1[i].col(s) = sign * inv_n * dg.col(i);
  }
  out.value *= inv_n;
  return out;
}

double sym_jac_penalty(double det, double tau) noexcept {
  if (!(det > 0.0)) return tau;
  const double p = (det - 1.0) * (det - 1.0) / det;
  return p < tau ? p : tau;
}

LossWithAdjoint sym_jac_det_loss(const SpatialBatch& ev, double tau) {
  require_order(ev, 1, "sym_jac_det_loss");
  if (!(tau > 0.0)) throw ContractError("sym_jac_det_loss: tau must be > 0");
  const Index n = ev.size();
  if (n == 0) throw ContractError("sym_jac_det_loss: empty batch");
  LossWithAdjoint out{0.0, SpatialAdjoint::zeros(1, n)};
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::Matrix3d dg;
  for (Index s = 0; s < n; ++s) {
    const Eigen::Matrix3d j = ev.jacobian(s);
    const double det = j.determinant();
    const double pen = sym_jac_penalty(det, tau);
    out.value += pen;
    if (!(det > 0.0) || pen >= tau) continue;
    const double dpen = 1.0 - 1.0 / (det * det);
    det_gradient(j, dg);
    for (int i = 0; i < 3; ++i) out.adjoint.d1[i].col(s) = dpen * inv_n * dg.col(i);
  }
  out.value *= inv_n;
  return out;
}

LossWithAdjoint bending_loss(const SpatialBatch& ev) {
  require_order(ev, 2, "bending_loss");
  const Index n = ev.size();
  if (n == 0) throw ContractError("bending_loss: empty batch");
  LossWithAdjoint out{0.0, SpatialAdjoint::zeros(2, n)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int q = 0; q < 6; ++q) {
    const double w = kHessPairs[q][0] == kHessPairs[q][1] ? 1.0 : 2.0;
    out.value += w * ev.d2[q].squaredNorm();
    out.adjoint.d2[q] = (2.0 * w * inv_n) * ev.d2[q];
  }
  out.value *= inv_n;
  return out;
}

LossWithAdjoint regularizer_loss(const SpatialBatch& ev, const LossWeights& w) {
  switch (w.reg_kind) {
    case RegKind::Jacobian:
      return jac_det_loss(ev);
    case RegKind::SymmetricJacobian:
      return sym_jac_det_loss(ev, w.tau);
    case RegKind::Bending:
      return bending_loss(ev);
  }
  throw ContractError("unknown regularizer");
}

CycleResidual cycle_residual(const Coords& x, const Coords& outer_phi) {
  if (x.cols() != outer_phi.cols()) throw ContractError("cycle_residual: length mismatch");
  const Index n = x.cols();
  if (n == 0) throw ContractError("cycle_residual: empty batch");
  const Coords r = outer_phi - x;
  return {r.squaredNorm() / static_cast<double>(n), (2.0 / static_cast<double>(n)) * r};
}

CycleLossResult cycle_loss(const Coords& x, const SirenParams& inner, const SirenParams& outer) {
  const SpatialBatch in = eval_spatial(inner, x, 0);
  const SpatialBatch out = eval_spatial(outer, in.phi, 0);
  const CycleResidual res = cycle_residual(x, out.phi);

  CycleLossResult r;
  r.value = res.value;
  SpatialAdjoint outer_adj = SpatialAdjoint::zeros(0, x.cols());
  outer_adj.phi = res.adjoint;
  Coords y_adj;
  r.grad_outer = param_gradients(outer, in.phi, outer_adj, &y_adj);
  SpatialAdjoint inner_adj = SpatialAdjoint::zeros(0, x.cols());
  inner_adj.phi = y_adj;
  r.grad_inner = param_gradients(inner, x, inner_adj);
  return r;
}

LossBreakdown total_loss(LossBreakdown t, const LossWeights& w) {
  t.total = t.data_f + t.data_b.value_or(0.0) + w.alpha * (t.reg_f + t.reg_b.value_or(0.0)) +
            w.beta * (t.cycle_fb.value_or(0.0) + t.cycle_bf.value_or(0.0));
  return t;
}

void accumulate(SpatialAdjoint& dst, const SpatialAdjoint& src, double scale) {
  if (dst.order < src.order || dst.size() != src.size()) throw ContractError("adjoint accumulate: shape mismatch");
  dst.phi += scale * src.phi;
  if (src.order >= 1) {
    for (int i = 0; i < 3; ++i) dst.d1[i] += scale * src.d1[i];
  }
  if (src.order >= 2) {
    for (int q = 0; q < 6; ++q) dst.d2[q] += scale * src.d2[q];
  }
}

}  // namespace ccreg
