// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/coord_space.hpp"
#include "ccreg/rng.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ccreg {

/// Fully connected layer y = W x + b.
struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_out x fan_in
  Eigen::VectorXd bias;    // fan_out
};

/// Sinusoidal coordinate network u: R^3 -> R^3, evaluated as Phi(x) = x + u(x).
///
/// Every layer but the last computes h' = sin(omega0 * (W h + b)); the last
/// layer is linear.
struct SirenParams {
  std::vector<DenseLayer> layers;
  double omega0 = 30.0;

  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  /// Throws ContractError unless shapes chain 3 -> ... -> 3.
  void validate() const;
  bool operator==(const SirenParams& o) const;
};

struct SirenShape {
  int hidden_layers = 3;
  int width = 256;
  double omega0 = 30.0;
};

/// Sinusoidal-network initialization: first layer U(-1/3, 1/3), later sine
/// layers U(+-sqrt(6/fan_in)/omega0), the linear output layer the same bound
/// shrunk by a further 1/omega0 so initial displacements are near zero.
/// Biases start at zero.
SirenParams init_siren(const SirenShape& shape, Rng& rng);

/// Parameter-shaped gradient (or moment) storage.
struct SirenGradients {
  std::vector<DenseLayer> layers;

  static SirenGradients zeros_like(const SirenParams& p);
  SirenGradients& operator+=(const SirenGradients& o);
  SirenGradients& operator*=(double s);
  double squared_norm() const;
  bool all_finite() const;
};

/// Unique second-derivative index pairs (i <= j) in storage order.
inline constexpr std::array<std::array<int, 2>, 6> kHessPairs{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
constexpr int hess_pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  return i == 0 ? j : (i == 1 ? 2 + j : 5);
}

/// Per-sample view of a batch evaluation.
struct SpatialEval {
  int order = 0;
  Vec3 phi = Vec3::Zero();
  Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();            // jac(k, i) = d phi_k / d x_i
  // hess[k](i, j) = d2 phi_k / dx_i dx_j
  std::array<Eigen::Matrix3d, 3> hess{Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()};
};

/// Batch of Phi, grad Phi and grad^2 Phi values in structure-of-arrays layout.
///
/// d1[i].col(n) holds d Phi / d x_i at sample n; d2[p].col(n) holds the second
/// derivative for the index pair kHessPairs[p]. The adjoint of a loss with
/// respect to these outputs uses the same type; a d2 adjoint entry is the
/// derivative with respect to the stored (shared) symmetric entry.
struct SpatialBatch {
  int order = 0;
  Coords phi;
  std::array<Coords, 3> d1;
  std::array<Coords, 6> d2;

  static SpatialBatch zeros(int order, Eigen::Index n);
  Eigen::Index size() const noexcept { return phi.cols(); }
  Eigen::Matrix3d jacobian(Eigen::Index n) const;
  SpatialEval at(Eigen::Index n) const;
};

using SpatialAdjoint = SpatialBatch;

/// Forward-pass state kept for a later param_gradients call.
class SirenTape {
 public:
  SirenTape();
  ~SirenTape();
  SirenTape(SirenTape&&) noexcept;
  SirenTape& operator=(SirenTape&&) noexcept;

  int order() const noexcept;  // -1 when empty
  Eigen::Index size() const noexcept;

  struct Impl;

 private:
  friend SpatialBatch eval_spatial(const SirenParams&, const Coords&, int, SirenTape*);
  friend SirenGradients param_gradients(const SirenParams&, const SirenTape&, const SpatialAdjoint&, Coords*);
  std::unique_ptr<Impl> impl_;
};

/// Evaluates Phi and its spatial derivatives up to `order` (0, 1 or 2) by
/// layer-wise forward propagation of derivative directions.
SpatialBatch eval_spatial(const SirenParams& p, const Coords& x, int order);
/// Same, recording the activations in `tape` (replacing its contents).
SpatialBatch eval_spatial(const SirenParams& p, const Coords& x, int order, SirenTape* tape);

/// Exact dL/dtheta for a loss whose adjoints with respect to Phi, grad Phi
/// and grad^2 Phi at coordinates `x` are `adjoint`. If `input_adjoint` is
/// non-null it receives dL/dx (3 x N), which chains the loss through a
/// composition Phi_outer(Phi_inner(x)).
///
/// The batch is split into fixed-size chunks; per-chunk contributions are
/// summed in chunk order, so the result is bit-identical for any thread count.
SirenGradients param_gradients(const SirenParams& p, const Coords& x, const SpatialAdjoint& adjoint,
                               Coords* input_adjoint = nullptr);
/// Reuses the activations of an eval_spatial call; `p` must be the network that
/// was evaluated and the adjoint order must equal the recorded order.
SirenGradients param_gradients(const SirenParams& p, const SirenTape& tape, const SpatialAdjoint& adjoint,
                               Coords* input_adjoint = nullptr);

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const SirenParams& p);
};

/// One bias-corrected Adam update. Throws NumericalError naming the offending
/// block if any gradient entry is non-finite; `p` and `s` are then untouched.
void adam_step(SirenParams& p, const SirenGradients& g, AdamState& s, double lr);

/// Samples per evaluation chunk.
inline constexpr Eigen::Index kSirenChunk = 512;

}  // namespace ccreg
