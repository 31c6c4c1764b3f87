// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/objectives.hpp"
#include "ccreg/siren.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace ccreg {

/// Hyperparameters of one registration run. Defaults are the published settings.
struct TrainConfig {
  int epochs = 2500;
  double lr = 1e-4;
  int batch_per_inr = 10000;
  LossWeights weights{};  // alpha 0.05, beta 1e-3, tau 10, symmetric jacobian
  SirenShape net{};       // 3 x 256, omega0 30
  std::uint64_t seed = 0;
  bool cycle_enabled = true;
  /// Share one scale across axes (virtual zero padding of short axes).
  bool isotropic_coords = false;
  /// Debug only: draw one coordinate batch and reuse it every epoch.
  bool reuse_samples = false;

  /// Sets the regularizer and its default weight.
  TrainConfig& use_regularizer(RegKind k);
  void validate() const;
};

/// Canonical JSON with every field materialized.
std::string config_to_json(const TrainConfig& c, int indent = 2);

/// Applies the keys present in `text` on top of `base`. Recognised keys:
/// epochs, lr, batch_per_inr, alpha, beta, tau, reg_kind, hidden_layers,
/// width, omega0, seed, cycle_enabled, isotropic_coords, reuse_samples.
/// If reg_kind is given without alpha, alpha takes that regularizer's default.
/// Unknown keys are rejected.
TrainConfig config_from_json(std::string_view text, TrainConfig base = {});

/// Hash of the canonical JSON of every hyperparameter except the seed.
std::string config_hash(const TrainConfig& c);

}  // namespace ccreg
