// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/config.hpp"
#include "ccreg/errors.hpp"
#include "ccreg/coord_space.hpp"
#include "ccreg/objectives.hpp"
#include "ccreg/siren.hpp"
#include "ccreg/volume.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ccreg {

/// Optimized registration: Phi_F maps target (fixed) coordinates to source
/// (moving) coordinates, Phi_B the reverse. A single-network run has no backward field.
struct InrPair {
  SirenParams forward;
  std::optional<SirenParams> backward;
  NormTransform t_source;
  NormTransform t_target;
  TrainConfig config;
  std::string config_hash;
  std::uint64_t seed = 0;
  LossBreakdown final_loss;
  std::vector<double> loss_curve;  // total objective per epoch

  bool paired() const noexcept { return backward.has_value(); }
};

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;
  double update_norm_forward = 0.0;
  double update_norm_backward = 0.0;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

/// Thrown when the objective or a gradient becomes non-finite.
class TrainingAborted : public NumericalError {
 public:
  TrainingAborted(const std::string& what, int epoch, LossBreakdown loss)
      : NumericalError(what), epoch_(epoch), loss_(loss) {}
  int epoch() const noexcept { return epoch_; }
  const LossBreakdown& loss() const noexcept { return loss_; }

 private:
  int epoch_;
  LossBreakdown loss_;
};

/// Images and coordinate transforms of one registration problem.
struct RegistrationImages {
  const Volume3D& fixed;
  const Volume3D& moving;
  NormTransform t_target;
  NormTransform t_source;
};

/// Terms that enter the total and the gradients. The breakdown always reports every computed value.
struct TermSelection {
  bool data_f = true, data_b = true;
  bool reg_f = true, reg_b = true;
  bool cycle_fb = true, cycle_bf = true;
};

struct ObjectiveResult {
  LossBreakdown loss;
  SirenGradients grad_forward;
  std::optional<SirenGradients> grad_backward;
};

/// Objective and exact parameter gradients for one pair of batches: `xt`
/// (target domain) feeds Phi_F, `xs` (source domain) feeds Phi_B. Pass null
/// `bwd` and `xs` for the single-network objective. Gradients are left at
/// zero when the loss is not finite.
ObjectiveResult evaluate_objective(const RegistrationImages& img, const SirenParams& fwd, const SirenParams* bwd,
                                   const Coords& xt, const Coords* xs, const LossWeights& w, bool cycle,
                                   const TermSelection& sel = {});

/// Joint optimization of the forward/backward pair. Each epoch draws
/// batch_per_inr target-foreground coordinates for Phi_F and as many
/// source-foreground coordinates for Phi_B, evaluates the six objective
/// terms and takes one Adam step on each network. Deterministic per seed.
InrPair train_pair(const Volume3D& fixed, const Volume3D& moving, const Volume3D& mask_fixed,
                   const Volume3D& mask_moving, const TrainConfig& cfg, const EpochObserver& observer = {});

/// Single forward network with data and regularizer terms only (beta forced to 0).
InrPair train_single(const Volume3D& fixed, const Volume3D& moving, const Volume3D& mask_fixed, const TrainConfig& cfg,
                     const EpochObserver& observer = {});

/// One line of metrics.jsonl.
std::string epoch_record_json(const EpochRecord& r);
std::string loss_breakdown_json(const LossBreakdown& b);

// Checkpoint directory: pair.json (transforms, config, seed, hashes, final
// loss) plus one network checkpoint per direction ("forward", "backward").
void save_pair(const InrPair& pair, const std::filesystem::path& dir);
/// Throws IoError when a payload no longer matches the hash recorded in pair.json.
InrPair load_pair(const std::filesystem::path& dir);

}  // namespace ccreg
