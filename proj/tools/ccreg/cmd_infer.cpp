// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/inference.hpp"
#include "ccreg/trainer.hpp"
#include "ccreg/volume_io.hpp"

#include <optional>

namespace ccreg::cli {

int cmd_infer(const InferArgs& a, RunManifest& m) {
  m.add_input("pair", a.pair / "pair.json");
  const InrPair pair = load_pair(a.pair);
  m.set_config(pair.config);
  m.set("seed", pair.seed);
  m.set("paired", pair.paired());

  std::optional<Volume3D> roi, reference;
  if (!a.roi_mask.empty()) {
    m.add_input("roi_mask", a.roi_mask);
    roi = load_volume(a.roi_mask);
  }
  if (!a.reference.empty()) {
    m.add_input("reference", a.reference);
    reference = load_volume(a.reference);
  }
  if (!roi && !reference) throw ContractError("infer needs --reference or --roi-mask to define the output grid");
  if (roi && reference && !(roi->grid() == reference->grid())) {
    throw ContractError("--roi-mask and --reference are on different grids");
  }
  const Grid grid = roi ? roi->grid() : reference->grid();

  std::optional<LandmarkSet> lm;
  if (!a.landmarks.empty()) {
    m.add_input("landmarks", a.landmarks);
    lm = load_landmarks(a.landmarks, a.landmark_units == "voxel" ? LandmarkUnits::VoxelIndex : LandmarkUnits::WorldMm,
                        grid);
  }
  std::optional<Volume3D> moving;
  if (!a.warp.empty()) {
    m.add_input("warp", a.warp);
    moving = load_volume(a.warp);
  }

  const InferenceOptions opt{a.saturation_mm, a.cond_threshold};
  const DenseField f = dense_field(pair, grid, roi ? &*roi : nullptr, opt);
  fs::create_directories(a.out_dir);
  static const char* const kDisp[3] = {"disp_x.json", "disp_y.json", "disp_z.json"};
  for (int k = 0; k < 3; ++k) {
    save_volume(f.displacement[k], a.out_dir / kDisp[k]);
    m.add_output(kDisp[k]);
  }
  save_volume(f.uncertainty, a.out_dir / "uncertainty.json");
  m.add_output("uncertainty.json");

  if (lm) {
    const TransformedLandmarks tl = transform_landmarks(pair, *lm, opt);
    std::vector<double> unc = tl.uncertainty_mm, degenerate;
    unc.resize(lm->size(), 0.0);
    for (bool d : tl.degenerate) degenerate.push_back(d ? 1.0 : 0.0);
    degenerate.resize(lm->size(), 0.0);
    const std::string headers[] = {"uncertainty_mm", "degenerate"};
    const std::vector<double> columns[] = {unc, degenerate};
    save_landmarks(tl.consensus, a.out_dir / "landmarks.csv", headers, columns);
    m.add_output("landmarks.csv");
  }
  if (moving) {
    save_volume(warp_image(*moving, f.displacement), a.out_dir / "warped.json");
    m.add_output("warped.json");
  }
  return kOk;
}

}  // namespace ccreg::cli
