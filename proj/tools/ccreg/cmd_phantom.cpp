// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include "ccreg/phantom.hpp"
#include "ccreg/volume_io.hpp"

namespace ccreg::cli {

int cmd_phantom(const PhantomArgs& a, RunManifest& m) {
  PhantomSpec spec;
  spec.kind = parse_phantom_kind(a.kind);
  spec.size = a.size;
  spec.amplitude_mm = a.amplitude_mm;
  spec.spacing_mm = a.spacing_mm;
  spec.seed = a.seed;
  spec.landmarks = a.landmarks;
  m.set("phantom", {{"kind", a.kind},
                    {"size", a.size},
                    {"amplitude_mm", a.amplitude_mm},
                    {"spacing_mm", a.spacing_mm},
                    {"seed", a.seed},
                    {"landmarks", a.landmarks}});
  m.set("seed", a.seed);

  const Phantom ph = generate_phantom(spec);
  m.set("min_det", ph.min_det);
  fs::create_directories(a.out_dir);
  const std::pair<const char*, const Volume3D*> volumes[] = {
      {"fixed.json", &ph.fixed},
      {"moving.json", &ph.moving},
      {"mask.json", &ph.mask},
      {"true_disp_x.json", &ph.true_displacement[0]},
      {"true_disp_y.json", &ph.true_displacement[1]},
      {"true_disp_z.json", &ph.true_displacement[2]},
  };
  for (const auto& [name, v] : volumes) {
    save_volume(*v, a.out_dir / name);
    m.add_output(name);
  }
  save_landmarks(ph.landmarks_fixed, a.out_dir / "landmarks_fixed.csv");
  save_landmarks(ph.landmarks_moving, a.out_dir / "landmarks_moving.csv");
  m.add_output("landmarks_fixed.csv");
  m.add_output("landmarks_moving.csv");
  return kOk;
}

}  // namespace ccreg::cli
