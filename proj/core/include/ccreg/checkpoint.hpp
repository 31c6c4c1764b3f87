// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/siren.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace ccreg {

struct SirenCheckpointMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Network checkpoint layout in `dir`:
//   <name>.json            {"layer_sizes", "omega0", "seed", "config_hash", "payloads", "payload_hash"}
//   <name>.layer<L>.f64    weight (row-major, fan_out x fan_in) then bias, little-endian float64

/// Writes the manifest and payloads; returns the payload hash recorded in the manifest.
std::string save_siren(const SirenParams& p, const std::filesystem::path& dir, const std::string& name,
                       const SirenCheckpointMeta& meta);

/// Reads a checkpoint. Throws FormatError if shapes disagree with the manifest and
/// IoError if a payload is missing, short, or does not match the recorded hash.
SirenParams load_siren(const std::filesystem::path& dir, const std::string& name, SirenCheckpointMeta* meta = nullptr);

}  // namespace ccreg
