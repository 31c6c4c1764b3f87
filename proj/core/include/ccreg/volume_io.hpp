// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/volume.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ccreg {

// On-disk volume format
// ---------------------
// `<name>.json` holds {"dims", "spacing", "origin", "dtype", "data", "order"} and
// `data` names a sibling raw payload: little-endian, z-major (x fastest),
// 4 bytes per voxel for float32, 1 byte per voxel for uint8.

/// Reads a header + payload pair. `path` is the JSON header.
Volume3D load_volume(const std::filesystem::path& path);

/// Writes `<path>` (JSON header) and `<path stem>.raw`. Output bytes are a pure function of `v`.
void save_volume(const Volume3D& v, const std::filesystem::path& path);

enum class LandmarkUnits { VoxelIndex, WorldMm };

/// Reads a CSV of x,y,z rows (optional 4th label column, `#` comments, blank lines).
/// In VoxelIndex mode each row is mapped to origin + index * spacing of `ref`.
LandmarkSet load_landmarks(const std::filesystem::path& path, LandmarkUnits units, const Grid& ref);
LandmarkSet parse_landmarks(std::string_view text, LandmarkUnits units, const Grid& ref);

/// Writes x,y,z[,extra columns...] rows in world mm with full double precision.
void save_landmarks(const LandmarkSet& lm, const std::filesystem::path& path,
                    std::span<const std::string> extra_headers = {},
                    std::span<const std::vector<double>> extra_columns = {});

}  // namespace ccreg
