// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/volume.hpp"

#include <cstddef>
#include <vector>

namespace ccreg {

struct TreStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::vector<double> per_point;
};

/// Point-by-point Euclidean distances in mm. Order matters: est[i] is compared with gt[i].
TreStats tre(const LandmarkSet& est, const LandmarkSet& gt);

/// Fraction of runs whose mean TRE is strictly above the threshold.
double failure_rate(const std::vector<double>& mean_tre, double threshold_mm = 2.0);

/// Coordinate-wise median across seeds for every point. For an even number of
/// seeds the two middle values are averaged. Needs at least three seeds.
LandmarkSet propagation_consensus(const std::vector<LandmarkSet>& trajectories);

/// Per seed: the median point-to-consensus distance within each group, then
/// the mean over groups. `groups[i]` is the group id of point i; empty means
/// one group holding every point.
std::vector<double> propagation_discrepancy(const std::vector<LandmarkSet>& trajectories,
                                            const LandmarkSet& consensus,
                                            const std::vector<int>& groups = {});

/// Pearson r. Needs at least three pairs; throws DomainError when either side
/// has zero variance.
double uncertainty_correlation(const std::vector<double>& uncertainty, const std::vector<double>& error);

/// Median of a non-empty sample (mean of the middle two for even sizes).
double median(std::vector<double> v);

}  // namespace ccreg
