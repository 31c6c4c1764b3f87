// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/evalharness.hpp"

#include "ccreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace ccreg {

TreStats tre(const LandmarkSet& est, const LandmarkSet& gt) {
  if (est.size() != gt.size()) {
    throw ContractError("tre: " + std::to_string(est.size()) + " estimated points vs " + std::to_string(gt.size()) +
                        " reference points");
  }
  TreStats s;
  s.per_point.reserve(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) s.per_point.push_back((est.points[i] - gt.points[i]).norm());
  if (s.per_point.empty()) return s;
  double sum = 0.0;
  for (double d : s.per_point) sum += d;
  s.mean = sum / static_cast<double>(s.per_point.size());
  double var = 0.0;
  for (double d : s.per_point) var += (d - s.mean) * (d - s.mean);
  s.std = std::sqrt(var / static_cast<double>(s.per_point.size()));
  return s;
}

double failure_rate(const std::vector<double>& mean_tre, double threshold_mm) {
  if (mean_tre.empty()) throw ContractError("failure_rate needs at least one run");
  const auto failed = std::count_if(mean_tre.begin(), mean_tre.end(), [&](double t) { return t > threshold_mm; });
  return static_cast<double>(failed) / static_cast<double>(mean_tre.size());
}

double median(std::vector<double> v) {
  if (v.empty()) throw ContractError("median of an empty sample");
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LandmarkSet propagation_consensus(const std::vector<LandmarkSet>& trajectories) {
  if (trajectories.size() < 3) throw ContractError("propagation_consensus needs at least three seeds");
  const std::size_t n = trajectories.front().size();
  for (const auto& t : trajectories) {
    if (t.size() != n) throw ContractError("propagation_consensus: trajectories differ in length");
  }
  LandmarkSet out;
  out.labels = trajectories.front().labels;
  out.points.resize(n);
  std::vector<double> col(trajectories.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      for (std::size_t s = 0; s < trajectories.size(); ++s) col[s] = trajectories[s].points[i][a];
      out.points[i][a] = median(col);
    }
  }
  return out;
}

std::vector<double> propagation_discrepancy(const std::vector<LandmarkSet>& trajectories,
                                            const LandmarkSet& consensus, const std::vector<int>& groups) {
  const std::size_t n = consensus.size();
  if (!groups.empty() && groups.size() != n) throw ContractError("propagation_discrepancy: group list length");
  std::vector<double> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (t.size() != n) throw ContractError("propagation_discrepancy: trajectory length differs from consensus");
    std::map<int, std::vector<double>> by_group;
    for (std::size_t i = 0; i < n; ++i) {
      by_group[groups.empty() ? 0 : groups[i]].push_back((t.points[i] - consensus.points[i]).norm());
    }
    double acc = 0.0;
    for (auto& [id, d] : by_group) acc += median(std::move(d));
    out.push_back(by_group.empty() ? 0.0 : acc / static_cast<double>(by_group.size()));
  }
  return out;
}

double uncertainty_correlation(const std::vector<double>& u, const std::vector<double>& e) {
  if (u.size() != e.size()) throw ContractError("uncertainty_correlation: sample sizes differ");
  if (u.size() < 3) throw ContractError("uncertainty_correlation needs at least three pairs");
  const double n = static_cast<double>(u.size());
  double mu = 0.0, me = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    me += e[i];
  }
  mu /= n;
  me /= n;
  double suu = 0.0, see = 0.0, sue = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    see += (e[i] - me) * (e[i] - me);
    sue += (u[i] - mu) * (e[i] - me);
  }
  if (!(suu > 0.0) || !(see > 0.0)) throw DomainError("correlation is undefined for a zero-variance sample");
  return std::clamp(sue / std::sqrt(suu * see), -1.0, 1.0);
}

}  // namespace ccreg
