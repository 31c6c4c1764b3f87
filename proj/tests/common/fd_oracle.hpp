// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference oracles shared by the unit and acceptance tests. Nothing
// here calls the library's derivative code.
#pragma once

#include "ccreg/rng.hpp"
#include "ccreg/siren.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace ccreg::test {

// Parameters in a fixed order: per layer, weight (column-major) then bias.
inline std::vector<double*> param_refs(SirenParams& p) {
  std::vector<double*> out;
  for (auto& l : p.layers) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) out.push_back(l.weight.data() + i);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out.push_back(l.bias.data() + i);
  }
  return out;
}

inline std::vector<double> flatten(const SirenGradients& g) {
  std::vector<double> out;
  for (const auto& l : g.layers) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return out;
}

// Central differences of `loss` over every entry of `targets`, restoring each entry afterwards.
inline std::vector<double> fd_gradient(const std::vector<double*>& targets, const std::function<double()>& loss,
                                       double h) {
  std::vector<double> g(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double& v = *targets[i];
    const double keep = v;
    v = keep + h;
    const double up = loss();
    v = keep - h;
    const double down = loss();
    v = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double l2(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// ||a - b|| / ||b||, with ||b|| floored at `floor`.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d) / std::max(l2(b), floor);
}

// Small random net whose displacement is large enough to make every loss term
// non-trivial: weights uniform in +-bound/sqrt(fan_in) with sine frequency omega0.
inline SirenParams random_net(int hidden, int width, Rng& rng, double omega0 = 3.0, double out_scale = 0.3) {
  SirenParams p;
  p.omega0 = omega0;
  int fan_in = 3;
  for (int l = 0; l <= hidden; ++l) {
    const int fan_out = l == hidden ? 3 : width;
    DenseLayer d;
    d.weight.resize(fan_out, fan_in);
    d.bias.resize(fan_out);
    const double bound = (l == hidden ? out_scale : 1.0) * std::sqrt(3.0 / fan_in);
    for (Eigen::Index i = 0; i < d.weight.size(); ++i) d.weight.data()[i] = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < d.bias.size(); ++i) d.bias[i] = rng.uniform(-0.5, 0.5);
    p.layers.push_back(std::move(d));
    fan_in = fan_out;
  }
  return p;
}

// Phi(x) = x + u(x) evaluated directly from the parameters (independent of eval_spatial).
inline Eigen::Vector3d reference_phi(const SirenParams& p, const Eigen::Vector3d& x) {
  Eigen::VectorXd h = x;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) {
    h = (p.omega0 * (p.layers[l].weight * h + p.layers[l].bias)).array().sin().matrix();
  }
  return x + p.layers.back().weight * h + p.layers.back().bias;
}

}  // namespace ccreg::test
