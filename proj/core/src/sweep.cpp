// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/sweep.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/evalharness.hpp"
#include "ccreg/trainer.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ccreg {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

ordered_json points_json(const LandmarkSet& lm) {
  ordered_json a = ordered_json::array();
  for (const Vec3& p : lm.points) a.push_back({p.x(), p.y(), p.z()});
  return a;
}

}  // namespace

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::Jac: return "jac";
    case Strategy::Sjac: return "sjac";
    case Strategy::Bend: return "bend";
    case Strategy::SjacCycle: return "sjac+cycle";
    case Strategy::BendCycle: return "bend+cycle";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view s) {
  for (Strategy k : {Strategy::Jac, Strategy::Sjac, Strategy::Bend, Strategy::SjacCycle, Strategy::BendCycle}) {
    if (s == strategy_name(k)) return k;
  }
  throw ParameterError("unknown strategy '" + std::string(s) + "' (jac, sjac, bend, sjac+cycle, bend+cycle)");
}

bool strategy_uses_cycle(Strategy s) noexcept { return s == Strategy::SjacCycle || s == Strategy::BendCycle; }

TrainConfig apply_strategy(TrainConfig cfg, Strategy s) {
  switch (s) {
    case Strategy::Jac: cfg.use_regularizer(RegKind::Jacobian); break;
    case Strategy::Sjac:
    case Strategy::SjacCycle: cfg.use_regularizer(RegKind::SymmetricJacobian); break;
    case Strategy::Bend:
    case Strategy::BendCycle: cfg.use_regularizer(RegKind::Bending); break;
  }
  cfg.cycle_enabled = strategy_uses_cycle(s);
  return cfg;
}

SweepInputs phantom_inputs(const Phantom& ph) {
  SweepInputs in{ph.fixed, ph.moving, ph.mask, ph.mask, ph.landmarks_fixed, ph.landmarks_moving, {}};
  // Octants around the mask center stand in for anatomical segments.
  const Vec3 c = ph.mask.grid().origin + 0.5 * ph.mask.grid().extent();
  for (const Vec3& p : ph.landmarks_fixed.points) {
    in.landmark_groups.push_back((p.x() > c.x() ? 1 : 0) + (p.y() > c.y() ? 2 : 0) + (p.z() > c.z() ? 4 : 0));
  }
  return in;
}

SeedRun run_seed(const SweepInputs& in, const SweepOptions& opt, std::uint64_t seed, bool truncated) {
  SeedRun r;
  r.seed = seed;
  r.truncated = truncated;
  TrainConfig cfg = apply_strategy(opt.base, opt.strategy);
  cfg.seed = seed;
  if (truncated) cfg.epochs = std::max(1, static_cast<int>(std::lround(cfg.epochs * opt.truncate_fraction)));
  r.epochs = cfg.epochs;
  try {
    const InrPair pair = cfg.cycle_enabled ? train_pair(in.fixed, in.moving, in.mask_fixed, in.mask_moving, cfg)
                                           : train_single(in.fixed, in.moving, in.mask_fixed, cfg);
    r.final_loss = pair.final_loss.total;
    const TransformedLandmarks tl = transform_landmarks(pair, in.landmarks_fixed, opt.inference);
    r.trajectory = tl.consensus;
    r.per_point_uncertainty = tl.uncertainty_mm;
    if (pair.paired()) r.mean_uncertainty = mean_of(tl.uncertainty_mm);
    if (in.landmarks_moving) {
      const TreStats mid = tre(tl.consensus, *in.landmarks_moving);
      const TreStats fwd = tre(tl.forward_only, *in.landmarks_moving);
      r.mean_tre = mid.mean;
      r.std_tre = mid.std;
      r.mean_tre_forward = fwd.mean;
      r.per_point_tre = mid.per_point;
      r.per_point_tre_forward = fwd.per_point;
      r.failed = mid.mean > opt.threshold_mm;
    }
  } catch (const std::exception& e) {
    r.status = std::string("error: ") + e.what();
    r.failed = true;
  }
  return r;
}

SweepSummary summarize(const std::vector<SeedRun>& runs, const SweepInputs& in, double threshold_mm) {
  SweepSummary s;
  s.runs = runs.size();
  std::vector<double> tres, fwd;
  std::vector<LandmarkSet> traj;
  std::vector<double> pooled_u, pooled_e;
  for (const SeedRun& r : runs) {
    if (!r.produced()) continue;
    ++s.produced;
    traj.push_back(r.trajectory);
    if (r.mean_tre) {
      tres.push_back(*r.mean_tre);
      fwd.push_back(*r.mean_tre_forward);
      if (!r.failed && r.mean_uncertainty) {
        pooled_u.insert(pooled_u.end(), r.per_point_uncertainty.begin(), r.per_point_uncertainty.end());
        pooled_e.insert(pooled_e.end(), r.per_point_tre.begin(), r.per_point_tre.end());
      }
    }
  }
  if (in.landmarks_moving && !runs.empty()) {
    // A run without a result counts as a failure.
    std::vector<double> all;
    for (const SeedRun& r : runs) all.push_back(r.mean_tre.value_or(std::numeric_limits<double>::infinity()));
    s.failure_rate = failure_rate(all, threshold_mm);
  }
  if (!tres.empty()) {
    s.mean_tre = mean_of(tres);
    s.mean_tre_forward = mean_of(fwd);
    if (*s.mean_tre_forward > 0.0) s.consensus_change_percent = (*s.mean_tre - *s.mean_tre_forward) / *s.mean_tre_forward * 100.0;
  }
  if (traj.size() >= 3) {
    s.propagation_discrepancy = propagation_discrepancy(traj, propagation_consensus(traj), in.landmark_groups);
  }
  if (pooled_u.size() >= 3) {
    try {
      s.landmark_correlation = uncertainty_correlation(pooled_u, pooled_e);
    } catch (const DomainError&) {
    }
  }
  return s;
}

std::string seed_run_json(const SeedRun& r) {
  ordered_json j;
  j["seed"] = r.seed;
  j["status"] = r.status;
  j["truncated"] = r.truncated;
  j["epochs"] = r.epochs;
  j["mean_tre"] = opt_json(r.mean_tre);
  j["std_tre"] = opt_json(r.std_tre);
  j["mean_tre_forward"] = opt_json(r.mean_tre_forward);
  j["mean_uncertainty"] = opt_json(r.mean_uncertainty);
  j["failed"] = r.failed;
  j["final_loss"] = std::isfinite(r.final_loss) ? ordered_json(r.final_loss) : ordered_json(nullptr);
  j["per_point_tre"] = r.per_point_tre;
  j["per_point_tre_forward"] = r.per_point_tre_forward;
  j["per_point_uncertainty"] = r.per_point_uncertainty;
  j["trajectory"] = points_json(r.trajectory);
  return j.dump();
}

SeedRun seed_run_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("seed result: ") + e.what());
  }
  SeedRun r;
  try {
    r.seed = j.at("seed").get<std::uint64_t>();
    r.status = j.at("status").get<std::string>();
    r.truncated = j.at("truncated").get<bool>();
    r.epochs = j.at("epochs").get<int>();
    r.mean_tre = opt_from(j.at("mean_tre"));
    r.std_tre = opt_from(j.at("std_tre"));
    r.mean_tre_forward = opt_from(j.at("mean_tre_forward"));
    r.mean_uncertainty = opt_from(j.at("mean_uncertainty"));
    r.failed = j.at("failed").get<bool>();
    r.final_loss = opt_from(j.at("final_loss")).value_or(std::numeric_limits<double>::quiet_NaN());
    r.per_point_tre = j.at("per_point_tre").get<std::vector<double>>();
    r.per_point_tre_forward = j.at("per_point_tre_forward").get<std::vector<double>>();
    r.per_point_uncertainty = j.at("per_point_uncertainty").get<std::vector<double>>();
    for (const auto& p : j.at("trajectory")) {
      r.trajectory.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("seed result: ") + e.what());
  }
  return r;
}

std::string sweep_json(const SweepResult& r) {
  ordered_json j;
  j["label"] = r.label;
  j["strategy"] = std::string(strategy_name(r.options.strategy));
  j["config"] = ordered_json::parse(config_to_json(apply_strategy(r.options.base, r.options.strategy), -1));
  j["config"].erase("seed");
  j["threshold_mm"] = r.options.threshold_mm;
  j["truncate_fraction"] = r.options.truncate_fraction;
  ordered_json runs = ordered_json::array();
  for (const SeedRun& s : r.runs) runs.push_back(ordered_json::parse(seed_run_json(s)));
  j["runs"] = std::move(runs);
  const SweepSummary& s = r.summary;
  ordered_json sum;
  sum["runs"] = s.runs;
  sum["produced"] = s.produced;
  sum["failure_rate"] = opt_json(s.failure_rate);
  sum["mean_tre"] = opt_json(s.mean_tre);
  sum["mean_tre_forward"] = opt_json(s.mean_tre_forward);
  sum["consensus_change_percent"] = opt_json(s.consensus_change_percent);
  sum["propagation_discrepancy"] = s.propagation_discrepancy;
  sum["landmark_correlation"] = opt_json(s.landmark_correlation);
  j["summary"] = std::move(sum);
  return j.dump(2) + "\n";
}

std::string uncertainty_error_csv(const std::vector<SeedRun>& runs) {
  std::ostringstream os;
  os.precision(17);
  os << "seed,point,truncated,uncertainty_mm,error_mm\n";
  for (const SeedRun& r : runs) {
    if (!r.produced() || r.per_point_uncertainty.empty() || r.per_point_tre.empty()) continue;
    for (std::size_t i = 0; i < r.per_point_tre.size(); ++i) {
      os << r.seed << ',' << i << ',' << (r.truncated ? 1 : 0) << ',' << r.per_point_uncertainty[i] << ','
         << r.per_point_tre[i] << '\n';
    }
  }
  return os.str();
}

std::string failure_table_csv(const std::vector<SweepResult>& sweeps) {
  std::ostringstream os;
  os.precision(17);
  os << "strategy,runs,failures,failure_rate,mean_tre_mm\n";
  for (const SweepResult& s : sweeps) {
    std::size_t failures = 0;
    for (const SeedRun& r : s.runs) failures += r.failed ? 1 : 0;
    os << strategy_name(s.options.strategy) << ',' << s.runs.size() << ',' << failures << ',';
    if (s.summary.failure_rate) os << *s.summary.failure_rate;
    os << ',';
    if (s.summary.mean_tre) os << *s.summary.mean_tre;
    os << '\n';
  }
  return os.str();
}

}  // namespace ccreg
