// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "ccreg/errors.hpp"
#include "ccreg/sweep.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace ccreg;

namespace {

const SweepInputs& tiny_inputs() {
  static const SweepInputs in = [] {
    PhantomSpec s;
    s.size = 16;
    s.amplitude_mm = 1.0;
    s.landmarks = 12;
    return phantom_inputs(generate_phantom(s));
  }();
  return in;
}

SweepOptions tiny_options(Strategy st) {
  SweepOptions o;
  o.strategy = st;
  o.base.epochs = 20;
  o.base.batch_per_inr = 64;
  o.base.net = {1, 8, 30.0};
  return o;
}

// Inputs sized for the three-landmark runs below.
SweepInputs fake_inputs() {
  SweepInputs in = tiny_inputs();
  in.landmark_groups = {0, 0, 1};
  return in;
}

SeedRun fake_run(std::uint64_t seed, double tre_value, double unc, bool failed) {
  SeedRun r;
  r.seed = seed;
  r.epochs = 10;
  r.mean_tre = tre_value;
  r.std_tre = 0.1;
  r.mean_tre_forward = tre_value * 1.1;
  r.mean_uncertainty = unc;
  r.failed = failed;
  r.final_loss = -1.5;
  r.per_point_tre = {tre_value - 0.5, tre_value, tre_value + 0.5};
  r.per_point_tre_forward = {1, 2, 3};
  r.per_point_uncertainty = {unc - 0.1, unc, unc + 0.2};
  r.trajectory.points = {Vec3(1, 2, 3), Vec3(4, 5, 6), Vec3(7, 8, 9 + tre_value)};
  return r;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("strategy names, parsing and configuration") {
  for (Strategy s : {Strategy::Jac, Strategy::Sjac, Strategy::Bend, Strategy::SjacCycle, Strategy::BendCycle}) {
    CHECK(parse_strategy(strategy_name(s)) == s);
  }
  CHECK(strategy_name(Strategy::SjacCycle) == "sjac+cycle");
  CHECK_THROWS_AS(parse_strategy("cycle"), ParameterError);

  const TrainConfig bend = apply_strategy(TrainConfig{}, Strategy::Bend);
  CHECK(bend.weights.reg_kind == RegKind::Bending);
  CHECK(bend.weights.alpha == 10.0);
  CHECK_FALSE(bend.cycle_enabled);
  const TrainConfig sc = apply_strategy(bend, Strategy::SjacCycle);
  CHECK(sc.weights.reg_kind == RegKind::SymmetricJacobian);
  CHECK(sc.weights.alpha == 0.05);
  CHECK(sc.cycle_enabled);
  CHECK(apply_strategy(TrainConfig{}, Strategy::Jac).weights.reg_kind == RegKind::Jacobian);
}

TEST_CASE("phantom inputs group landmarks by octant") {
  const SweepInputs& in = tiny_inputs();
  REQUIRE(in.landmark_groups.size() == in.landmarks_fixed.size());
  for (int g : in.landmark_groups) {
    CHECK(g >= 0);
    CHECK(g < 8);
  }
  CHECK(in.landmarks_moving.has_value());
}

TEST_CASE("seed result JSON round trips, including missing values") {
  SeedRun r = fake_run(7, 0.8125, 0.3, false);
  r.trajectory.points[0] = Vec3(0.1, 1.0 / 3.0, -2e-17);
  CHECK(seed_run_json(seed_run_from_json(seed_run_json(r))) == seed_run_json(r));
  const SeedRun back = seed_run_from_json(seed_run_json(r));
  CHECK(back.trajectory.points == r.trajectory.points);
  CHECK(back.per_point_uncertainty == r.per_point_uncertainty);

  SeedRun e;
  e.seed = 3;
  e.status = "error: boom";
  e.failed = true;
  e.final_loss = std::numeric_limits<double>::quiet_NaN();
  const SeedRun eb = seed_run_from_json(seed_run_json(e));
  CHECK_FALSE(eb.mean_tre.has_value());
  CHECK(std::isnan(eb.final_loss));
  CHECK(eb.status == "error: boom");
  CHECK_FALSE(eb.produced());

  CHECK_THROWS_AS(seed_run_from_json("{"), FormatError);
  CHECK_THROWS_AS(seed_run_from_json(R"({"seed": 1})"), FormatError);
}

TEST_CASE("summary: failures, means, consensus change, pooled correlation") {
  const SweepInputs in = fake_inputs();
  std::vector<SeedRun> runs{fake_run(0, 1.0, 0.2, false), fake_run(1, 1.5, 0.4, false), fake_run(2, 3.0, 2.0, true)};
  SeedRun err;
  err.seed = 3;
  err.status = "error: diverged";
  err.failed = true;
  runs.push_back(err);
  const SweepSummary s = summarize(runs, in, 2.0);
  CHECK(s.runs == 4);
  CHECK(s.produced == 3);
  CHECK(*s.failure_rate == doctest::Approx(0.5));  // one above threshold plus the error run
  CHECK(*s.mean_tre == doctest::Approx(5.5 / 3.0));
  CHECK(*s.mean_tre_forward == doctest::Approx(1.1 * 5.5 / 3.0));
  CHECK(*s.consensus_change_percent == doctest::Approx((1.0 - 1.1) / 1.1 * 100.0));
  CHECK(s.propagation_discrepancy.size() == 3);
  // Pooled over the two converged runs: u = (0.1 0.2 0.4 0.3 0.4 0.6), e = (0.5 1 1.5 1 1.5 2).
  const std::vector<double> u{0.1, 0.2, 0.4, 0.3, 0.4, 0.6}, e{0.5, 1.0, 1.5, 1.0, 1.5, 2.0};
  double mu = 0, me = 0;
  for (int i = 0; i < 6; ++i) {
    mu += u[i] / 6;
    me += e[i] / 6;
  }
  double sue = 0, suu = 0, see = 0;
  for (int i = 0; i < 6; ++i) {
    sue += (u[i] - mu) * (e[i] - me);
    suu += (u[i] - mu) * (u[i] - mu);
    see += (e[i] - me) * (e[i] - me);
  }
  CHECK(*s.landmark_correlation == doctest::Approx(sue / std::sqrt(suu * see)).epsilon(1e-12));
}

TEST_CASE("CSV tables") {
  std::vector<SeedRun> runs{fake_run(0, 1.0, 0.2, false), fake_run(4, 3.0, 2.0, true)};
  runs[1].truncated = true;
  const std::string ue = uncertainty_error_csv(runs);
  CHECK(ue.rfind("seed,point,truncated,uncertainty_mm,error_mm\n", 0) == 0);
  CHECK(std::count(ue.begin(), ue.end(), '\n') == 7);
  CHECK(ue.find("\n4,2,1,") != std::string::npos);

  SweepResult a;
  a.options.strategy = Strategy::Sjac;
  a.runs = runs;
  a.summary = summarize(runs, fake_inputs(), 2.0);
  const std::string ft = failure_table_csv({a});
  CHECK(ft.rfind("strategy,runs,failures,failure_rate,mean_tre_mm\nsjac,2,1,0.5,2\n", 0) == 0);
}

TEST_CASE("run_seed: training, truncation, captured errors, deterministic JSON") {
  const SweepInputs& in = tiny_inputs();
  const SweepOptions opt = tiny_options(Strategy::SjacCycle);
  const SeedRun a = run_seed(in, opt, 5);
  REQUIRE(a.produced());
  CHECK(a.epochs == 20);
  CHECK(a.mean_tre.has_value());
  CHECK(a.mean_uncertainty.has_value());
  CHECK(a.per_point_tre.size() == in.landmarks_fixed.size());
  CHECK(a.failed == (*a.mean_tre > 2.0));
  CHECK(seed_run_json(run_seed(in, opt, 5)) == seed_run_json(a));

  const SeedRun t = run_seed(in, opt, 5, true);
  CHECK(t.truncated);
  CHECK(t.epochs == 1);

  const SeedRun single = run_seed(in, tiny_options(Strategy::Bend), 5);
  REQUIRE(single.produced());
  CHECK_FALSE(single.mean_uncertainty.has_value());
  CHECK(single.mean_tre == single.mean_tre_forward);

  SweepInputs broken = in;
  broken.mask_fixed = Volume3D(in.mask_fixed.grid(), DType::UInt8);
  const SeedRun bad = run_seed(broken, opt, 5);
  CHECK_FALSE(bad.produced());
  CHECK(bad.failed);
  CHECK(bad.status.rfind("error: ", 0) == 0);
}

TEST_CASE("sweep JSON is stable and omits the per-run seed from the config") {
  SweepResult r;
  r.label = "demo";
  r.runs = {fake_run(0, 1.0, 0.2, false)};
  r.summary = summarize(r.runs, fake_inputs(), 2.0);
  const std::string text = sweep_json(r);
  CHECK(text == sweep_json(r));
  const auto j = nlohmann::json::parse(text);
  CHECK(j["strategy"] == "sjac+cycle");
  CHECK_FALSE(j["config"].contains("seed"));
  CHECK(j["runs"].size() == 1);
  CHECK(j["summary"]["produced"] == 1);
}

}  // TEST_SUITE
