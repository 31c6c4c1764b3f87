// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "ccreg/errors.hpp"
#include "ccreg/inference.hpp"
#include "ccreg/phantom.hpp"
#include "ccreg/trainer.hpp"
#include "ccreg/volume_io.hpp"
#include "fd_oracle.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>

using namespace ccreg;

namespace {

const Phantom& small_phantom() {
  static const Phantom ph = [] {
    PhantomSpec s;
    s.size = 24;
    s.amplitude_mm = 1.5;
    s.landmarks = 20;
    return generate_phantom(s);
  }();
  return ph;
}

TrainConfig small_config(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_per_inr = 256;
  c.net = {2, 32, 30.0};
  c.lr = 1e-4;
  c.seed = 3;
  return c;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("self-registration stays at the identity") {
  const Phantom& ph = small_phantom();
  const InrPair pair = train_pair(ph.fixed, ph.fixed, ph.mask, ph.mask, small_config(100));
  const ForegroundSampler fg(ph.mask, pair.t_target);
  Coords x(3, static_cast<Eigen::Index>(fg.foreground_count()));
  for (std::size_t i = 0; i < fg.foreground_count(); ++i) {
    x.col(static_cast<Eigen::Index>(i)) = pair.t_target.to_norm(ph.mask.grid().voxel_center(fg.voxels()[i]));
  }
  const SpatialBatch ev = eval_spatial(pair.forward, x, 0);
  const double mean_disp = (ev.phi - x).colwise().norm().mean();
  MESSAGE("mean |u_F| over foreground: " << mean_disp);
  CHECK(mean_disp < 0.01);
}

TEST_CASE("same seed, same inputs: bit-identical pair") {
  const Phantom& ph = small_phantom();
  const TrainConfig c = small_config(15);
  const InrPair a = train_pair(ph.fixed, ph.moving, ph.mask, ph.mask, c);
  const InrPair b = train_pair(ph.fixed, ph.moving, ph.mask, ph.mask, c);
  CHECK(a.forward == b.forward);
  CHECK(*a.backward == *b.backward);
  CHECK(a.loss_curve == b.loss_curve);
  TrainConfig other = c;
  other.seed = 4;
  CHECK_FALSE(train_pair(ph.fixed, ph.moving, ph.mask, ph.mask, other).forward == a.forward);
}

TEST_CASE("both networks move every epoch and the breakdown is consistent") {
  const Phantom& ph = small_phantom();
  std::vector<EpochRecord> recs;
  const TrainConfig c = small_config(10);
  const InrPair pair =
      train_pair(ph.fixed, ph.moving, ph.mask, ph.mask, c, [&](const EpochRecord& r) { recs.push_back(r); });
  REQUIRE(recs.size() == 10);
  for (const auto& r : recs) {
    CHECK(r.update_norm_forward > 0.0);
    CHECK(r.update_norm_backward > 0.0);
    REQUIRE(r.loss.cycle_fb.has_value());
    REQUIRE(r.loss.cycle_bf.has_value());
    CHECK(std::abs(total_loss(r.loss, c.weights).total - r.loss.total) < 1e-12);
  }
  CHECK(pair.final_loss.total == recs.back().loss.total);
  CHECK(pair.config_hash == config_hash(c));
}

TEST_CASE("single network: cycle terms absent, reproducible") {
  const Phantom& ph = small_phantom();
  TrainConfig c = small_config(10);
  c.weights.beta = 0.5;  // ignored
  const InrPair a = train_single(ph.fixed, ph.moving, ph.mask, c);
  const InrPair b = train_single(ph.fixed, ph.moving, ph.mask, c);
  CHECK_FALSE(a.paired());
  CHECK_FALSE(a.final_loss.cycle_fb.has_value());
  CHECK_FALSE(a.final_loss.cycle_bf.has_value());
  CHECK_FALSE(a.final_loss.data_b.has_value());
  CHECK(a.config.weights.beta == 0.0);
  CHECK(a.forward == b.forward);
}

TEST_CASE("total loss trends down on a phantom") {
  const Phantom& ph = small_phantom();
  TrainConfig c = small_config(200);
  c.lr = 5e-4;
  const InrPair pair = train_pair(ph.fixed, ph.moving, ph.mask, ph.mask, c);
  const auto& lc = pair.loss_curve;
  const std::size_t tenth = lc.size() / 10;
  const double first = median_of({lc.begin(), lc.begin() + static_cast<std::ptrdiff_t>(tenth)});
  const double last = median_of({lc.end() - static_cast<std::ptrdiff_t>(tenth), lc.end()});
  MESSAGE("median loss, first vs last 10%: " << first << " -> " << last);
  CHECK(last < first);
}

TEST_CASE("empty mask and non-finite inputs") {
  const Phantom& ph = small_phantom();
  const Volume3D empty(ph.mask.grid(), DType::UInt8);
  CHECK_THROWS_AS(train_pair(ph.fixed, ph.moving, empty, ph.mask, small_config(2)), DomainError);
  CHECK_THROWS_AS(train_pair(ph.fixed, ph.moving, ph.mask, empty, small_config(2)), DomainError);
  CHECK_THROWS_AS(train_single(ph.fixed, ph.moving, empty, small_config(2)), DomainError);

  Volume3D bad = ph.fixed;
  for (std::size_t i = 0; i < bad.size(); ++i) bad[i] = std::nanf("");
  try {
    train_pair(bad, ph.moving, ph.mask, ph.mask, small_config(3));
    FAIL("expected TrainingAborted");
  } catch (const TrainingAborted& e) {
    CHECK(e.epoch() == 0);
    CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
    CHECK_FALSE(e.loss().all_finite());
  }
}

TEST_CASE("objective: unselected terms leave total and gradients") {
  const Phantom& ph = small_phantom();
  const RegistrationImages img{ph.fixed, ph.moving, make_norm_transform(ph.fixed.grid(), false),
                               make_norm_transform(ph.moving.grid(), false)};
  Rng rng(5);
  const SirenParams f = test::random_net(2, 8, rng, 3.0, 0.05);
  const SirenParams b = test::random_net(2, 8, rng, 3.0, 0.05);
  Coords xt(3, 12), xs(3, 12);
  for (int i = 0; i < 12; ++i) {
    xt.col(i) = test::random_vec(rng, -0.3, 0.3);
    xs.col(i) = test::random_vec(rng, -0.3, 0.3);
  }
  const LossWeights w;
  const ObjectiveResult all = evaluate_objective(img, f, &b, xt, &xs, w, true);
  CHECK(std::abs(total_loss(all.loss, w).total - all.loss.total) < 1e-12);

  TermSelection none{false, false, false, false, false, false};
  const ObjectiveResult nothing = evaluate_objective(img, f, &b, xt, &xs, w, true, none);
  CHECK(nothing.loss.total == 0.0);
  CHECK(nothing.grad_forward.squared_norm() == 0.0);
  CHECK(nothing.grad_backward->squared_norm() == 0.0);
  CHECK(nothing.loss.data_f == all.loss.data_f);  // still reported

  // Each term alone sums back to the full gradient.
  SirenGradients sum_f = SirenGradients::zeros_like(f);
  for (int t = 0; t < 6; ++t) {
    TermSelection one = none;
    bool* flags[] = {&one.data_f, &one.data_b, &one.reg_f, &one.reg_b, &one.cycle_fb, &one.cycle_bf};
    *flags[t] = true;
    sum_f += evaluate_objective(img, f, &b, xt, &xs, w, true, one).grad_forward;
  }
  const auto a = test::flatten(sum_f);
  CHECK(test::relative_error(a, test::flatten(all.grad_forward)) < 1e-12);

  CHECK_THROWS_AS(evaluate_objective(img, f, &b, xt, nullptr, w, true), ContractError);
}

TEST_CASE("checkpointed pair reproduces dense fields bit-exactly") {
  const Phantom& ph = small_phantom();
  const InrPair pair = train_pair(ph.fixed, ph.moving, ph.mask, ph.mask, small_config(5));
  const auto dir = test::scratch_dir("pair_ckpt");
  save_pair(pair, dir);
  const InrPair back = load_pair(dir);
  CHECK(back.forward == pair.forward);
  CHECK(*back.backward == *pair.backward);
  CHECK(back.t_source == pair.t_source);
  CHECK(back.t_target == pair.t_target);
  CHECK(back.seed == pair.seed);
  CHECK(back.final_loss.total == pair.final_loss.total);
  const DenseField a = dense_field(pair, ph.fixed.grid(), &ph.mask);
  const DenseField b = dense_field(back, ph.fixed.grid(), &ph.mask);
  for (int k = 0; k < 3; ++k) CHECK(a.displacement[k] == b.displacement[k]);
  CHECK(a.uncertainty == b.uncertainty);

  // A tampered config no longer matches its recorded hash.
  std::string text = test::read_bytes(dir / "pair.json");
  const auto pos = text.find("\"epochs\": 5");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "\"epochs\": 6");
  test::write_text(dir / "pair.json", text);
  CHECK_THROWS_AS(load_pair(dir), IoError);
}

TEST_CASE("metrics line carries the epoch and six components") {
  EpochRecord r;
  r.epoch = 7;
  r.loss.data_f = -0.5;
  r.loss.data_b = -0.4;
  r.loss.reg_f = 0.1;
  r.loss.reg_b = 0.2;
  r.loss.cycle_fb = 0.01;
  r.loss.cycle_bf = 0.02;
  r.loss.total = -0.9;
  const std::string line = epoch_record_json(r);
  CHECK(line.find('\n') == std::string::npos);
  for (const char* key : {"\"epoch\":7", "data_f", "data_b", "reg_f", "reg_b", "cycle_fb", "cycle_bf", "total"}) {
    CAPTURE(key);
    CHECK(line.find(key) != std::string::npos);
  }
}

}  // TEST_SUITE
