// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/trainer.hpp"

#include "ccreg/checkpoint.hpp"
#include "ccreg/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ccreg {
namespace {

using nlohmann::json;

// Stream ids for Rng::split; the forward network and its batches use the same
// ids in paired and single runs so the two are comparable seed by seed.
constexpr std::uint64_t kInitForward = 1;
constexpr std::uint64_t kInitBackward = 2;
constexpr std::uint64_t kBatchTarget = 3;
constexpr std::uint64_t kBatchSource = 4;

double update_norm(const SirenParams& before, const SirenParams& after) {
  double acc = 0.0;
  for (std::size_t l = 0; l < before.layers.size(); ++l) {
    acc += (after.layers[l].weight - before.layers[l].weight).squaredNorm();
    acc += (after.layers[l].bias - before.layers[l].bias).squaredNorm();
  }
  return std::sqrt(acc);
}

std::string describe(const LossBreakdown& b) { return loss_breakdown_json(b); }

void check_inputs(const Volume3D& fixed, const Volume3D& moving, const Volume3D& mask_fixed,
                  const Volume3D* mask_moving) {
  require_mask_for(mask_fixed, fixed, "fixed mask");
  if (mask_moving) require_mask_for(*mask_moving, moving, "moving mask");
  if (mask_fixed.count_nonzero() == 0) throw DomainError("fixed foreground mask is empty");
  if (mask_moving && mask_moving->count_nonzero() == 0) throw DomainError("moving foreground mask is empty");
}

// Forward-direction terms shared by paired and single training.
struct DirectionTerms {
  SpatialBatch eval;
  SirenTape tape;
  double data = 0.0;
  double reg = 0.0;
  SpatialAdjoint adjoint;
};

DirectionTerms direction_terms(const SirenParams& net, const Coords& x, const Volume3D& from_img,
                               const Volume3D& to_img, const NormTransform& t_from, const NormTransform& t_to,
                               const LossWeights& w, bool use_data, bool use_reg) {
  const int order = required_order(w.reg_kind);
  DirectionTerms d;
  d.eval = eval_spatial(net, x, order, &d.tape);
  const LossWithAdjoint data = data_loss(from_img, to_img, x, d.eval, t_from, t_to);
  const LossWithAdjoint reg = regularizer_loss(d.eval, w);
  d.data = data.value;
  d.reg = reg.value;
  d.adjoint = SpatialAdjoint::zeros(order, x.cols());
  if (use_data) accumulate(d.adjoint, data.adjoint, 1.0);
  if (use_reg && w.alpha != 0.0) accumulate(d.adjoint, reg.adjoint, w.alpha);
  return d;
}

}  // namespace

std::string loss_breakdown_json(const LossBreakdown& b) {
  json j;
  j["data_f"] = b.data_f;
  j["reg_f"] = b.reg_f;
  j["data_b"] = b.data_b ? json(*b.data_b) : json(nullptr);
  j["reg_b"] = b.reg_b ? json(*b.reg_b) : json(nullptr);
  j["cycle_fb"] = b.cycle_fb ? json(*b.cycle_fb) : json(nullptr);
  j["cycle_bf"] = b.cycle_bf ? json(*b.cycle_bf) : json(nullptr);
  j["total"] = b.total;
  return j.dump();
}

std::string epoch_record_json(const EpochRecord& r) {
  json j = json::parse(loss_breakdown_json(r.loss));
  j["epoch"] = r.epoch;
  return j.dump();
}

ObjectiveResult evaluate_objective(const RegistrationImages& img, const SirenParams& fwd, const SirenParams* bwd,
                                   const Coords& xt, const Coords* xs, const LossWeights& w, bool cycle,
                                   const TermSelection& sel) {
  if ((bwd == nullptr) != (xs == nullptr)) throw ContractError("evaluate_objective: backward network needs its batch");
  if (!bwd) cycle = false;

  // Phi_F on target samples: fixed at x, moving at Phi_F(x). Phi_B mirrors it.
  DirectionTerms f = direction_terms(fwd, xt, img.fixed, img.moving, img.t_target, img.t_source, w, sel.data_f,
                                     sel.reg_f);
  std::optional<DirectionTerms> b;
  if (bwd) {
    b = direction_terms(*bwd, *xs, img.moving, img.fixed, img.t_source, img.t_target, w, sel.data_b, sel.reg_b);
  }

  ObjectiveResult r;
  r.loss.data_f = f.data;
  r.loss.reg_f = f.reg;
  if (b) {
    r.loss.data_b = b->data;
    r.loss.reg_b = b->reg;
  }
  r.grad_forward = SirenGradients::zeros_like(fwd);
  if (bwd) r.grad_backward = SirenGradients::zeros_like(*bwd);

  if (cycle) {
    // F -> B: Phi_B(Phi_F(x_t)) ~ x_t; B -> F: Phi_F(Phi_B(x_s)) ~ x_s.
    const bool grad_fb = w.beta > 0.0 && sel.cycle_fb;
    const bool grad_bf = w.beta > 0.0 && sel.cycle_bf;
    SirenTape tape_fb, tape_bf;
    const SpatialBatch b_of_f = eval_spatial(*bwd, f.eval.phi, 0, grad_fb ? &tape_fb : nullptr);
    const SpatialBatch f_of_b = eval_spatial(fwd, b->eval.phi, 0, grad_bf ? &tape_bf : nullptr);
    const CycleResidual fb = cycle_residual(xt, b_of_f.phi);
    const CycleResidual bf = cycle_residual(*xs, f_of_b.phi);
    r.loss.cycle_fb = fb.value;
    r.loss.cycle_bf = bf.value;
    SpatialAdjoint outer = SpatialAdjoint::zeros(0, 0);
    Coords y_adj;
    if (grad_fb) {
      outer.phi = w.beta * fb.adjoint;
      *r.grad_backward += param_gradients(*bwd, tape_fb, outer, &y_adj);
      f.adjoint.phi += y_adj;
    }
    if (grad_bf) {
      outer.phi = w.beta * bf.adjoint;
      r.grad_forward += param_gradients(fwd, tape_bf, outer, &y_adj);
      b->adjoint.phi += y_adj;
    }
  }

  // Total over the selected terms only; the breakdown keeps every value.
  LossBreakdown selected = r.loss;
  if (!sel.data_f) selected.data_f = 0.0;
  if (!sel.reg_f) selected.reg_f = 0.0;
  if (selected.data_b && !sel.data_b) selected.data_b = 0.0;
  if (selected.reg_b && !sel.reg_b) selected.reg_b = 0.0;
  if (selected.cycle_fb && !sel.cycle_fb) selected.cycle_fb = 0.0;
  if (selected.cycle_bf && !sel.cycle_bf) selected.cycle_bf = 0.0;
  r.loss.total = total_loss(selected, w).total;
  if (!r.loss.all_finite()) return r;  // caller reports; gradients would be meaningless

  r.grad_forward += param_gradients(fwd, f.tape, f.adjoint);
  if (b) *r.grad_backward += param_gradients(*bwd, b->tape, b->adjoint);
  return r;
}

InrPair train_pair(const Volume3D& fixed, const Volume3D& moving, const Volume3D& mask_fixed,
                   const Volume3D& mask_moving, const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  check_inputs(fixed, moving, mask_fixed, &mask_moving);

  InrPair pair;
  pair.config = cfg;
  pair.config_hash = config_hash(cfg);
  pair.seed = cfg.seed;
  pair.t_target = make_norm_transform(fixed.grid(), cfg.isotropic_coords);
  pair.t_source = make_norm_transform(moving.grid(), cfg.isotropic_coords);
  const RegistrationImages img{fixed, moving, pair.t_target, pair.t_source};

  const Rng root(cfg.seed);
  Rng init_f = root.split(kInitForward);
  Rng init_b = root.split(kInitBackward);
  pair.forward = init_siren(cfg.net, init_f);
  pair.backward = init_siren(cfg.net, init_b);
  SirenParams& fwd = pair.forward;
  SirenParams& bwd = *pair.backward;

  const ForegroundSampler target_sampler(mask_fixed, pair.t_target);
  const ForegroundSampler source_sampler(mask_moving, pair.t_source);
  AdamState adam_f = AdamState::for_params(fwd);
  AdamState adam_b = AdamState::for_params(bwd);
  pair.loss_curve.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto stream = static_cast<std::uint64_t>(cfg.reuse_samples ? 0 : epoch);
    Rng rng_t = root.split(kBatchTarget).split(stream);
    Rng rng_s = root.split(kBatchSource).split(stream);
    const CoordBatch xt = target_sampler.sample(cfg.batch_per_inr, rng_t, Domain::Target);
    const CoordBatch xs = source_sampler.sample(cfg.batch_per_inr, rng_s, Domain::Source);

    const ObjectiveResult obj =
        evaluate_objective(img, fwd, &bwd, xt.coords, &xs.coords, cfg.weights, cfg.cycle_enabled);
    const LossBreakdown& loss = obj.loss;
    if (!loss.all_finite()) {
      throw TrainingAborted("non-finite loss at epoch " + std::to_string(epoch) + ": " + describe(loss), epoch, loss);
    }

    EpochRecord rec{epoch, loss, 0.0, 0.0};
    const SirenParams before_f = observer ? fwd : SirenParams{};
    const SirenParams before_b = observer ? bwd : SirenParams{};
    try {
      adam_step(fwd, obj.grad_forward, adam_f, cfg.lr);
      adam_step(bwd, *obj.grad_backward, adam_b, cfg.lr);
    } catch (const NumericalError& e) {
      throw TrainingAborted(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ": " + describe(loss),
                            epoch, loss);
    }
    pair.loss_curve.push_back(loss.total);
    pair.final_loss = loss;
    if (observer) {
      rec.update_norm_forward = update_norm(before_f, fwd);
      rec.update_norm_backward = update_norm(before_b, bwd);
      observer(rec);
    }
  }
  return pair;
}

InrPair train_single(const Volume3D& fixed, const Volume3D& moving, const Volume3D& mask_fixed, const TrainConfig& cfg,
                     const EpochObserver& observer) {
  TrainConfig c = cfg;
  c.weights.beta = 0.0;
  c.cycle_enabled = false;
  c.validate();
  check_inputs(fixed, moving, mask_fixed, nullptr);

  InrPair single;
  single.config = c;
  single.config_hash = config_hash(c);
  single.seed = c.seed;
  single.t_target = make_norm_transform(fixed.grid(), c.isotropic_coords);
  single.t_source = make_norm_transform(moving.grid(), c.isotropic_coords);
  const RegistrationImages img{fixed, moving, single.t_target, single.t_source};

  const Rng root(c.seed);
  Rng init_f = root.split(kInitForward);
  single.forward = init_siren(c.net, init_f);
  SirenParams& fwd = single.forward;
  const ForegroundSampler target_sampler(mask_fixed, single.t_target);
  AdamState adam = AdamState::for_params(fwd);
  single.loss_curve.reserve(static_cast<std::size_t>(c.epochs));

  for (int epoch = 0; epoch < c.epochs; ++epoch) {
    const auto stream = static_cast<std::uint64_t>(c.reuse_samples ? 0 : epoch);
    Rng rng_t = root.split(kBatchTarget).split(stream);
    const CoordBatch xt = target_sampler.sample(c.batch_per_inr, rng_t, Domain::Target);
    const ObjectiveResult obj = evaluate_objective(img, fwd, nullptr, xt.coords, nullptr, c.weights, false);
    const LossBreakdown& loss = obj.loss;
    if (!loss.all_finite()) {
      throw TrainingAborted("non-finite loss at epoch " + std::to_string(epoch) + ": " + describe(loss), epoch, loss);
    }
    const SirenParams before = observer ? fwd : SirenParams{};
    try {
      adam_step(fwd, obj.grad_forward, adam, c.lr);
    } catch (const NumericalError& e) {
      throw TrainingAborted(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ": " + describe(loss),
                            epoch, loss);
    }
    single.loss_curve.push_back(loss.total);
    single.final_loss = loss;
    if (observer) observer({epoch, loss, update_norm(before, fwd), 0.0});
  }
  return single;
}

namespace {

json transform_json(const NormTransform& t) {
  return {{"scale", {t.scale[0], t.scale[1], t.scale[2]}},
          {"offset", {t.offset[0], t.offset[1], t.offset[2]}},
          {"padded_extent", {t.padded_extent[0], t.padded_extent[1], t.padded_extent[2]}}};
}

NormTransform transform_from(const json& j) {
  auto v3 = [](const json& a) { return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()); };
  NormTransform t;
  t.scale = v3(j.at("scale"));
  t.offset = v3(j.at("offset"));
  t.padded_extent = v3(j.at("padded_extent"));
  return t;
}

std::optional<double> opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

void save_pair(const InrPair& pair, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SirenCheckpointMeta meta{pair.seed, pair.config_hash};
  json j;
  j["kind"] = pair.paired() ? "pair" : "single";
  j["forward_hash"] = save_siren(pair.forward, dir, "forward", meta);
  if (pair.paired()) j["backward_hash"] = save_siren(*pair.backward, dir, "backward", meta);
  j["t_source"] = transform_json(pair.t_source);
  j["t_target"] = transform_json(pair.t_target);
  j["config"] = json::parse(config_to_json(pair.config));
  j["config_hash"] = pair.config_hash;
  j["seed"] = pair.seed;
  j["final_loss"] = json::parse(loss_breakdown_json(pair.final_loss));
  j["rng_algorithm"] = std::string(Rng::kAlgorithm);
  std::ofstream out(dir / "pair.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "pair.json").string());
  out << j.dump(2) << '\n';
}

InrPair load_pair(const std::filesystem::path& dir) {
  std::ifstream in(dir / "pair.json");
  if (!in) throw IoError("cannot open " + (dir / "pair.json").string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError((dir / "pair.json").string() + ": " + e.what());
  }
  InrPair pair;
  try {
    pair.config = config_from_json(j.at("config").dump());
    pair.config_hash = j.at("config_hash").get<std::string>();
    pair.seed = j.at("seed").get<std::uint64_t>();
    pair.t_source = transform_from(j.at("t_source"));
    pair.t_target = transform_from(j.at("t_target"));
    const json& fl = j.at("final_loss");
    pair.final_loss.data_f = fl.at("data_f").get<double>();
    pair.final_loss.reg_f = fl.at("reg_f").get<double>();
    pair.final_loss.data_b = opt(fl, "data_b");
    pair.final_loss.reg_b = opt(fl, "reg_b");
    pair.final_loss.cycle_fb = opt(fl, "cycle_fb");
    pair.final_loss.cycle_bf = opt(fl, "cycle_bf");
    pair.final_loss.total = fl.at("total").get<double>();
  } catch (const json::exception& e) {
    throw FormatError((dir / "pair.json").string() + ": " + e.what());
  }
  if (config_hash(pair.config) != pair.config_hash) {
    throw IoError((dir / "pair.json").string() + ": config hash does not match recorded config");
  }
  auto check = [&](const std::string& name, const std::string& key) {
    SirenCheckpointMeta meta;
    SirenParams p = load_siren(dir, name, &meta);
    const std::string expected = j.value(key, std::string{});
    std::ifstream min(dir / (name + ".json"));
    json mj;
    min >> mj;
    if (mj.value("payload_hash", std::string{}) != expected) {
      throw IoError(name + " checkpoint hash does not match pair.json");
    }
    if (meta.config_hash != pair.config_hash) throw IoError(name + " checkpoint config hash does not match pair.json");
    return p;
  };
  pair.forward = check("forward", "forward_hash");
  if (j.value("kind", std::string{"pair"}) == "pair") pair.backward = check("backward", "backward_hash");
  return pair;
}

}  // namespace ccreg
