// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/config.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/hash.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace ccreg {
namespace {

using nlohmann::json;

json to_json_object(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["batch_per_inr"] = c.batch_per_inr;
  j["alpha"] = c.weights.alpha;
  j["beta"] = c.weights.beta;
  j["tau"] = c.weights.tau;
  j["reg_kind"] = std::string(reg_kind_name(c.weights.reg_kind));
  j["hidden_layers"] = c.net.hidden_layers;
  j["width"] = c.net.width;
  j["omega0"] = c.net.omega0;
  j["seed"] = c.seed;
  j["cycle_enabled"] = c.cycle_enabled;
  j["isotropic_coords"] = c.isotropic_coords;
  j["reuse_samples"] = c.reuse_samples;
  return j;
}

}  // namespace

TrainConfig& TrainConfig::use_regularizer(RegKind k) {
  weights.reg_kind = k;
  weights.alpha = default_alpha(k);
  return *this;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ContractError("epochs must be >= 0");
  if (batch_per_inr < 2) throw ContractError("batch_per_inr must be >= 2");
  if (!(lr > 0.0)) throw ContractError("learning rate must be > 0");
  if (net.hidden_layers < 1 || net.width < 1) throw ContractError("network layer counts must be positive");
  if (!(net.omega0 > 0.0)) throw ContractError("omega0 must be > 0");
  weights.validate();
}

std::string config_to_json(const TrainConfig& c, int indent) { return to_json_object(c).dump(indent); }

TrainConfig config_from_json(std::string_view text, TrainConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what(), 1);
  }
  if (!j.is_object()) throw ContractError("config must be a JSON object");
  static const std::set<std::string> known{"epochs", "lr",    "batch_per_inr", "alpha",  "beta",
                                           "tau",    "reg_kind", "hidden_layers", "width", "omega0",
                                           "seed",   "cycle_enabled", "isotropic_coords", "reuse_samples"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ContractError("unknown config key '" + key + "'");
  }
  TrainConfig c = base;
  try {
    if (j.contains("reg_kind")) c.use_regularizer(parse_reg_kind(j["reg_kind"].get<std::string>()));
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("lr")) c.lr = j["lr"].get<double>();
    if (j.contains("batch_per_inr")) c.batch_per_inr = j["batch_per_inr"].get<int>();
    if (j.contains("alpha")) c.weights.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) c.weights.beta = j["beta"].get<double>();
    if (j.contains("tau")) c.weights.tau = j["tau"].get<double>();
    if (j.contains("hidden_layers")) c.net.hidden_layers = j["hidden_layers"].get<int>();
    if (j.contains("width")) c.net.width = j["width"].get<int>();
    if (j.contains("omega0")) c.net.omega0 = j["omega0"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("cycle_enabled")) c.cycle_enabled = j["cycle_enabled"].get<bool>();
    if (j.contains("isotropic_coords")) c.isotropic_coords = j["isotropic_coords"].get<bool>();
    if (j.contains("reuse_samples")) c.reuse_samples = j["reuse_samples"].get<bool>();
  } catch (const json::exception& e) {
    throw ContractError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const TrainConfig& c) {
  json j = to_json_object(c);
  j.erase("seed");
  return fnv1a_hex(j.dump());
}

}  // namespace ccreg
