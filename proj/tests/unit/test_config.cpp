// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "ccreg/checkpoint.hpp"
#include "ccreg/config.hpp"
#include "ccreg/errors.hpp"
#include "ccreg/hash.hpp"
#include "fd_oracle.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>

using namespace ccreg;

TEST_SUITE("config") {

TEST_CASE("defaults are the published settings") {
  const TrainConfig c;
  CHECK(c.epochs == 2500);
  CHECK(c.lr == 1e-4);
  CHECK(c.batch_per_inr == 10000);
  CHECK(c.weights.alpha == 0.05);
  CHECK(c.weights.beta == 1e-3);
  CHECK(c.weights.tau == 10.0);
  CHECK(c.weights.reg_kind == RegKind::SymmetricJacobian);
  CHECK(c.net.hidden_layers == 3);
  CHECK(c.net.width == 256);
  CHECK(c.net.omega0 == 30.0);
  CHECK(c.cycle_enabled);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("JSON round trip materializes every field") {
  TrainConfig c;
  c.epochs = 17;
  c.lr = 3e-4;
  c.seed = 99;
  c.use_regularizer(RegKind::Bending);
  c.net.width = 48;
  c.isotropic_coords = true;
  const std::string text = config_to_json(c);
  const auto j = nlohmann::json::parse(text);
  for (const char* key : {"epochs", "lr", "batch_per_inr", "alpha", "beta", "tau", "reg_kind", "hidden_layers", "width",
                          "omega0", "seed", "cycle_enabled", "isotropic_coords", "reuse_samples"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  const TrainConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(back.weights.alpha == 10.0);
}

TEST_CASE("partial JSON overlays the base; regularizer switch picks its default weight") {
  TrainConfig base;
  base.epochs = 5;
  const TrainConfig c = config_from_json(R"({"reg_kind": "bending", "width": 32})", base);
  CHECK(c.epochs == 5);
  CHECK(c.net.width == 32);
  CHECK(c.weights.alpha == 10.0);
  const TrainConfig d = config_from_json(R"({"reg_kind": "bending", "alpha": 2.5})", base);
  CHECK(d.weights.alpha == 2.5);
}

TEST_CASE("bad config input") {
  CHECK_THROWS_AS(config_from_json(R"({"epoch": 3})"), ContractError);
  CHECK_THROWS_AS(config_from_json(R"({"epochs": "many"})"), ContractError);
  CHECK_THROWS_AS(config_from_json("{not json"), ParseError);
  CHECK_THROWS_AS(config_from_json("[1, 2]"), ContractError);
  TrainConfig c;
  c.batch_per_inr = 1;
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("config hash ignores the seed and nothing else") {
  TrainConfig a, b;
  b.seed = 12345;
  CHECK(config_hash(a) == config_hash(b));
  b.lr = 2e-4;
  CHECK(config_hash(a) != config_hash(b));
  TrainConfig c;
  c.cycle_enabled = false;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("FNV-1a known vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("network checkpoint round trip is bit-exact") {
  Rng rng(1);
  const SirenParams p = test::random_net(3, 20, rng);
  const auto dir = test::scratch_dir("ckpt_roundtrip");
  const std::string h = save_siren(p, dir, "forward", {42, "abc"});
  SirenCheckpointMeta meta;
  const SirenParams q = load_siren(dir, "forward", &meta);
  CHECK(p == q);
  CHECK(meta.seed == 42);
  CHECK(meta.config_hash == "abc");
  CHECK(h.size() == 16);
  const auto manifest = nlohmann::json::parse(test::read_bytes(dir / "forward.json"));
  CHECK(manifest["layer_sizes"] == std::vector<int>{3, 20, 20, 20, 3});
  // Weight (row-major) then bias, float64 little-endian.
  const std::string bytes = test::read_bytes(dir / "forward.layer0.f64");
  REQUIRE(bytes.size() == (20 * 3 + 20) * 8);
  double first;
  std::memcpy(&first, bytes.data(), 8);
  CHECK(first == p.layers[0].weight(0, 0));
  std::memcpy(&first, bytes.data() + 8, 8);
  CHECK(first == p.layers[0].weight(0, 1));
}

TEST_CASE("damaged checkpoints are rejected") {
  Rng rng(2);
  const SirenParams p = test::random_net(2, 8, rng);
  const auto dir = test::scratch_dir("ckpt_damage");
  save_siren(p, dir, "net", {});
  const auto payload = dir / "net.layer1.f64";
  const std::string good = test::read_bytes(payload);

  SUBCASE("flipped byte") {
    std::string bad = good;
    bad[13] = static_cast<char>(bad[13] ^ 0x40);
    test::write_text(payload, bad);
    CHECK_THROWS_AS(load_siren(dir, "net"), IoError);
  }
  SUBCASE("truncated payload") {
    test::write_text(payload, good.substr(0, good.size() - 8));
    CHECK_THROWS_AS(load_siren(dir, "net"), IoError);
  }
  SUBCASE("missing payload") {
    std::filesystem::remove(payload);
    CHECK_THROWS_AS(load_siren(dir, "net"), IoError);
  }
  SUBCASE("unreadable manifest") {
    test::write_text(dir / "net.json", "{\"layer_sizes\": ");
    CHECK_THROWS_AS(load_siren(dir, "net"), FormatError);
  }
  SUBCASE("missing manifest") { CHECK_THROWS_AS(load_siren(dir, "other"), IoError); }
}

}  // TEST_SUITE
