// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/checkpoint.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/hash.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace ccreg {
namespace {

using nlohmann::json;

std::uint64_t to_le64(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  return v;
}

std::string encode_layer(const DenseLayer& l) {
  std::string bytes;
  bytes.resize(static_cast<std::size_t>(l.weight.size() + l.bias.size()) * 8);
  std::size_t off = 0;
  auto put = [&](double d) {
    const std::uint64_t u = to_le64(std::bit_cast<std::uint64_t>(d));
    std::memcpy(bytes.data() + off, &u, 8);
    off += 8;
  };
  for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put(l.weight(r, c));
  }
  for (Eigen::Index r = 0; r < l.bias.size(); ++r) put(l.bias[r]);
  return bytes;
}

std::string layer_file(const std::string& name, std::size_t l) { return name + ".layer" + std::to_string(l) + ".f64"; }

}  // namespace

std::string save_siren(const SirenParams& p, const std::filesystem::path& dir, const std::string& name,
                       const SirenCheckpointMeta& meta) {
  p.validate();
  std::filesystem::create_directories(dir);
  Fnv1a payload_hash;
  json manifest;
  manifest["layer_sizes"] = p.layer_sizes();
  manifest["omega0"] = p.omega0;
  manifest["seed"] = meta.seed;
  manifest["config_hash"] = meta.config_hash;
  manifest["payloads"] = json::array();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string bytes = encode_layer(p.layers[l]);
    payload_hash.update(bytes);
    const auto file = layer_file(name, l);
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / file).string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + (dir / file).string());
    manifest["payloads"].push_back(file);
  }
  manifest["payload_hash"] = payload_hash.hex();
  std::ofstream out(dir / (name + ".json"), std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
  return payload_hash.hex();
}

SirenParams load_siren(const std::filesystem::path& dir, const std::string& name, SirenCheckpointMeta* meta) {
  const auto manifest_path = dir / (name + ".json");
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open checkpoint manifest " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  SirenParams p;
  std::vector<int> sizes;
  try {
    sizes = manifest.at("layer_sizes").get<std::vector<int>>();
    p.omega0 = manifest.at("omega0").get<double>();
    if (meta) {
      meta->seed = manifest.value("seed", std::uint64_t{0});
      meta->config_hash = manifest.value("config_hash", std::string{});
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (sizes.size() < 3) throw FormatError(manifest_path.string() + ": too few layers");
  Fnv1a payload_hash;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    if (fan_in <= 0 || fan_out <= 0) throw FormatError(manifest_path.string() + ": non-positive layer size");
    const auto file = dir / layer_file(name, l);
    std::ifstream pin(file, std::ios::binary);
    if (!pin) throw IoError("cannot open " + file.string());
    std::string bytes{std::istreambuf_iterator<char>(pin), std::istreambuf_iterator<char>()};
    const std::size_t expected = static_cast<std::size_t>(fan_out) * (fan_in + 1) * 8;
    if (bytes.size() != expected) {
      throw IoError(file.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                    std::to_string(bytes.size()));
    }
    payload_hash.update(bytes);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd(fan_out)};
    std::size_t off = 0;
    auto get = [&] {
      std::uint64_t u;
      std::memcpy(&u, bytes.data() + off, 8);
      off += 8;
      return std::bit_cast<double>(to_le64(u));
    };
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = get();
    }
    for (int r = 0; r < fan_out; ++r) layer.bias[r] = get();
    p.layers.push_back(std::move(layer));
  }
  if (manifest.contains("payload_hash") && manifest["payload_hash"].get<std::string>() != payload_hash.hex()) {
    throw IoError(manifest_path.string() + ": payload hash mismatch (checkpoint modified or corrupt)");
  }
  try {
    p.validate();
  } catch (const ContractError& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  return p;
}

}  // namespace ccreg
