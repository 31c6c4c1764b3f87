// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "manifest.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/hash.hpp"
#include "ccreg/trainer.hpp"

#include <fstream>
#include <iostream>
#include <iterator>

#ifndef CCREG_VERSION
#define CCREG_VERSION "unknown"
#endif

namespace ccreg::cli {

using nlohmann::ordered_json;

RunManifest::RunManifest(std::string subcommand, std::vector<std::string> args)
    : start_(std::chrono::steady_clock::now()) {
  j_["subcommand"] = std::move(subcommand);
  j_["tool_version"] = CCREG_VERSION;
  j_["args"] = std::move(args);
  j_["inputs"] = ordered_json::object();
  j_["outputs"] = ordered_json::array();
}

void RunManifest::set_config(const TrainConfig& cfg) {
  j_["config"] = ordered_json::parse(config_to_json(cfg, -1));
  j_["config_hash"] = config_hash(cfg);
  j_["seed"] = cfg.seed;
}

void RunManifest::set(const std::string& key, ordered_json value) { j_[key] = std::move(value); }

void RunManifest::add_input(const std::string& role, const fs::path& path) {
  ordered_json in;
  in["path"] = path.string();
  try {
    in["hash"] = input_hash(path);
  } catch (const std::exception&) {
    in["hash"] = nullptr;
  }
  j_["inputs"][role] = std::move(in);
}

void RunManifest::add_output(const std::string& name) { j_["outputs"].push_back(name); }

bool RunManifest::write(const fs::path& out_dir, int exit_code, const std::string& error) const {
  ordered_json j = j_;
  j["status"] = exit_code == kOk ? "ok" : "error";
  j["exit_code"] = exit_code;
  j["error"] = error.empty() ? ordered_json(nullptr) : ordered_json(error);
  j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream out(out_dir / "run.json", std::ios::binary);
  if (!out) return false;
  out << j.dump(2) << '\n';
  return static_cast<bool>(out);
}

int run_guarded(RunManifest& m, const fs::path& out_dir, const std::function<int()>& body) {
  int code = kOk;
  std::string error;
  try {
    code = body();
  } catch (const TrainingAborted& e) {
    m.set("aborted_epoch", e.epoch());
    code = kNumericalAbort;
    error = e.what();
  } catch (const NumericalError& e) {
    code = kNumericalAbort;
    error = e.what();
  } catch (const IoError& e) {
    code = kInputError;
    error = e.what();
  } catch (const FormatError& e) {
    code = kInputError;
    error = e.what();
  } catch (const ParseError& e) {
    code = kInputError;
    error = e.what();
  } catch (const std::invalid_argument& e) {  // contract and parameter errors
    code = kInputError;
    error = e.what();
  } catch (const std::domain_error& e) {
    code = kInputError;
    error = e.what();
  } catch (const std::exception& e) {
    code = kInternalError;
    error = e.what();
  }
  if (!error.empty()) std::cerr << "ccreg: error: " << error << '\n';
  if (!m.write(out_dir, code, error)) {
    std::cerr << "ccreg: cannot write " << (out_dir / "run.json").string() << '\n';
    if (code == kOk) code = kInputError;
  }
  return code;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + p.string());
}

std::string input_hash(const fs::path& p) {
  const std::string own = hash_file(p);
  if (p.extension() != ".json") return own;
  const auto j = nlohmann::json::parse(read_text(p), nullptr, false);
  if (!j.is_object() || !j.contains("data") || !j["data"].is_string()) return own;
  return fnv1a_hex(own + ":" + hash_file(p.parent_path() / j["data"].get<std::string>()));
}

}  // namespace ccreg::cli
