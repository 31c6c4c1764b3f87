// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ccreg/config.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace ccreg::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kInputError = 2,
  kNumericalAbort = 3,
  kPartialSweep = 4,
};

/// run.json: everything needed to repeat a run. Written on success and failure.
class RunManifest {
 public:
  RunManifest(std::string subcommand, std::vector<std::string> args);

  void set_config(const TrainConfig& cfg);
  void set(const std::string& key, nlohmann::ordered_json value);
  /// Records the path and content hash of an input (null hash if unreadable).
  void add_input(const std::string& role, const fs::path& path);
  void add_output(const std::string& name);

  /// Writes `<out_dir>/run.json`. Returns false if the directory is unusable.
  bool write(const fs::path& out_dir, int exit_code, const std::string& error) const;

 private:
  nlohmann::ordered_json j_;
  std::chrono::steady_clock::time_point start_;
};

/// Runs `body`, maps exceptions onto the exit-code taxonomy and always leaves run.json behind.
int run_guarded(RunManifest& m, const fs::path& out_dir, const std::function<int()>& body);

std::string read_text(const fs::path& p);
void write_text(const fs::path& p, const std::string& text);

/// Content hash of a file; for a volume header the payload it names is folded in.
std::string input_hash(const fs::path& p);

}  // namespace ccreg::cli
