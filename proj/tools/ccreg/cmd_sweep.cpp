// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include "ccreg/errors.hpp"
#include "ccreg/phantom.hpp"
#include "ccreg/sweep.hpp"
#include "ccreg/volume_io.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <iostream>
#include <map>

extern char** environ;

namespace ccreg::cli {
namespace {

struct PlanEntry {
  std::uint64_t seed;
  bool truncated;
};

std::vector<PlanEntry> seed_plan(const SweepArgs& a) {
  std::vector<std::uint64_t> seeds = a.seed_list;
  if (seeds.empty()) {
    if (a.seeds <= 0) throw ContractError("sweep needs --seeds N or --seed-list");
    for (int i = 0; i < a.seeds; ++i) seeds.push_back(a.first_seed + static_cast<std::uint64_t>(i));
  }
  std::vector<PlanEntry> plan;
  for (std::uint64_t s : seeds) plan.push_back({s, false});
  // Induced failures continue the seed numbering past the converged runs.
  std::uint64_t next = *std::max_element(seeds.begin(), seeds.end()) + 1;
  for (int i = 0; i < a.induced_failures; ++i) plan.push_back({next++, true});
  return plan;
}

std::string seed_file(const PlanEntry& e) {
  return "seed_" + std::to_string(e.seed) + (e.truncated ? "_truncated" : "") + ".json";
}

PhantomSpec phantom_spec(const PhantomArgs& a) {
  PhantomSpec spec;
  spec.kind = parse_phantom_kind(a.kind);
  spec.size = a.size;
  spec.amplitude_mm = a.amplitude_mm;
  spec.spacing_mm = a.spacing_mm;
  spec.seed = a.seed;
  spec.landmarks = a.landmarks;
  return spec;
}

SweepInputs load_inputs(const SweepArgs& a, RunManifest* m) {
  if (a.fixed.empty()) {
    if (m) {
      m->set("phantom", {{"kind", a.phantom.kind},
                         {"size", a.phantom.size},
                         {"amplitude_mm", a.phantom.amplitude_mm},
                         {"spacing_mm", a.phantom.spacing_mm},
                         {"seed", a.phantom.seed},
                         {"landmarks", a.phantom.landmarks}});
    }
    return phantom_inputs(generate_phantom(phantom_spec(a.phantom)));
  }
  const bool cycle = strategy_uses_cycle(parse_strategy(a.strategy));
  if (a.moving.empty() || a.fixed_mask.empty() || a.landmarks_fixed.empty()) {
    throw ContractError("volume sweeps need --moving, --fixed-mask and --landmarks-fixed");
  }
  if (cycle && a.moving_mask.empty()) throw ContractError("--moving-mask is required for cycle strategies");
  if (m) {
    m->add_input("fixed", a.fixed);
    m->add_input("moving", a.moving);
    m->add_input("fixed_mask", a.fixed_mask);
    if (!a.moving_mask.empty()) m->add_input("moving_mask", a.moving_mask);
    m->add_input("landmarks_fixed", a.landmarks_fixed);
    if (!a.landmarks_moving.empty()) m->add_input("landmarks_moving", a.landmarks_moving);
  }
  SweepInputs in;
  in.fixed = load_volume(a.fixed);
  in.moving = load_volume(a.moving);
  in.mask_fixed = load_volume(a.fixed_mask);
  in.mask_moving = a.moving_mask.empty() ? in.mask_fixed : load_volume(a.moving_mask);
  const LandmarkUnits units = a.landmark_units == "voxel" ? LandmarkUnits::VoxelIndex : LandmarkUnits::WorldMm;
  in.landmarks_fixed = load_landmarks(a.landmarks_fixed, units, in.fixed.grid());
  if (!a.landmarks_moving.empty()) {
    in.landmarks_moving = load_landmarks(a.landmarks_moving, units, in.moving.grid());
    if (in.landmarks_moving->size() != in.landmarks_fixed.size()) {
      throw ContractError("--landmarks-fixed and --landmarks-moving differ in length");
    }
  }
  return in;
}

SweepOptions sweep_options(const SweepArgs& a, RunManifest* m) {
  SweepOptions opt;
  opt.strategy = parse_strategy(a.strategy);
  if (!a.config.empty()) {
    if (m) m->add_input("config", a.config);
    opt.base = config_from_json(read_text(a.config));
  }
  opt.threshold_mm = a.threshold_mm;
  opt.truncate_fraction = a.truncate_fraction;
  apply_strategy(opt.base, opt.strategy).validate();
  return opt;
}

void write_atomic(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  write_text(tmp, text);
  fs::rename(tmp, p);
}

// Runs every plan entry as `argv --worker-index i`, at most `k` at a time.
void run_workers(const std::vector<std::string>& argv, std::size_t count, int k) {
  const std::string exe = fs::read_symlink("/proc/self/exe").string();
  std::map<pid_t, std::size_t> running;
  std::size_t next = 0;
  auto reap_one = [&] {
    int status = 0;
    const pid_t pid = waitpid(-1, &status, 0);
    if (pid <= 0) return;
    const auto it = running.find(pid);
    if (it == running.end()) return;
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      std::cerr << "sweep: worker for plan entry " << it->second << " ended abnormally (status " << status << ")\n";
    }
    running.erase(it);
  };
  while (next < count || !running.empty()) {
    while (next < count && running.size() < static_cast<std::size_t>(k)) {
      std::vector<std::string> args = argv;
      args[0] = exe;
      args.push_back("--worker-index");
      args.push_back(std::to_string(next));
      std::vector<char*> cargs;
      for (auto& s : args) cargs.push_back(s.data());
      cargs.push_back(nullptr);
      pid_t pid = 0;
      if (posix_spawn(&pid, exe.c_str(), nullptr, nullptr, cargs.data(), environ) != 0) {
        throw IoError("cannot start a sweep worker process");
      }
      running.emplace(pid, next++);
    }
    if (!running.empty()) reap_one();
  }
}

}  // namespace

int sweep_worker(const SweepArgs& a) {
  const std::vector<PlanEntry> plan = seed_plan(a);
  if (a.worker_index >= static_cast<int>(plan.size())) throw ContractError("worker index out of range");
  const PlanEntry e = plan[static_cast<std::size_t>(a.worker_index)];
  const SweepInputs in = load_inputs(a, nullptr);
  const SweepOptions opt = sweep_options(a, nullptr);
  const SeedRun r = run_seed(in, opt, e.seed, e.truncated);
  write_atomic(a.out_dir / "seeds" / seed_file(e), seed_run_json(r) + "\n");
  return kOk;
}

int cmd_sweep(const SweepArgs& a, RunManifest& m, const std::vector<std::string>& argv) {
  const std::vector<PlanEntry> plan = seed_plan(a);
  const SweepOptions opt = sweep_options(a, &m);
  const SweepInputs in = load_inputs(a, &m);
  m.set_config(apply_strategy(opt.base, opt.strategy));
  nlohmann::ordered_json plan_json = nlohmann::ordered_json::array();
  for (const PlanEntry& e : plan) plan_json.push_back({{"seed", e.seed}, {"truncated", e.truncated}});
  m.set("seed", nullptr);
  m.set("plan", plan_json);
  m.set("strategy", a.strategy);
  m.set("parallel", a.parallel);

  const fs::path seeds_dir = a.out_dir / "seeds";
  fs::create_directories(seeds_dir);
  for (const PlanEntry& e : plan) fs::remove(seeds_dir / seed_file(e));

  if (a.parallel > 1) {
    run_workers(argv, plan.size(), a.parallel);
  } else {
    for (const PlanEntry& e : plan) {
      const SeedRun r = run_seed(in, opt, e.seed, e.truncated);
      write_atomic(seeds_dir / seed_file(e), seed_run_json(r) + "\n");
      std::cerr << "seed " << e.seed << (e.truncated ? " (truncated)" : "") << ": " << r.status << '\n';
    }
  }

  // Results are always read back from the seed files, whichever path produced them.
  SweepResult result;
  result.label = a.strategy;
  result.options = opt;
  for (const PlanEntry& e : plan) {
    const fs::path p = seeds_dir / seed_file(e);
    if (fs::exists(p)) {
      result.runs.push_back(seed_run_from_json(read_text(p)));
    } else {
      SeedRun missing;
      missing.seed = e.seed;
      missing.truncated = e.truncated;
      missing.status = "error: worker produced no result";
      missing.failed = true;
      result.runs.push_back(missing);
    }
  }
  result.summary = summarize(result.runs, in, opt.threshold_mm);

  write_text(a.out_dir / "sweep.json", sweep_json(result));
  write_text(a.out_dir / "failure_table.csv", failure_table_csv({result}));
  write_text(a.out_dir / "uncertainty_error.csv", uncertainty_error_csv(result.runs));
  for (const char* name : {"sweep.json", "failure_table.csv", "uncertainty_error.csv", "seeds/"}) m.add_output(name);

  const SweepSummary& s = result.summary;
  std::cout << a.strategy << ": " << s.produced << "/" << s.runs << " runs produced";
  if (s.failure_rate) std::cout << ", failure rate " << *s.failure_rate;
  if (s.mean_tre) std::cout << ", mean TRE " << *s.mean_tre << " mm";
  std::cout << '\n';
  m.set("produced", s.produced);
  return s.produced == s.runs ? kOk : kPartialSweep;
}

}  // namespace ccreg::cli
