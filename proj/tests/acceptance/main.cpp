// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, details in
// <out>/acceptance_report.json. Exit status 0 only if every selected criterion passes.
//
//   ccreg_acceptance [--out DIR] [--only 1,2,...] [--reuse]
//
// Criterion 9 repeats every training run. CCREG_ACCEPTANCE_QUICK_RERUN=1 limits it to
// the first and last seed of each experiment.
#include "acceptance.hpp"

#include "ccreg/parallel.hpp"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace ccreg::acceptance;

int main(int argc, char** argv) {
  ccreg::tune_allocator();
  Context ctx;
  ctx.out_dir = "acceptance_out";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      ctx.out_dir = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
    } else if (a == "--reuse") {
      ctx.reuse = true;
    } else {
      std::cerr << "usage: ccreg_acceptance [--out DIR] [--only 1,2,...] [--reuse]\n";
      return 2;
    }
  }
  const char* quick = std::getenv("CCREG_ACCEPTANCE_QUICK_RERUN");
  ctx.full_rerun = !(quick && std::strcmp(quick, "1") == 0);
  std::filesystem::create_directories(ctx.out_dir);

  SweepCriteria sweeps(ctx);
  const std::function<CriterionResult()> criteria[] = {
      criterion_gradients,
      criterion_spatial_derivatives,
      criterion_inverse,
      criterion_symmetric_jacobian,
      [&] { return sweeps.accuracy(); },
      [&] { return sweeps.robustness(); },
      [&] { return sweeps.uncertainty(); },
      [&] { return sweeps.consensus(); },
      [&] { return sweeps.determinism(); },
  };

  nlohmann::ordered_json report = nlohmann::ordered_json::array();
  std::vector<std::string> lines;
  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = criteria[id - 1]();
    } catch (const std::exception& e) {
      r = {id, false, std::string("exception: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && r.pass;
    std::ostringstream line;
    line << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << " - " << r.summary << " ["
         << static_cast<long>(secs + 0.5) << " s]";
    std::cout << line.str() << std::endl;
    lines.push_back(line.str());
    report.push_back({{"criterion", id}, {"pass", r.pass}, {"summary", r.summary}, {"seconds", secs},
                      {"detail", r.detail}});
  }
  std::ofstream(ctx.out_dir / "acceptance_report.json") << report.dump(2) << '\n';
  std::ofstream summary(ctx.out_dir / "acceptance_summary.txt");
  for (const auto& l : lines) summary << l << '\n';
  return all ? 0 : 1;
}
