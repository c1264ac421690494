#pragma once

#include <string>

namespace robgan::cli {

struct SweepOptions {
  std::string figure;
  std::string out_dir = "sweep_out";
  std::size_t reps = 0; // 0: the figure's default
  std::size_t jobs = 1;
  unsigned long long seed = 2018;
};

int run_sweep(const SweepOptions& opt);

/// Prints one PASS/FAIL line per suite; returns the number of failed suites.
int run_selfcheck(unsigned long long seed);

} // namespace robgan::cli
