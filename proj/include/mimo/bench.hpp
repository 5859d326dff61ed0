// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimo/experiments.hpp"

namespace mimo {

struct BenchRow {
  std::string op;          // "perturb", "receive_lb", "receive_ml"
  int streams = 0;
  double usec_per_call = 0.0;
  long long reps = 0;
};

// Times the hot per-trial operations on random well-conditioned inputs.
// The offset search runs for 1..max_streams streams, the modulo receiver
// for the same range, and the exhaustive receiver for 1..min(max_streams, 3)
// (its 4^L candidate set grows too fast beyond that). Each figure is the
// best of three timed runs, each long enough to be clock-resolution safe.
std::vector<BenchRow> run_bench(int max_streams, int radius, std::uint64_t seed);

// Repackages bench rows in the common record shape ("bench" experiment,
// metric "usec_per_call:streams=N") so they share the CSV/JSON writers.
ResultRecord bench_record(const std::vector<BenchRow>& rows,
                          std::uint64_t seed);

}  // namespace mimo
