// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "mimo/bench.hpp"

using namespace mimo;

TEST_CASE("bench produces a row per op and stream count") {
  const auto rows = run_bench(3, 2, 77);
  // perturb 1..3, receive_lb 1..3, receive_ml 1..3.
  REQUIRE(rows.size() == 9);
  std::map<std::string, int> count;
  for (const auto& r : rows) {
    CHECK(r.usec_per_call > 0.0);
    CHECK(r.reps > 0);
    count[r.op]++;
  }
  CHECK(count["perturb"] == 3);
  CHECK(count["receive_lb"] == 3);
  CHECK(count["receive_ml"] == 3);

  // The exhaustive receiver's candidate set quadruples per stream; even
  // with generous noise the cost must grow clearly.
  std::map<int, double> ml;
  std::map<int, double> pert;
  for (const auto& r : rows) {
    if (r.op == "receive_ml") ml[r.streams] = r.usec_per_call;
    if (r.op == "perturb") pert[r.streams] = r.usec_per_call;
  }
  CHECK(ml[3] > 3.0 * ml[1]);
  CHECK(pert[3] > pert[1]);

  const ResultRecord rec = bench_record(rows, 77);
  REQUIRE(rec.rows.size() == rows.size());
  CHECK(rec.rows[0].experiment == "bench");
  CHECK(rec.rows[0].metric == "usec_per_call:streams=1");
  CHECK(rec.rows[0].scheme == "perturb");
}

TEST_CASE("bench rejects bad arguments") {
  CHECK_THROWS_AS(run_bench(0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_bench(9, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_bench(2, -1, 1), std::invalid_argument);
}
