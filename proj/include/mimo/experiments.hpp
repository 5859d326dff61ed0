// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mimo/link.hpp"
#include "mimo/types.hpp"

namespace mimo {

enum class ExperimentKind { Rates, Ber, SweepStreams, SweepUsers };
enum class OutputFormat { Csv, Json };

std::string experiment_label(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& token);
OutputFormat parse_format(const std::string& token);

// Inclusive arithmetic grid over SNR in dB. A zero-length span (start ==
// stop) is a single point regardless of step.
struct SnrGrid {
  double start = 0.0;
  double stop = 30.0;
  double step = 5.0;

  std::vector<double> values() const;
  static SnrGrid parse(const std::string& text);  // "start:stop:step" or "value"
};

// Complete description of one experiment run. Everything that influences
// the produced numbers lives here, so re-running an echoed spec with the
// same seed reproduces the output bit for bit.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Rates;
  int n_rx = 2;
  int n_users = 2;
  SnrGrid snr;
  std::uint64_t seed = 1;
  int radius = 2;
  std::vector<SchemeId> schemes = {SchemeId::LbMuSm, SchemeId::ZfMuSm,
                                   SchemeId::ZfRx, SchemeId::MlRx};
  StoppingRule stop;
  int rate_draws = 2000;
  int streams_min = 1, streams_max = 4;  // sweep-streams legs
  int users_min = 1, users_max = 6;      // sweep-users legs
  int workers = 0;                       // 0: resolve from hardware and env

  void validate() const;
};

// One output record in long format. The same rows appear in CSV and JSON.
struct ResultRow {
  std::string experiment;
  std::string scheme;
  double snr_db = 0.0;
  std::string metric;
  double value = 0.0;
  long long trials = 0;
  long long errors = 0;
  std::uint64_t seed = 0;

  bool operator==(const ResultRow&) const = default;
};

struct ResultRecord {
  ExperimentSpec spec;
  std::string version;
  std::string timestamp;  // carried in JSON metadata only; CSV stays byte-stable
  long long redraws = 0;
  std::vector<ResultRow> rows;
};

// Mean achievable rates over independent draws: water-filling ceiling in
// both power-constraint modes, the plain-inversion reference, and the
// perturbed-inversion sum rate, one row per (curve, SNR).
ResultRecord run_rates_experiment(const ExperimentSpec& spec);

// Monte Carlo BER for every requested scheme, one row per (scheme, SNR).
ResultRecord run_ber_experiment(const ExperimentSpec& spec);

// Dispatch by spec.kind; sweeps run the rates pipeline once per geometry
// leg and tag each row's metric with the swept value.
ResultRecord run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kCsvHeader =
    "experiment,scheme,snr_db,metric,value,trials,errors,seed";

std::string to_csv(const ResultRecord& record);
std::string to_json(const ResultRecord& record);

// Writes CSV or JSON to path ("-" for stdout). Throws IoError on failure.
void emit_results(const ResultRecord& record, OutputFormat format,
                  const std::string& path);

std::vector<ResultRow> read_rows_csv(const std::string& path);
ResultRecord read_record_json(const std::string& path);

}  // namespace mimo
