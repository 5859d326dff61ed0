// SPDX-License-Identifier: Apache-2.0
#include "mimo/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mimo/errors.hpp"
#include "mimo/rates.hpp"
#include "mimo/rng.hpp"
#include "mimo/version.hpp"

namespace mimo {

std::string experiment_label(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Rates: return "rates";
    case ExperimentKind::Ber: return "ber";
    case ExperimentKind::SweepStreams: return "sweep-streams";
    case ExperimentKind::SweepUsers: return "sweep-users";
  }
  throw std::invalid_argument("experiment_label: unknown kind");
}

ExperimentKind parse_experiment(const std::string& token) {
  if (token == "rates") return ExperimentKind::Rates;
  if (token == "ber") return ExperimentKind::Ber;
  if (token == "sweep-streams") return ExperimentKind::SweepStreams;
  if (token == "sweep-users") return ExperimentKind::SweepUsers;
  throw ConfigError("unknown experiment kind '" + token + "'");
}

OutputFormat parse_format(const std::string& token) {
  if (token == "csv") return OutputFormat::Csv;
  if (token == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + token + "' (expected csv or json)");
}

std::vector<double> SnrGrid::values() const {
  if (start == stop) return {start};
  if (!(step > 0.0)) throw ConfigError("snr grid: step must be positive");
  if (stop < start) throw ConfigError("snr grid: stop must not be below start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

SnrGrid SnrGrid::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text + ":") {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("snr grid: cannot parse '" + text + "'");
    }
  };
  SnrGrid g;
  if (parts.size() == 1) {
    g.start = g.stop = to_double(parts[0]);
    g.step = 1.0;
  } else if (parts.size() == 3) {
    g.start = to_double(parts[0]);
    g.stop = to_double(parts[1]);
    g.step = to_double(parts[2]);
  } else {
    throw ConfigError("snr grid: expected start:stop:step, got '" + text + "'");
  }
  g.values();  // validates
  return g;
}

void ExperimentSpec::validate() const {
  if (n_rx < 1 || n_users < 1)
    throw ConfigError("experiment: rx and users must be at least 1");
  if (n_rx > 8 || n_users > 16)
    throw ConfigError("experiment: geometry too large for exhaustive simulation");
  snr.values();
  if (radius < 0) throw ConfigError("experiment: radius must be non-negative");
  if (rate_draws < 1) throw ConfigError("experiment: draws must be at least 1");
  if (stop.min_trials < 1 || stop.max_trials < stop.min_trials || stop.batch < 1 ||
      stop.min_bit_errors < 0)
    throw ConfigError("experiment: invalid stopping rule");
  if (kind == ExperimentKind::Ber && schemes.empty())
    throw ConfigError("experiment: ber needs at least one scheme");
  if (kind == ExperimentKind::SweepStreams &&
      (streams_min < 1 || streams_max < streams_min || streams_max > 8))
    throw ConfigError("experiment: invalid streams range");
  if (kind == ExperimentKind::SweepUsers &&
      (users_min < 1 || users_max < users_min || users_max > 16))
    throw ConfigError("experiment: invalid users range");
  if (workers < 0) throw ConfigError("experiment: workers must be non-negative");
}

namespace {

ResultRecord fresh_record(const ExperimentSpec& spec) {
  ResultRecord rec;
  rec.spec = spec;
  rec.version = kVersion;
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  rec.timestamp = buf;
  return rec;
}

// Rate curves for one geometry: per draw one precoder build, then every
// SNR point reuses the cached mode gains. Returns redraw count.
long long rates_rows(const ExperimentSpec& spec, const SystemConfig& cfg,
                     const std::string& experiment, const std::string& metric,
                     std::uint64_t stream_salt, std::vector<ResultRow>& rows) {
  const std::vector<double> snrs = spec.snr.values();
  const char* curves[] = {"c_bd_wf_total", "c_bd_wf_per_user", "r_ci", "r_sum"};
  std::vector<std::vector<double>> sums(4, std::vector<double>(snrs.size(), 0.0));
  long long redraws = 0;

  for (int d = 0; d < spec.rate_draws; ++d) {
    CounterRng rng(spec.seed, (stream_salt << 48) | static_cast<std::uint64_t>(d));
    ChannelSet channels;
    PrecoderSet ps;
    for (int attempt = 0;; ++attempt) {
      channels = draw_channels(cfg, rng, spec.seed);
      try {
        ps = build_precoder_set(channels, cfg);
        break;
      } catch (const DegenerateChannelError&) {
        ++redraws;
        if (attempt >= 128)
          throw NumericalError("rates: 128 degenerate channel draws in a row");
      }
    }
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      const double rho = std::pow(10.0, snrs[si] / 10.0);
      const double total_power = static_cast<double>(cfg.n_users) * rho;
      sums[0][si] += c_bd_from(ps, total_power, 1.0, PowerConstraint::Total).sum;
      sums[1][si] += c_bd_from(ps, total_power, 1.0, PowerConstraint::PerUser).sum;
      sums[2][si] += rate_ci(ps, rho).sum;
      sums[3][si] += rate_sum_prop(ps, rho).sum;
    }
  }

  for (int c = 0; c < 4; ++c)
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      ResultRow row;
      row.experiment = experiment;
      row.scheme = curves[c];
      row.snr_db = snrs[si];
      row.metric = metric;
      row.value = sums[c][si] / static_cast<double>(spec.rate_draws);
      row.trials = spec.rate_draws;
      row.errors = 0;
      row.seed = spec.seed;
      rows.push_back(std::move(row));
    }
  return redraws;
}

}  // namespace

ResultRecord run_rates_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultRecord rec = fresh_record(spec);
  const SystemConfig cfg = make_config(spec.n_rx, spec.n_users);
  rec.redraws = rates_rows(spec, cfg, "rates", "sum_rate", 0, rec.rows);
  return rec;
}

ResultRecord run_ber_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ResultRecord rec = fresh_record(spec);
  const SystemConfig cfg = make_config(spec.n_rx, spec.n_users);
  const std::vector<double> snrs = spec.snr.values();
  for (SchemeId scheme : spec.schemes) {
    const BerCurve curve = run_ber(cfg, scheme, snrs, spec.stop, spec.seed,
                                   spec.radius, spec.workers);
    for (const BerPoint& pt : curve.points) {
      ResultRow row;
      row.experiment = "ber";
      row.scheme = curve.label;
      row.snr_db = pt.snr_db;
      row.metric = "ber";
      row.value = pt.ber;
      row.trials = pt.trials;
      row.errors = pt.bit_errors;
      row.seed = spec.seed;
      rec.rows.push_back(std::move(row));
      rec.redraws += pt.redraws;
    }
  }
  return rec;
}

ResultRecord run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ExperimentKind::Rates:
      return run_rates_experiment(spec);
    case ExperimentKind::Ber:
      return run_ber_experiment(spec);
    case ExperimentKind::SweepStreams: {
      ResultRecord rec = fresh_record(spec);
      for (int l = spec.streams_min; l <= spec.streams_max; ++l) {
        const SystemConfig cfg = make_config(l, spec.n_users);
        rec.redraws += rates_rows(spec, cfg, "sweep-streams",
                                  "sum_rate:streams=" + std::to_string(l),
                                  static_cast<std::uint64_t>(l), rec.rows);
      }
      return rec;
    }
    case ExperimentKind::SweepUsers: {
      ResultRecord rec = fresh_record(spec);
      for (int k = spec.users_min; k <= spec.users_max; ++k) {
        const SystemConfig cfg = make_config(spec.n_rx, k);
        rec.redraws += rates_rows(spec, cfg, "sweep-users",
                                  "sum_rate:users=" + std::to_string(k),
                                  static_cast<std::uint64_t>(k), rec.rows);
      }
      return rec;
    }
  }
  throw std::invalid_argument("run_experiment: unknown kind");
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_csv_field(const std::string& s) {
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
    throw IoError("csv: field would corrupt the table: '" + s + "'");
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["experiment"] = experiment_label(spec.kind);
  j["n_rx"] = spec.n_rx;
  j["n_users"] = spec.n_users;
  j["snr"] = {{"start", spec.snr.start}, {"stop", spec.snr.stop}, {"step", spec.snr.step}};
  j["seed"] = spec.seed;
  j["radius"] = spec.radius;
  std::vector<std::string> schemes;
  for (SchemeId s : spec.schemes) schemes.push_back(scheme_label(s));
  j["schemes"] = schemes;
  j["stopping"] = {{"min_bit_errors", spec.stop.min_bit_errors},
                   {"min_trials", spec.stop.min_trials},
                   {"max_trials", spec.stop.max_trials},
                   {"batch", spec.stop.batch}};
  j["rate_draws"] = spec.rate_draws;
  j["streams_range"] = {spec.streams_min, spec.streams_max};
  j["users_range"] = {spec.users_min, spec.users_max};
  j["workers"] = spec.workers;
  return j;
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  ExperimentSpec spec;
  spec.kind = parse_experiment(j.at("experiment").get<std::string>());
  spec.n_rx = j.at("n_rx").get<int>();
  spec.n_users = j.at("n_users").get<int>();
  spec.snr.start = j.at("snr").at("start").get<double>();
  spec.snr.stop = j.at("snr").at("stop").get<double>();
  spec.snr.step = j.at("snr").at("step").get<double>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.radius = j.at("radius").get<int>();
  spec.schemes.clear();
  for (const auto& s : j.at("schemes")) spec.schemes.push_back(parse_scheme(s.get<std::string>()));
  spec.stop.min_bit_errors = j.at("stopping").at("min_bit_errors").get<long long>();
  spec.stop.min_trials = j.at("stopping").at("min_trials").get<long long>();
  spec.stop.max_trials = j.at("stopping").at("max_trials").get<long long>();
  spec.stop.batch = j.at("stopping").at("batch").get<int>();
  spec.rate_draws = j.at("rate_draws").get<int>();
  spec.streams_min = j.at("streams_range").at(0).get<int>();
  spec.streams_max = j.at("streams_range").at(1).get<int>();
  spec.users_min = j.at("users_range").at(0).get<int>();
  spec.users_max = j.at("users_range").at(1).get<int>();
  spec.workers = j.at("workers").get<int>();
  return spec;
}

nlohmann::json row_to_json(const ResultRow& row) {
  return {{"experiment", row.experiment}, {"scheme", row.scheme},
          {"snr_db", row.snr_db},         {"metric", row.metric},
          {"value", row.value},           {"trials", row.trials},
          {"errors", row.errors},         {"seed", row.seed}};
}

ResultRow row_from_json(const nlohmann::json& j) {
  ResultRow row;
  row.experiment = j.at("experiment").get<std::string>();
  row.scheme = j.at("scheme").get<std::string>();
  row.snr_db = j.at("snr_db").get<double>();
  row.metric = j.at("metric").get<std::string>();
  row.value = j.at("value").get<double>();
  row.trials = j.at("trials").get<long long>();
  row.errors = j.at("errors").get<long long>();
  row.seed = j.at("seed").get<std::uint64_t>();
  return row;
}

}  // namespace

std::string to_csv(const ResultRecord& record) {
  std::string out = kCsvHeader;
  out.push_back('\n');
  for (const ResultRow& row : record.rows) {
    check_csv_field(row.experiment);
    check_csv_field(row.scheme);
    check_csv_field(row.metric);
    out += row.experiment;
    out.push_back(',');
    out += row.scheme;
    out.push_back(',');
    out += fmt_double(row.snr_db);
    out.push_back(',');
    out += row.metric;
    out.push_back(',');
    out += fmt_double(row.value);
    out.push_back(',');
    out += std::to_string(row.trials);
    out.push_back(',');
    out += std::to_string(row.errors);
    out.push_back(',');
    out += std::to_string(row.seed);
    out.push_back('\n');
  }
  return out;
}

std::string to_json(const ResultRecord& record) {
  nlohmann::json j;
  j["metadata"] = spec_to_json(record.spec);
  j["metadata"]["version"] = record.version;
  j["metadata"]["timestamp"] = record.timestamp;
  j["metadata"]["redraws"] = record.redraws;
  j["rows"] = nlohmann::json::array();
  for (const ResultRow& row : record.rows) j["rows"].push_back(row_to_json(row));
  return j.dump(2) + "\n";
}

void emit_results(const ResultRecord& record, OutputFormat format,
                  const std::string& path) {
  const std::string body = format == OutputFormat::Csv ? to_csv(record) : to_json(record);
  if (path == "-") {
    std::cout << body;
    if (!std::cout) throw IoError("emit_results: failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_results: cannot open '" + path + "' for writing");
  out << body;
  out.flush();
  if (!out) throw IoError("emit_results: failed writing '" + path + "'");
}

std::vector<ResultRow> read_rows_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_rows_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw IoError("read_rows_csv: '" + path + "' has an unexpected header");

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line + ",") {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (fields.size() != 8)
      throw IoError("read_rows_csv: malformed row '" + line + "'");
    ResultRow row;
    row.experiment = fields[0];
    row.scheme = fields[1];
    row.metric = fields[3];
    try {
      row.snr_db = std::stod(fields[2]);
      row.value = std::stod(fields[4]);
      row.trials = std::stoll(fields[5]);
      row.errors = std::stoll(fields[6]);
      row.seed = std::stoull(fields[7]);
    } catch (const std::exception&) {
      throw IoError("read_rows_csv: malformed row '" + line + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ResultRecord read_record_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_record_json: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("read_record_json: '" + path + "': " + e.what());
  }
  ResultRecord rec;
  try {
    rec.spec = spec_from_json(j.at("metadata"));
    rec.version = j.at("metadata").at("version").get<std::string>();
    rec.timestamp = j.at("metadata").at("timestamp").get<std::string>();
    rec.redraws = j.at("metadata").at("redraws").get<long long>();
    for (const auto& r : j.at("rows")) rec.rows.push_back(row_from_json(r));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("read_record_json: '" + path + "': " + e.what());
  }
  return rec;
}

}  // namespace mimo
