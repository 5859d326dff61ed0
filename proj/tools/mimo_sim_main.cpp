// SPDX-License-Identifier: Apache-2.0
// Command line front end: experiment subcommands that fill an
// ExperimentSpec, plus a selftest (invariant suites and config smoke
// checks) and a micro-benchmark. Exit codes: 0 success, 1 selftest
// failure, 2 configuration problem, 3 numerical failure, 4 I/O failure.
#include <algorithm>
#include <climits>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mimo/bench.hpp"
#include "mimo/errors.hpp"
#include "mimo/experiments.hpp"
#include "mimo/selftest.hpp"
#include "mimo/version.hpp"

namespace {

struct CliState {
  mimo::ExperimentSpec spec;
  std::map<std::string, std::string> snr_by_cmd;  // defaults differ per kind
  std::string schemes_text;
  std::string config_path;
  std::string out = "-";
  std::string format_text = "csv";
  // selftest / bench extras
  std::string configs_dir = "configs";
  bool skip_configs = false;
  int bench_streams = 4;
};

void add_common_output(CLI::App* cmd, CliState& st) {
  cmd->add_option("--out", st.out, "Output path, or - for stdout")
      ->capture_default_str();
  cmd->add_option("--format", st.format_text, "Output format: csv or json")
      ->capture_default_str();
  cmd->add_option("--seed", st.spec.seed, "Master seed")->capture_default_str();
}

void add_config_option(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path,
                  "Read options from a key=value file; its kind key must "
                  "match this subcommand, and command line options win");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

long long to_ll(const std::string& key, const std::string& val) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
    return v;
  } catch (const std::exception&) {
    throw mimo::ConfigError("config key '" + key + "': cannot parse '" + val +
                            "' as an integer");
  }
}

int to_int(const std::string& key, const std::string& val) {
  const long long v = to_ll(key, val);
  if (v < INT_MIN || v > INT_MAX)
    throw mimo::ConfigError("config key '" + key + "': value out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& val) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
    return v;
  } catch (const std::exception&) {
    throw mimo::ConfigError("config key '" + key + "': cannot parse '" + val +
                            "' as an unsigned integer");
  }
}

// Applies a flat key=value file to one subcommand. A key is legal exactly
// when the subcommand has the matching --long option, and a value from the
// file is used only when that option was not given on the command line.
// The mandatory kind key must name the subcommand itself.
void apply_config_file(CLI::App& sub, CliState& st, const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw mimo::ConfigError("cannot open config file '" + path + "'");

  const std::string subname = sub.get_name();
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"rx", [&](auto& k, auto& v) { st.spec.n_rx = to_int(k, v); }},
      {"users", [&](auto& k, auto& v) { st.spec.n_users = to_int(k, v); }},
      {"snr", [&](auto&, auto& v) { st.snr_by_cmd[subname] = v; }},
      {"draws", [&](auto& k, auto& v) { st.spec.rate_draws = to_int(k, v); }},
      {"seed", [&](auto& k, auto& v) { st.spec.seed = to_u64(k, v); }},
      {"out", [&](auto&, auto& v) { st.out = v; }},
      {"format", [&](auto&, auto& v) { st.format_text = v; }},
      {"schemes", [&](auto&, auto& v) { st.schemes_text = v; }},
      {"radius", [&](auto& k, auto& v) { st.spec.radius = to_int(k, v); }},
      {"min-errors",
       [&](auto& k, auto& v) { st.spec.stop.min_bit_errors = to_ll(k, v); }},
      {"min-trials",
       [&](auto& k, auto& v) { st.spec.stop.min_trials = to_ll(k, v); }},
      {"max-trials",
       [&](auto& k, auto& v) { st.spec.stop.max_trials = to_ll(k, v); }},
      {"batch", [&](auto& k, auto& v) { st.spec.stop.batch = to_int(k, v); }},
      {"workers", [&](auto& k, auto& v) { st.spec.workers = to_int(k, v); }},
      {"streams-min",
       [&](auto& k, auto& v) { st.spec.streams_min = to_int(k, v); }},
      {"streams-max",
       [&](auto& k, auto& v) { st.spec.streams_max = to_int(k, v); }},
      {"users-min", [&](auto& k, auto& v) { st.spec.users_min = to_int(k, v); }},
      {"users-max", [&](auto& k, auto& v) { st.spec.users_max = to_int(k, v); }},
  };

  bool kind_seen = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw mimo::ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = unquote(trim(line.substr(eq + 1)));

    if (key == "kind") {
      kind_seen = true;
      if (val != subname)
        throw mimo::ConfigError("config kind '" + val +
                                "' does not match subcommand '" + subname + "'");
      continue;
    }
    const CLI::Option* opt = sub.get_option_no_throw("--" + key);
    const auto setter = setters.find(key);
    if (opt == nullptr || setter == setters.end())
      throw mimo::ConfigError(path + ":" + std::to_string(lineno) +
                              ": unknown key '" + key + "' for " + subname);
    if (opt->count() > 0) continue;  // explicit command line option wins
    setter->second(key, val);
  }
  if (!kind_seen)
    throw mimo::ConfigError("config file '" + path + "' has no kind key");
}

void add_geometry(CLI::App* cmd, CliState& st) {
  cmd->add_option("--rx", st.spec.n_rx, "Receive antennas (= streams) per user")
      ->capture_default_str();
  cmd->add_option("--users", st.spec.n_users, "Number of users")
      ->capture_default_str();
}

void add_snr(CLI::App* cmd, CliState& st, const char* def) {
  auto& slot = st.snr_by_cmd[cmd->get_name()];
  slot = def;
  cmd->add_option("--snr", slot, "SNR grid in dB: start:stop:step or value")
      ->capture_default_str();
}

// Builds the whole experiment command tree onto app. The same builder runs
// in the selftest smoke pass, so every shipped config file is parsed by
// exactly the code path users hit.
void build_app(CLI::App& app, CliState& st) {
  app.require_subcommand(1);
  app.set_version_flag("--version", mimo::kVersion);

  CLI::App* rates = app.add_subcommand(
      "rates", "Mean achievable-rate curves over random channel draws");
  add_config_option(rates, st);
  add_geometry(rates, st);
  add_snr(rates, st, "0:30:5");
  rates->add_option("--draws", st.spec.rate_draws, "Channel draws to average")
      ->capture_default_str();
  add_common_output(rates, st);

  CLI::App* ber = app.add_subcommand(
      "ber", "Monte Carlo bit error rate for the four transceiver schemes");
  add_config_option(ber, st);
  add_geometry(ber, st);
  add_snr(ber, st, "0:30:2");
  ber->add_option("--schemes", st.schemes_text,
                  "Comma list: lb-mu-sm, zf-mu-sm, zf-rx, ml-rx");
  ber->add_option("--radius", st.spec.radius, "Offset search radius")
      ->capture_default_str();
  ber->add_option("--min-errors", st.spec.stop.min_bit_errors,
                  "Bit errors required before a point may stop")
      ->capture_default_str();
  ber->add_option("--min-trials", st.spec.stop.min_trials,
                  "Trials required before a point may stop")
      ->capture_default_str();
  ber->add_option("--max-trials", st.spec.stop.max_trials,
                  "Hard trial cap per point")
      ->capture_default_str();
  ber->add_option("--batch", st.spec.stop.batch,
                  "Trials per scheduling batch (stop rule granularity)")
      ->capture_default_str();
  ber->add_option("--workers", st.spec.workers,
                  "Worker threads (0 = hardware)")
      ->capture_default_str();
  add_common_output(ber, st);

  CLI::App* ss = app.add_subcommand(
      "sweep-streams", "Rate curves for a range of per-user stream counts");
  add_config_option(ss, st);
  ss->add_option("--users", st.spec.n_users, "Number of users")
      ->capture_default_str();
  add_snr(ss, st, "10:10:1");
  ss->add_option("--streams-min", st.spec.streams_min, "Smallest stream count")
      ->capture_default_str();
  ss->add_option("--streams-max", st.spec.streams_max, "Largest stream count")
      ->capture_default_str();
  ss->add_option("--draws", st.spec.rate_draws, "Channel draws to average")
      ->capture_default_str();
  add_common_output(ss, st);

  CLI::App* su = app.add_subcommand(
      "sweep-users", "Rate curves for a range of user counts");
  add_config_option(su, st);
  su->add_option("--rx", st.spec.n_rx, "Receive antennas (= streams) per user")
      ->capture_default_str();
  add_snr(su, st, "10:10:1");
  su->add_option("--users-min", st.spec.users_min, "Smallest user count")
      ->capture_default_str();
  su->add_option("--users-max", st.spec.users_max, "Largest user count")
      ->capture_default_str();
  su->add_option("--draws", st.spec.rate_draws, "Channel draws to average")
      ->capture_default_str();
  add_common_output(su, st);

  CLI::App* self = app.add_subcommand(
      "selftest", "Run the invariant suites and smoke-parse shipped configs");
  self->add_option("--configs", st.configs_dir,
                   "Directory of .cfg files to smoke-check")
      ->capture_default_str();
  self->add_flag("--skip-configs", st.skip_configs,
                 "Only run the invariant suites");

  CLI::App* bench = app.add_subcommand(
      "bench", "Micro-benchmark the per-trial hot paths");
  bench->add_option("--streams", st.bench_streams, "Largest stream count")
      ->capture_default_str();
  bench->add_option("--radius", st.spec.radius, "Offset search radius")
      ->capture_default_str();
  add_common_output(bench, st);
}

mimo::ExperimentSpec finish_spec(CLI::App& app, CliState& st,
                                 const std::string& subname) {
  if (!st.config_path.empty())
    apply_config_file(*app.get_subcommand(subname), st, st.config_path);
  st.spec.kind = mimo::parse_experiment(subname);
  st.spec.snr = mimo::SnrGrid::parse(st.snr_by_cmd.at(subname));
  if (!st.schemes_text.empty())
    st.spec.schemes = mimo::parse_scheme_list(st.schemes_text);
  st.spec.validate();
  return st.spec;
}

int run_experiment_command(CLI::App& app, CliState& st,
                           const std::string& subname) {
  const mimo::ExperimentSpec spec = finish_spec(app, st, subname);
  const mimo::OutputFormat format = mimo::parse_format(st.format_text);
  const mimo::ResultRecord rec = mimo::run_experiment(spec);
  mimo::emit_results(rec, format, st.out);
  std::cerr << subname << ": " << rec.rows.size() << " rows"
            << (st.out == "-" ? "" : " -> " + st.out) << " (seed " << spec.seed
            << ", " << rec.redraws << " redraws)\n";
  return 0;
}

// Re-parses one shipped config through a fresh copy of the command tree,
// shrinks the workload knobs, runs it, and throws the writer's output away.
void smoke_check_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw mimo::IoError("selftest: cannot open '" + path.string() + "'");
  std::string line, kind;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line.substr(0, eq)) == "kind") kind = trim(line.substr(eq + 1));
  }
  if (kind.empty())
    throw mimo::ConfigError("selftest: '" + path.string() + "' has no kind key");

  CLI::App app{"smoke"};
  CliState st;
  build_app(app, st);
  const std::vector<std::string> args = {kind, "--config", path.string()};
  std::vector<const char*> argv = {"mimo-sim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  app.parse(static_cast<int>(argv.size()), argv.data());

  mimo::ExperimentSpec spec = finish_spec(app, st, kind);
  spec.rate_draws = std::min(spec.rate_draws, 4);
  spec.stop.min_bit_errors = 1;
  spec.stop.min_trials = std::min<long long>(spec.stop.min_trials, 32);
  spec.stop.max_trials = std::min<long long>(spec.stop.max_trials, 32);
  spec.stop.batch = std::min(spec.stop.batch, 32);
  spec.workers = 1;
  if (spec.kind == mimo::ExperimentKind::SweepStreams)
    spec.streams_max = std::min(spec.streams_max, spec.streams_min + 1);
  if (spec.kind == mimo::ExperimentKind::SweepUsers)
    spec.users_max = std::min(spec.users_max, spec.users_min + 1);
  const mimo::ResultRecord rec = mimo::run_experiment(spec);
  mimo::to_csv(rec);  // exercise the writer without touching the filesystem
}

int run_selftest(const CliState& st) {
  bool ok = mimo::run_invariant_suites(std::cout);
  if (!st.skip_configs) {
    namespace fs = std::filesystem;
    std::vector<fs::path> cfgs;
    if (fs::is_directory(st.configs_dir))
      for (const auto& entry : fs::directory_iterator(st.configs_dir))
        if (entry.path().extension() == ".cfg") cfgs.push_back(entry.path());
    std::sort(cfgs.begin(), cfgs.end());
    if (cfgs.empty()) {
      std::cout << "[FAIL] config-smoke (no .cfg files under '" << st.configs_dir
                << "')\n";
      ok = false;
    }
    for (const auto& path : cfgs) {
      try {
        smoke_check_config(path);
        std::cout << "[PASS] config-smoke " << path.filename().string() << '\n';
      } catch (const std::exception& e) {
        std::cout << "[FAIL] config-smoke " << path.filename().string() << ": "
                  << e.what() << '\n';
        ok = false;
      }
    }
  }
  std::cout << (ok ? "selftest: all suites passed\n"
                   : "selftest: FAILURES detected\n");
  return ok ? 0 : 1;
}

int run_bench_command(CliState& st) {
  const auto rows = mimo::run_bench(st.bench_streams, st.spec.radius, st.spec.seed);
  const mimo::ResultRecord rec = mimo::bench_record(rows, st.spec.seed);
  mimo::emit_results(rec, mimo::parse_format(st.format_text), st.out);
  std::cerr << "bench: " << rows.size() << " rows"
            << (st.out == "-" ? "" : " -> " + st.out) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiuser spatial-multiplexing downlink simulator"};
  CliState st;
  build_app(app, st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const char* name : {"rates", "ber", "sweep-streams", "sweep-users"})
      if (app.got_subcommand(name)) return run_experiment_command(app, st, name);
    if (app.got_subcommand("selftest")) return run_selftest(st);
    if (app.got_subcommand("bench")) return run_bench_command(st);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const mimo::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const mimo::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const mimo::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
