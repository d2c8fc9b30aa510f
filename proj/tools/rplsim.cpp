// rplsim command line: run, sweep, detect-rate, replay.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rplsim/rplsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

/// Failure that is the caller's fault (bad flags, unreadable inputs).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string scenario_path;
  std::vector<std::string> overrides;
  std::string csv_out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-s,--scenario", o.scenario_path, "Scenario JSON file");
  cmd->add_option("--set", o.overrides, "Override a scenario key, e.g. --set mac.collisions=false")
      ->take_all();
  cmd->add_option("--csv-out", o.csv_out, "CSV output path");
}

rplsim::Scenario load(const CommonOptions& o) {
  rplsim::Scenario sc = o.scenario_path.empty() ? rplsim::Scenario{}
                                                : rplsim::load_scenario(o.scenario_path);
  sc = rplsim::apply_overrides(sc, o.overrides);
  rplsim::validate(sc);
  return sc;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_report(const rplsim::MetricsReport& m) {
  std::cout << "dao_overhead        " << m.dao_overhead << "\n"
            << "avg_power_mw        " << fmt(m.avg_power_mw) << "\n"
            << "packet_loss_ratio   " << fmt(m.packet_loss_ratio) << "\n"
            << "avg_latency_s       " << (m.avg_latency_s ? fmt(*m.avg_latency_s) : "n/a") << "\n"
            << "attack_increments   " << m.attack_increments << "\n"
            << "alarms              " << m.alarms.size() << "\n";
  if (auto t = m.time_to_detect_s()) std::cout << "time_to_detect_s    " << fmt(*t) << "\n";
  std::cout << "transmissions      ";
  for (const auto& [kind, n] : m.transmissions) std::cout << " " << kind << "=" << n;
  std::cout << "\n";
}

std::vector<std::size_t> parse_sizes(const std::vector<std::size_t>& v) {
  if (v.empty()) throw UsageError("--sizes needs at least one value");
  for (auto n : v) {
    if (n < 2) throw UsageError("network sizes must be at least 2");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event RPL simulator with DAO induction attack and detection"};
  app.require_subcommand(1);

  // run
  CommonOptions run_opts;
  std::string trace_out, topology_out;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--trace-out", trace_out, "Write the event trace here");
  run_cmd->add_option("--topology-out", topology_out, "Write node positions here");

  // sweep
  CommonOptions sweep_opts;
  std::vector<std::size_t> sweep_sizes{20, 30, 40, 50};
  std::size_t sweep_seeds = 10;
  std::vector<std::string> sweep_modes{"storing", "non-storing"};
  std::string attack = "both";
  std::size_t sweep_k = 0;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string summary_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cross product of sizes, seeds, modes and attack");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--sizes", sweep_sizes, "Network sizes")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_seeds, "Seeds per size");
  sweep_cmd->add_option("--modes", sweep_modes, "storing and/or non-storing")->delimiter(',');
  sweep_cmd->add_option("--attack", attack, "on, off or both")
      ->check(CLI::IsMember({"on", "off", "both"}));
  sweep_cmd->add_option("--k", sweep_k, "Extra DAO parents");
  sweep_cmd->add_option("-j,--jobs", jobs, "Worker threads");
  sweep_cmd->add_option("--summary-out", summary_out, "Seed-averaged CSV output path");

  // detect-rate
  CommonOptions dr_opts;
  std::vector<std::size_t> dr_sizes{20, 30, 40, 50};
  std::size_t dr_seeds = 10;
  std::vector<std::size_t> dr_ks{0, 1, 2};
  std::string dr_summary_out;
  auto* dr_cmd = app.add_subcommand("detect-rate", "Analytic detection rate on converged DODAGs");
  add_common(dr_cmd, dr_opts);
  dr_cmd->add_option("--sizes", dr_sizes, "Network sizes")->delimiter(',');
  dr_cmd->add_option("--seeds", dr_seeds, "Topologies per size");
  dr_cmd->add_option("--k", dr_ks, "Values of k")->delimiter(',');
  dr_cmd->add_option("--summary-out", dr_summary_out, "Per-(n,k) mean CSV output path");

  // replay
  std::string replay_in, replay_csv;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute metrics from a saved trace");
  replay_cmd->add_option("trace", replay_in, "Trace file")->required();
  replay_cmd->add_option("--csv-out", replay_csv, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) {
      const auto sc = load(run_opts);
      const auto res = rplsim::run(sc);
      std::cout << "mode                " << rplsim::to_string(sc.mode) << "\n"
                << "nodes               " << res.topology.size() << "\n"
                << "attacker            "
                << (sc.attacker.enabled ? std::to_string(res.attacker) : "none") << "\n";
      print_report(res.report);
      if (!trace_out.empty()) write_file(trace_out, res.trace.str());
      if (!topology_out.empty()) {
        std::ofstream out(topology_out);
        if (!out) throw std::runtime_error("cannot write '" + topology_out + "'");
        res.topology.write(out);
      }
      if (!run_opts.csv_out.empty()) {
        rplsim::SweepRow row{sc.mode, res.topology.size(), sc.topology_seed, sc.attacker.enabled,
                             sc.detection.k, res.report, {}};
        write_file(run_opts.csv_out, rplsim::sweep_csv({row}));
      }
    } else if (*sweep_cmd) {
      const auto base = load(sweep_opts);
      std::vector<rplsim::Variant> variants;
      for (const auto& m : sweep_modes) {
        const auto mode = rplsim::parse_mode(m);
        if (attack != "on") variants.push_back({mode, false, sweep_k});
        if (attack != "off") variants.push_back({mode, true, sweep_k});
      }
      const auto rows =
          rplsim::sweep(base, parse_sizes(sweep_sizes), sweep_seeds, variants, jobs);
      const auto csv = rplsim::sweep_csv(rows);
      if (sweep_opts.csv_out.empty()) {
        std::cout << csv;
      } else {
        write_file(sweep_opts.csv_out, csv);
      }
      if (!summary_out.empty()) write_file(summary_out, rplsim::summary_csv(rows));
      std::size_t failed = 0;
      for (const auto& r : rows) failed += !r.report;
      std::cerr << rows.size() << " runs, " << failed << " failed\n";
      if (failed) return kExitRuntime;
    } else if (*dr_cmd) {
      const auto base = load(dr_opts);
      const auto rows = rplsim::detect_rate_sweep(base, parse_sizes(dr_sizes), dr_seeds, dr_ks);
      const auto csv = rplsim::detect_rate_csv(rows);
      if (dr_opts.csv_out.empty()) {
        std::cout << csv;
      } else {
        write_file(dr_opts.csv_out, csv);
      }
      if (!dr_summary_out.empty()) write_file(dr_summary_out, rplsim::detect_rate_summary_csv(rows));
      std::cerr << rplsim::detect_rate_summary_csv(rows);
      for (const auto& r : rows) {
        if (!r.error.empty()) return kExitRuntime;
      }
    } else if (*replay_cmd) {
      std::ifstream in(replay_in);
      if (!in) throw UsageError("cannot open trace '" + replay_in + "'");
      const auto trace = rplsim::Trace::read(in);
      const auto report = rplsim::replay(trace);
      print_report(report);
      if (!replay_csv.empty()) {
        const auto [sc, topo] = rplsim::scenario_from_trace(trace);
        rplsim::SweepRow row{sc.mode, topo.size(), sc.topology_seed, sc.attacker.enabled,
                             sc.detection.k, report, {}};
        write_file(replay_csv, rplsim::sweep_csv({row}));
      }
    }
  } catch (const rplsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
