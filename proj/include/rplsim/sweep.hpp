#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "detection.hpp"
#include "dodag.hpp"
#include "scenario.hpp"
#include "sim_engine.hpp"

namespace rplsim {

struct Variant {
  Mode mode = Mode::NonStoring;
  bool attack = false;
  std::size_t k = 0;
};

struct SweepRow {
  Mode mode = Mode::NonStoring;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool attack = false;
  std::size_t k = 0;
  std::optional<MetricsReport> report;
  std::string error;
};

/// Scenario for one sweep cell; seeds are `base` seeds offset by `seed_index`.
inline Scenario sweep_scenario(const Scenario& base, std::size_t n, std::size_t seed_index,
                               const Variant& v) {
  Scenario sc = base;
  sc.nodes = n;
  sc.topology_seed = base.topology_seed + seed_index;
  sc.scenario_seed = base.scenario_seed + seed_index;
  sc.mode = v.mode;
  sc.attacker.enabled = v.attack;
  sc.detection.k = v.k;
  return sc;
}

/// Runs `count` independent jobs on up to `jobs` threads; results land by
/// index so output order never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  for (unsigned t = 0; t < nthreads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

/// Cross product sizes x seeds x variants, one row per run. A failing run
/// records its error and the sweep continues.
inline std::vector<SweepRow> sweep(const Scenario& base, const std::vector<std::size_t>& sizes,
                                   std::size_t seeds_per_size, const std::vector<Variant>& variants,
                                   unsigned jobs = 1) {
  std::vector<SweepRow> rows;
  std::vector<Scenario> scenarios;
  for (std::size_t n : sizes) {
    for (std::size_t i = 0; i < seeds_per_size; ++i) {
      for (const auto& v : variants) {
        Scenario sc = sweep_scenario(base, n, i, v);
        rows.push_back(SweepRow{v.mode, n, sc.topology_seed, v.attack, v.k, std::nullopt, {}});
        scenarios.push_back(std::move(sc));
      }
    }
  }
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    try {
      rows[i].report = run(scenarios[i]).report;
    } catch (const std::exception& ex) {
      rows[i].error = ex.what();
    }
  });
  return rows;
}

inline std::vector<Variant> standard_variants(std::size_t k = 0) {
  return {{Mode::Storing, false, k},
          {Mode::Storing, true, k},
          {Mode::NonStoring, false, k},
          {Mode::NonStoring, true, k}};
}

namespace detail {
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace detail

inline const char* kSweepHeader =
    "mode,n,seed,attack,k,dao_overhead,avg_power_mw,packet_loss_ratio,avg_latency_s,detected,"
    "time_to_detect_s,error";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.mode)) + "," + std::to_string(r.n) + "," +
           std::to_string(r.seed) + "," + (r.attack ? "1" : "0") + "," + std::to_string(r.k) + ",";
    if (r.report) {
      const auto& m = *r.report;
      out += std::to_string(m.dao_overhead) + "," + detail::num(m.avg_power_mw) + "," +
             detail::num(m.packet_loss_ratio) + "," +
             (m.avg_latency_s ? detail::num(*m.avg_latency_s) : "") + "," +
             (m.detected() ? "1" : "0") + "," +
             (m.time_to_detect_s() ? detail::num(*m.time_to_detect_s()) : "") + ",";
    } else {
      std::string err = r.error;
      for (char& c : err) {
        if (c == ',' || c == '\n') c = ';';
      }
      out += ",,,,,," + err;
    }
    out += "\n";
  }
  return out;
}

struct SummaryCell {
  std::size_t runs = 0;
  double dao_overhead = 0.0;
  double avg_power_mw = 0.0;
  double packet_loss_ratio = 0.0;
  double avg_latency_s = 0.0;
  std::size_t latency_runs = 0;
  std::size_t detected = 0;
};

using SummaryKey = std::tuple<int, std::size_t, bool, std::size_t>;  // mode, n, attack, k

/// Seed-averaged metrics per (mode, n, attack, k), skipping failed runs.
inline std::map<SummaryKey, SummaryCell> summarize(const std::vector<SweepRow>& rows) {
  std::map<SummaryKey, SummaryCell> cells;
  for (const auto& r : rows) {
    if (!r.report) continue;
    auto& c = cells[{static_cast<int>(r.mode), r.n, r.attack, r.k}];
    ++c.runs;
    c.dao_overhead += static_cast<double>(r.report->dao_overhead);
    c.avg_power_mw += r.report->avg_power_mw;
    c.packet_loss_ratio += r.report->packet_loss_ratio;
    if (r.report->avg_latency_s) {
      c.avg_latency_s += *r.report->avg_latency_s;
      ++c.latency_runs;
    }
    c.detected += r.report->detected();
  }
  for (auto& [key, c] : cells) {
    const double runs = static_cast<double>(c.runs);
    c.dao_overhead /= runs;
    c.avg_power_mw /= runs;
    c.packet_loss_ratio /= runs;
    if (c.latency_runs) c.avg_latency_s /= static_cast<double>(c.latency_runs);
  }
  return cells;
}

inline std::string summary_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "mode,n,attack,k,runs,mean_dao_overhead,mean_avg_power_mw,mean_packet_loss_ratio,"
      "mean_avg_latency_s,detected_runs\n";
  for (const auto& [key, c] : summarize(rows)) {
    const auto& [mode, n, attack, k] = key;
    out += std::string(to_string(static_cast<Mode>(mode))) + "," + std::to_string(n) + "," +
           (attack ? "1" : "0") + "," + std::to_string(k) + "," + std::to_string(c.runs) + "," +
           detail::num(c.dao_overhead) + "," + detail::num(c.avg_power_mw) + "," +
           detail::num(c.packet_loss_ratio) + "," + detail::num(c.avg_latency_s) + "," +
           std::to_string(c.detected) + "\n";
  }
  return out;
}

// --- detection-rate experiment ----------------------------------------------

struct DetectRateRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  DetectionRate rate;
  std::string error;
};

/// Analytic detection rate per (size, seed, k) on converged DODAGs.
inline std::vector<DetectRateRow> detect_rate_sweep(const Scenario& base,
                                                    const std::vector<std::size_t>& sizes,
                                                    std::size_t seeds_per_size,
                                                    const std::vector<std::size_t>& ks) {
  std::vector<DetectRateRow> rows;
  for (std::size_t n : sizes) {
    for (std::size_t i = 0; i < seeds_per_size; ++i) {
      const std::uint64_t seed = base.topology_seed + i;
      try {
        const Topology t = generate_topology(n, seed, base.radio, base.topology_attempts);
        for (std::size_t k : ks) {
          ProtocolParams p = base.protocol();
          p.extra_dao_parents = k;
          rows.push_back({n, seed, k, detection_rate(build_dodag(t, p)), {}});
        }
      } catch (const std::exception& ex) {
        for (std::size_t k : ks) rows.push_back({n, seed, k, {}, ex.what()});
      }
    }
  }
  return rows;
}

inline std::string detect_rate_csv(const std::vector<DetectRateRow>& rows) {
  std::string out = "n,seed,k,detection_rate,vacuous,error\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.seed) + "," + std::to_string(r.k) + ",";
    if (r.error.empty()) {
      out += detail::num(r.rate.rate) + "," + (r.rate.vacuous ? "1" : "0") + ",";
    } else {
      out += ",," + r.error;
    }
    out += "\n";
  }
  return out;
}

/// Mean detection rate per (n, k) over the successful rows.
inline std::map<std::pair<std::size_t, std::size_t>, double> mean_detection_rates(
    const std::vector<DetectRateRow>& rows) {
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    auto& a = acc[{r.n, r.k}];
    a.first += r.rate.rate;
    ++a.second;
  }
  std::map<std::pair<std::size_t, std::size_t>, double> out;
  for (const auto& [key, a] : acc) out[key] = a.first / static_cast<double>(a.second);
  return out;
}

inline std::string detect_rate_summary_csv(const std::vector<DetectRateRow>& rows) {
  std::string out = "n,k,mean_detection_rate\n";
  for (const auto& [key, mean] : mean_detection_rates(rows)) {
    out += std::to_string(key.first) + "," + std::to_string(key.second) + "," +
           detail::num(mean) + "\n";
  }
  return out;
}

}  // namespace rplsim
