#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ccs/config_io.hpp"
#include "ccs/simulator.hpp"
#include "ccs/version.hpp"

namespace ccs {

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;  // 0 = hardware concurrency
  std::optional<std::uint64_t> seed_override;
  std::optional<std::vector<double>> snr_override;
  std::optional<int> trials_override;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// `snr_db,trials,pe,...` rows, one per SNR point, full round-trip precision.
inline std::string results_csv(const std::vector<ErrorStats>& stats) {
  std::string out = "snr_db,trials,pe,pe_ci95,missed_rate,false_alarm_rate,mean_decode_ms\n";
  for (const auto& s : stats) {
    out += detail::fmt_double(s.snr_db);
    out += ',' + std::to_string(s.trials);
    out += ',' + detail::fmt_double(s.pe);
    out += ',' + detail::fmt_double(s.pe_ci95);
    out += ',' + detail::fmt_double(s.missed_rate);
    out += ',' + detail::fmt_double(s.false_alarm_rate);
    out += ',' + detail::fmt_double(s.mean_decode_ms);
    out += '\n';
  }
  return out;
}

inline nlohmann::json run_manifest(const ExperimentConfig& cfg,
                                   const std::vector<ErrorStats>& stats,
                                   double duration_seconds) {
  nlohmann::json m;
  m["tool"] = "ccs_sim";
  m["version"] = std::string(kVersion);
  m["master_seed"] = cfg.master_seed;
  m["duration_seconds"] = duration_seconds;
  m["config"] = config_echo(cfg);
  auto& per = m["per_snr"] = nlohmann::json::array();
  for (const auto& s : stats)
    per.push_back({{"snr_db", s.snr_db},
                   {"trials", s.trials},
                   {"nonconverged_slots", s.nonconverged_slots},
                   {"mean_decode_ms", s.mean_decode_ms}});
  return m;
}

namespace detail {

inline void write_atomically(const std::filesystem::path& target, const std::string& data) {
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << data;
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace detail

// Loads the config, applies overrides, runs the sweep, and writes
// results.csv plus manifest.json into out_dir. Exit codes: 0 success,
// 1 configuration error, 2 runtime error. Nothing is written on failure.
inline int run_app(const RunOptions& opt, std::ostream& log = std::cerr) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(opt.config_path);
    if (opt.seed_override) cfg.master_seed = *opt.seed_override;
    if (opt.snr_override) cfg.snr_db = *opt.snr_override;
    if (opt.trials_override) cfg.trials = *opt.trials_override;
    cfg.validate();
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    int threads = opt.threads > 0
                      ? opt.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::filesystem::create_directories(opt.out_dir);

    auto t0 = std::chrono::steady_clock::now();
    auto stats = run_experiment(cfg, threads, [&](const ErrorStats& s) {
      log << "snr " << s.snr_db << " dB: pe=" << s.pe << " missed=" << s.missed_rate
          << " (" << s.trials << " trials, mean decode " << s.mean_decode_ms << " ms)\n";
    });
    double dur = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    detail::write_atomically(std::filesystem::path(opt.out_dir) / "results.csv",
                             results_csv(stats));
    detail::write_atomically(std::filesystem::path(opt.out_dir) / "manifest.json",
                             run_manifest(cfg, stats, dur).dump(2) + "\n");
    return 0;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ccs
