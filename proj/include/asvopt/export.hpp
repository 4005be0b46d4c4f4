#pragma once

// CSV export of simulation results. Numbers use the shortest round-trip
// decimal form, so identical results give byte-identical files.

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>

#include "asvopt/detail/numbers.hpp"
#include "asvopt/error.hpp"
#include "asvopt/harness.hpp"

namespace asvopt {

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

inline void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace detail

inline void write_trace_csv(std::ostream& out, const SimResult& r) {
  using detail::format_number;
  out << "time_s,soc_wh,velocity_ms,p_in_w\n";
  for (std::size_t k = 0; k < r.soc_trace.size(); ++k)
    out << format_number(static_cast<double>(k) * r.dt) << ',' << format_number(r.soc_trace[k])
        << ',' << format_number(r.velocity_trace[k]) << ',' << format_number(r.p_in_trace[k])
        << '\n';
}

inline void write_iterations_csv(std::ostream& out, const SimResult& r) {
  using detail::format_number;
  out << "iteration,u_hat,p1,terminal_soc_wh\n";
  for (const auto& it : r.per_iteration)
    out << it.iteration << ',' << format_number(it.u_hat) << ',' << format_number(it.p1) << ','
        << format_number(it.terminal_soc) << '\n';
}

inline void write_summary_csv(std::ostream& out, const SimResult& r) {
  using detail::format_number;
  out << "strategy,steps,dt_s,distance_m,initial_soc_wh,terminal_soc_wh,violation_x2,"
         "violation_peak_wh,curtailed_wh,shortfall_wh,failed,constant_speed_ms,mpc_replans,"
         "mpc_fallbacks,wall_time_s\n";
  out << to_string(r.strategy) << ',' << r.soc_trace.size() << ',' << format_number(r.dt) << ','
      << format_number(r.distance) << ',' << format_number(r.initial_soc) << ','
      << format_number(r.terminal_soc) << ',' << format_number(r.violation.x2) << ','
      << format_number(r.violation.peak_wh) << ',' << format_number(r.curtailed_wh) << ','
      << format_number(r.shortfall_wh) << ',' << (r.failed ? 1 : 0) << ','
      << format_number(r.constant_speed) << ',' << r.mpc_replans << ',' << r.mpc_fallbacks << ','
      << format_number(r.wall_time) << '\n';
}

/// Midnight-to-midnight means of speed and SOC; a trailing partial day is
/// averaged over the steps it has.
inline void write_daily_csv(std::ostream& out, const SimResult& r, double day = 86400.0) {
  using detail::format_number;
  out << "day,mean_velocity_ms,mean_soc_wh,distance_m\n";
  const auto per_day = static_cast<std::size_t>(std::llround(day / r.dt));
  if (per_day == 0) return;
  for (std::size_t start = 0, d = 0; start < r.soc_trace.size(); start += per_day, ++d) {
    const std::size_t end = std::min(start + per_day, r.soc_trace.size());
    double su = 0.0;
    double sb = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      su += r.velocity_trace[k];
      sb += r.soc_trace[k];
    }
    const double count = static_cast<double>(end - start);
    out << d << ',' << format_number(su / count) << ',' << format_number(sb / count) << ','
        << format_number(su * r.dt) << '\n';
  }
}

/// Writes trace.csv, iterations.csv, summary.csv and daily.csv into `dir`.
inline void export_traces(const SimResult& r, const std::filesystem::path& dir) {
  detail::ensure_dir(dir);
  const auto write = [&](const char* name, auto&& body) {
    const auto path = dir / name;
    auto out = detail::open_output(path);
    body(out);
    detail::close_output(out, path);
  };
  write("trace.csv", [&](std::ostream& o) { write_trace_csv(o, r); });
  write("iterations.csv", [&](std::ostream& o) { write_iterations_csv(o, r); });
  write("summary.csv", [&](std::ostream& o) { write_summary_csv(o, r); });
  write("daily.csv", [&](std::ostream& o) { write_daily_csv(o, r); });
}

inline void write_comparison_csv(std::ostream& out, const Comparison& c) {
  using detail::format_number;
  out << "strategy,distance_m,terminal_soc_wh,violation_x2,violation_peak_wh,wall_time_s\n";
  for (const auto& row : c.rows)
    out << to_string(row.strategy) << ',' << format_number(row.distance) << ','
        << format_number(row.terminal_soc) << ',' << format_number(row.violation_x2) << ','
        << format_number(row.violation_peak_wh) << ',' << format_number(row.wall_time) << '\n';
}

/// Cumulative distance after each step, one column per strategy.
inline void write_distance_csv(std::ostream& out, const Comparison& c) {
  using detail::format_number;
  out << "time_s";
  for (const auto& r : c.results) out << ',' << to_string(r.strategy);
  out << '\n';
  if (c.results.empty()) return;
  const std::size_t n = c.results.front().velocity_trace.size();
  const double dt = c.results.front().dt;
  std::vector<double> total(c.results.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    out << format_number(static_cast<double>(k + 1) * dt);
    for (std::size_t s = 0; s < c.results.size(); ++s) {
      total[s] += c.results[s].velocity_trace[k] * dt;
      out << ',' << format_number(total[s]);
    }
    out << '\n';
  }
}

inline void export_comparison(const Comparison& c, const std::filesystem::path& dir) {
  detail::ensure_dir(dir);
  for (const auto& [name, fn] :
       {std::pair{"comparison.csv", &write_comparison_csv}, std::pair{"distance.csv", &write_distance_csv}}) {
    const auto path = dir / name;
    auto out = detail::open_output(path);
    fn(out, c);
    detail::close_output(out, path);
  }
}

}  // namespace asvopt
