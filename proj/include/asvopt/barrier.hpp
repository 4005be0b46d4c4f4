#pragma once

// Time-varying SOC bounds for persistent feasibility.
//
// The lower bound at t1 is the largest net discharge the vessel can face
// over [t1, t_f] while idling; the upper bound sits below b_max by the
// largest net charge it can face over [t1, t_f] while running flat out.
// Holding b_l(t) <= b(t) <= b_u(t) therefore always leaves an admissible
// control (u_min or u_max) that keeps the physical limits satisfied later.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "asvopt/detail/numbers.hpp"
#include "asvopt/error.hpp"
#include "asvopt/solar.hpp"
#include "asvopt/vessel.hpp"

namespace asvopt {

/// Uniform grid start + k*step for k = 0..intervals.
struct TimeGrid {
  double start = 0.0;
  double step = 360.0;
  std::size_t intervals = 0;

  std::size_t size() const noexcept { return intervals + 1; }
  double time(std::size_t k) const noexcept { return start + static_cast<double>(k) * step; }
  double end() const noexcept { return time(intervals); }
  double span() const noexcept { return static_cast<double>(intervals) * step; }

  void validate() const {
    if (!(step > 0.0)) throw DomainError("time grid: step must be > 0");
    if (intervals == 0) throw DomainError("time grid: needs at least one interval");
  }
};

namespace detail {

inline void require_coverage(const SolarProfile& profile, double t0, double t1) {
  if (!profile.covers(t0, t1))
    throw DomainError("solar profile [" + format_number(profile.first_time()) + ", " +
                      format_number(profile.last_time()) + "] does not cover grid [" +
                      format_number(t0) + ", " + format_number(t1) + "]");
}

/// Cumulative trapezoidal integral of `rate(p_in)` over the grid, in Wh.
template <class Rate>
std::vector<double> cumulative_energy(const SolarProfile& profile, const TimeGrid& grid,
                                      Rate rate) {
  grid.validate();
  require_coverage(profile, grid.start, grid.end() - grid.step);
  std::vector<double> out(grid.size(), 0.0);
  double prev = rate(profile.sample(grid.time(0)));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double cur = rate(profile.sample(grid.time(k)));
    out[k] = out[k - 1] + 0.5 * (prev + cur) * grid.step / seconds_per_hour;
    prev = cur;
  }
  return out;
}

}  // namespace detail

/// For each i, max(0, max_{j >= i} c[j] - c[i]) by one backward pass.
inline std::vector<double> future_rise(std::span<const double> c) {
  std::vector<double> out(c.size(), 0.0);
  if (c.empty()) return out;
  double best = c.back();
  for (std::size_t i = c.size(); i-- > 0;) {
    best = std::max(best, c[i]);
    out[i] = std::max(0.0, best - c[i]);
  }
  return out;
}

/// Cumulative idle-discharge energy: integral of (k_h - P_in), Wh.
inline std::vector<double> energy_deficit(const SolarProfile& profile, const VesselParams& params,
                                          const TimeGrid& grid) {
  return detail::cumulative_energy(profile, grid,
                                   [&](double p_in) { return params.k_h - p_in; });
}

/// Cumulative full-speed net charge: integral of (P_in - k_h - k_m u_max^3), Wh.
inline std::vector<double> energy_surplus(const SolarProfile& profile, const VesselParams& params,
                                          const TimeGrid& grid) {
  const double full_draw = power_draw(params.u_max, params);
  return detail::cumulative_energy(profile, grid,
                                   [&](double p_in) { return p_in - full_draw; });
}

inline std::vector<double> lower_barrier(const SolarProfile& profile, const VesselParams& params,
                                         const TimeGrid& grid) {
  auto rise = future_rise(energy_deficit(profile, params, grid));
  for (double& v : rise) v += params.b_min;
  return rise;
}

inline std::vector<double> upper_barrier(const SolarProfile& profile, const VesselParams& params,
                                         const TimeGrid& grid) {
  auto rise = future_rise(energy_surplus(profile, params, grid));
  for (double& v : rise) v = params.b_max - v;
  return rise;
}

enum class BarrierMode { horizon, periodic_day };

/// Tabulated (b_l, b_u) on a uniform grid. Periodic envelopes cover one
/// period [start, start + span] and wrap; others hold their end values.
struct BarrierEnvelope {
  TimeGrid grid;
  std::vector<double> lower;
  std::vector<double> upper;
  bool periodic = false;

  double lower_at(double t) const { return lookup(lower, t); }
  double upper_at(double t) const { return lookup(upper, t); }

  double min_gap() const {
    double gap = upper.front() - lower.front();
    for (std::size_t i = 1; i < lower.size(); ++i) gap = std::min(gap, upper[i] - lower[i]);
    return gap;
  }

 private:
  double lookup(const std::vector<double>& v, double t) const {
    double x = (t - grid.start) / grid.step;
    if (periodic) {
      const double n = static_cast<double>(grid.intervals);
      x = std::fmod(x, n);
      if (x < 0.0) x += n;
    }
    if (x <= 0.0) return v.front();
    if (x >= static_cast<double>(grid.intervals)) return v.back();
    const double cell = std::floor(x);
    const auto i = static_cast<std::size_t>(cell);
    const double w = x - cell;
    if (w == 0.0) return v[i];
    return v[i] + w * (v[i + 1] - v[i]);
  }
};

namespace detail {

inline void check_envelope(const BarrierEnvelope& env) {
  for (std::size_t i = 0; i < env.lower.size(); ++i) {
    if (env.lower[i] > env.upper[i])
      throw ValidationError("barriers cross at t=" + format_number(env.grid.time(i)) +
                            ": b_l=" + format_number(env.lower[i]) +
                            " > b_u=" + format_number(env.upper[i]) +
                            " (no persistently feasible SOC)");
  }
}

}  // namespace detail

/// Horizon mode uses the profile over the grid as given (b_l = b_min and
/// b_u = b_max at the final point). Periodic-day mode treats the grid as one
/// nominal period, repeats the profile's first period over a two-period
/// window for the look-ahead, and returns a wrapping envelope.
inline BarrierEnvelope build_envelope(const SolarProfile& profile, const VesselParams& params,
                                      const TimeGrid& grid, BarrierMode mode) {
  params.validate();
  grid.validate();
  BarrierEnvelope env;
  env.grid = grid;
  if (mode == BarrierMode::horizon) {
    env.lower = lower_barrier(profile, params, grid);
    env.upper = upper_barrier(profile, params, grid);
    detail::check_envelope(env);
    return env;
  }

  const double span = grid.span();
  detail::require_coverage(profile, grid.start, grid.end() - grid.step);
  // Nominal day, repeated: sample the first period of the profile.
  std::vector<SolarSample> day;
  day.reserve(grid.intervals);
  for (std::size_t k = 0; k < grid.intervals; ++k)
    day.push_back({grid.time(k), profile.sample(grid.time(k))});
  const SolarProfile nominal(std::move(day), Interpolation::linear, span);

  TimeGrid twice = grid;
  twice.intervals = 2 * grid.intervals;
  const auto lo = lower_barrier(nominal, params, twice);
  const auto hi = upper_barrier(nominal, params, twice);
  env.lower.assign(lo.begin(), lo.begin() + static_cast<std::ptrdiff_t>(grid.size()));
  env.upper.assign(hi.begin(), hi.begin() + static_cast<std::ptrdiff_t>(grid.size()));
  env.lower.back() = env.lower.front();
  env.upper.back() = env.upper.front();
  env.periodic = true;
  detail::check_envelope(env);
  return env;
}

/// `time_s,b_l_wh,b_u_wh` rows, one per grid point.
inline void write_envelope_csv(std::ostream& out, const BarrierEnvelope& env) {
  out << "time_s,b_l_wh,b_u_wh\n";
  for (std::size_t i = 0; i < env.lower.size(); ++i)
    out << detail::format_number(env.grid.time(i)) << ',' << detail::format_number(env.lower[i])
        << ',' << detail::format_number(env.upper[i]) << '\n';
}

}  // namespace asvopt
