#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "asvopt/barrier.hpp"
#include "asvopt/solar.hpp"
#include "asvopt/vessel.hpp"

namespace testing {

/// Piecewise-constant profile over [0, span] with segments of 0.5 to 6 h and
/// levels uniform in [0, p_max].
inline asvopt::SolarProfile random_profile(std::mt19937_64& rng, double span, double p_max) {
  std::uniform_real_distribution<double> len(1800.0, 6.0 * 3600.0);
  std::uniform_real_distribution<double> level(0.0, p_max);
  std::vector<asvopt::SolarSample> s;
  for (double t = 0.0; t < span; t += len(rng)) s.push_back({t, level(rng)});
  s.push_back({span, s.back().power_w});
  return asvopt::SolarProfile(std::move(s), asvopt::Interpolation::hold);
}

/// Largest SOC change a single step can produce.
inline double one_step_bound(double p_max, const asvopt::VesselParams& p, double dt) {
  return (p_max + asvopt::power_draw(p.u_max, p)) * dt / asvopt::seconds_per_hour;
}

/// O(n^2) reference for the suffix pass: b_min + max(0, max_{j>=i} c[j] - c[i]).
inline std::vector<double> brute_lower(const std::vector<double>& deficit, double b_min) {
  std::vector<double> out(deficit.size());
  for (std::size_t i = 0; i < deficit.size(); ++i) {
    double best = 0.0;
    for (std::size_t j = i; j < deficit.size(); ++j) best = std::max(best, deficit[j] - deficit[i]);
    out[i] = b_min + best;
  }
  return out;
}

inline std::vector<double> brute_upper(const std::vector<double>& surplus, double b_max) {
  std::vector<double> out(surplus.size());
  for (std::size_t i = 0; i < surplus.size(); ++i) {
    double best = 0.0;
    for (std::size_t j = i; j < surplus.size(); ++j) best = std::max(best, surplus[j] - surplus[i]);
    out[i] = b_max - best;
  }
  return out;
}

/// Forward-Euler rollout at fixed speed from grid index i0. The SOC is
/// clamped only on the side the test does not examine; returns the extreme
/// reached on the examined side (min when `lower`, max otherwise).
inline double rollout_extreme(const asvopt::SolarProfile& prof, const asvopt::VesselParams& p,
                              const asvopt::TimeGrid& g, std::size_t i0, double b0, double u,
                              bool lower) {
  double b = b0;
  double extreme = b0;
  const double draw = asvopt::power_draw(u, p);
  for (std::size_t k = i0; k < g.intervals; ++k) {
    b += (prof.sample(g.time(k)) - draw) * g.step / asvopt::seconds_per_hour;
    if (lower) {
      b = std::min(b, p.b_max);
      extreme = std::min(extreme, b);
    } else {
      b = std::max(b, p.b_min);
      extreme = std::max(extreme, b);
    }
  }
  return extreme;
}

}  // namespace testing
