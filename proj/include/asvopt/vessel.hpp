#pragma once

#include <algorithm>
#include <string>

#include "asvopt/detail/numbers.hpp"
#include "asvopt/error.hpp"

namespace asvopt {

inline constexpr double seconds_per_hour = 3600.0;

/// Energy model constants. Defaults are the SeaTrac SP-48 values.
struct VesselParams {
  double k_h = 10.0;     ///< hotel load (W)
  double k_m = 83.0;     ///< motor constant, P = k_m u^3 (kg/m)
  double b_min = 0.0;    ///< minimum SOC (Wh)
  double b_max = 6500.0; ///< maximum SOC (Wh)
  double u_min = 0.0;    ///< minimum speed (m/s)
  double u_max = 2.315;  ///< maximum speed (m/s)

  void validate() const {
    std::string bad;
    if (!(b_min < b_max)) bad += " b_min<b_max";
    if (!(u_min < u_max)) bad += " u_min<u_max";
    if (!(k_h >= 0.0)) bad += " k_h>=0";
    if (!(k_m > 0.0)) bad += " k_m>0";
    if (!bad.empty()) throw ValidationError("vessel parameters violate:" + bad);
  }

  double clamp_speed(double u) const { return std::clamp(u, u_min, u_max); }

  friend bool operator==(const VesselParams&, const VesselParams&) = default;
};

/// k_h + k_m u^3 in watts; u must lie within the speed limits.
inline double power_draw(double u, const VesselParams& p) {
  if (!(u >= p.u_min && u <= p.u_max))
    throw DomainError("power_draw: speed " + detail::format_number(u) + " outside [" +
                      detail::format_number(p.u_min) + ", " + detail::format_number(p.u_max) +
                      "]");
  return p.k_h + p.k_m * u * u * u;
}

struct SocState {
  double b = 0.0;      ///< state of charge (Wh)
  bool failed = false; ///< set once the floor was hit under net discharge

  friend bool operator==(const SocState&, const SocState&) = default;
};

/// One integration step together with what the physical clamps removed.
struct SocStep {
  SocState state;
  double curtailed_wh = 0.0;  ///< surplus dropped at b_max
  double shortfall_wh = 0.0;  ///< demand that could not be met below b_min
};

/// Forward-Euler SOC update over `dt` seconds, clamped to [b_min, b_max].
inline SocStep step_soc_detailed(SocState state, double u, double p_in, double dt,
                                 const VesselParams& p) {
  if (!(dt > 0.0)) throw DomainError("step_soc: dt must be > 0");
  if (!(p_in >= 0.0)) throw DomainError("step_soc: p_in must be >= 0");
  const double raw = state.b + (p_in - power_draw(u, p)) * dt / seconds_per_hour;
  SocStep out;
  out.state.failed = state.failed;
  if (raw > p.b_max) {
    out.state.b = p.b_max;
    out.curtailed_wh = raw - p.b_max;
  } else if (raw < p.b_min) {
    out.state.b = p.b_min;
    out.shortfall_wh = p.b_min - raw;
    out.state.failed = true;
  } else {
    out.state.b = raw;
  }
  return out;
}

inline SocState step_soc(SocState state, double u, double p_in, double dt, const VesselParams& p) {
  return step_soc_detailed(state, u, p_in, dt, p).state;
}

}  // namespace asvopt
