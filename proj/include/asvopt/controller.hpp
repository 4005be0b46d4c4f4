#pragma once

// Switching speed law and the iterative-learning estimate of its interior
// speed.
//
// Inside the barriers the optimal speed is constant and determined by the
// SOC costate p1 through dH/du = 0:  u = sqrt(-1 / (3 k_m p1)).  On contact
// with b_u the vessel runs at u_max; on contact with b_l it idles at u_min.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <cstddef>
#include <string>
#include <vector>

#include "asvopt/barrier.hpp"
#include "asvopt/detail/numbers.hpp"
#include "asvopt/error.hpp"
#include "asvopt/vessel.hpp"

namespace asvopt {

/// SOC costate p1 (distance per joule of stored energy, negative) and the
/// violation-state costate p2, which stays constant and is kept only for
/// reporting.
struct Costate {
  double p1 = -1.0;
  double p2 = 0.0;
};

inline double velocity_from_costate(Costate c, const VesselParams& params) {
  if (!(c.p1 < 0.0))
    throw DomainError("velocity_from_costate: p1 must be < 0, got " +
                      detail::format_number(c.p1));
  return params.clamp_speed(std::sqrt(-1.0 / (3.0 * params.k_m * c.p1)));
}

inline Costate costate_from_velocity(double u, const VesselParams& params) {
  if (!(u > 0.0))
    throw DomainError("costate_from_velocity: speed must be > 0, got " + detail::format_number(u));
  return Costate{-1.0 / (3.0 * params.k_m * u * u), 0.0};
}

/// dH/du = -1 - 3 k_m p1 u^2.
inline double stationarity_residual(double u, Costate c, const VesselParams& params) {
  return -1.0 - 3.0 * params.k_m * c.p1 * u * u;
}

inline double switching_control(double b, double t, const BarrierEnvelope& env, double u_hat,
                                const VesselParams& params) {
  if (b >= env.upper_at(t)) return params.u_max;
  if (b <= env.lower_at(t)) return params.u_min;
  return u_hat;
}

namespace detail {

inline double blend(double b, double lo, double hi, double u_hat, double delta,
                    const VesselParams& params) {
  if (b >= hi) return params.u_max;
  if (b <= lo) return params.u_min;
  const double from_lo = b - lo;
  if (from_lo < delta) {
    const double w = from_lo / delta;
    return params.clamp_speed(w * u_hat + (1.0 - w) * params.u_min);
  }
  const double from_hi = hi - b;
  if (from_hi < delta) {
    const double w = from_hi / delta;
    return params.clamp_speed(w * u_hat + (1.0 - w) * params.u_max);
  }
  return u_hat;
}

}  // namespace detail

/// Switching law with linear bands of width `delta` (Wh) inside each
/// barrier, so the command is continuous in b. The bands must not overlap
/// at t.
inline double buffered_control(double b, double t, const BarrierEnvelope& env, double u_hat,
                               double delta, const VesselParams& params) {
  if (!(delta > 0.0)) throw ConfigError("buffered_control: delta must be > 0");
  const double lo = env.lower_at(t);
  const double hi = env.upper_at(t);
  if (!(2.0 * delta < hi - lo))
    throw ConfigError("buffered_control: buffers overlap at t=" + detail::format_number(t));
  return detail::blend(b, lo, hi, u_hat, delta, params);
}

/// Buffered law bound to an envelope; the band width is checked against the
/// narrowest gap once, at construction.
class BufferedSwitchingLaw {
 public:
  BufferedSwitchingLaw(const BarrierEnvelope& env, double delta, const VesselParams& params)
      : env_(&env), delta_(delta), params_(params) {
    if (!(delta > 0.0)) throw ConfigError("controller.delta must be > 0");
    const double gap = env.min_gap();
    if (!(2.0 * delta < gap))
      throw ConfigError("controller.delta=" + detail::format_number(delta) +
                        " makes buffers overlap: narrowest barrier gap is " +
                        detail::format_number(gap) + " Wh");
  }

  double operator()(double b, double t, double u_hat) const {
    return detail::blend(b, env_->lower_at(t), env_->upper_at(t), u_hat, delta_, params_);
  }

  double delta() const noexcept { return delta_; }

 private:
  const BarrierEnvelope* env_;
  double delta_;
  VesselParams params_;
};

/// Learning state for the interior speed. `u_hat` is the per-iteration base;
/// `soc_trace` collects the SOC seen during the running iteration and becomes
/// `prev_soc_trace` at the next boundary.
struct IlcState {
  double u_hat = 1.0;
  double k_p = 5e-5;  ///< m/s per Wh of terminal SOC error
  double k_d = 1e-5;  ///< m/s per Wh of SOC change versus the previous iteration
  double b_des = 0.0;
  std::vector<double> prev_soc_trace;
  std::vector<double> soc_trace;
  std::size_t iteration = 0;
};

/// End-of-iteration proportional update on the terminal SOC error.
inline IlcState ilc_daily_update(IlcState state, double b_tf, const VesselParams& params) {
  state.u_hat = params.clamp_speed(state.u_hat + state.k_p * (b_tf - state.b_des));
  state.prev_soc_trace = std::move(state.soc_trace);
  state.soc_trace.clear();
  ++state.iteration;
  return state;
}

/// Within-iteration correction on the SOC change versus the same instant of
/// the previous iteration. Always applied to the iteration base `u_hat`, so
/// corrections do not compound from step to step.
inline double ilc_rate_update(const IlcState& state, double b_now, std::size_t t_index,
                              const VesselParams& params) {
  if (state.iteration == 0) return state.u_hat;
  if (t_index >= state.prev_soc_trace.size())
    throw DomainError("ilc_rate_update: step index " + std::to_string(t_index) +
                      " outside previous trace of length " +
                      std::to_string(state.prev_soc_trace.size()));
  return params.clamp_speed(state.u_hat + state.k_d * (b_now - state.prev_soc_trace[t_index]));
}

/// Integral of squared barrier violation, plus the worst single violation.
struct ViolationAccumulator {
  double x2 = 0.0;       ///< Wh^2·s
  double peak_wh = 0.0;  ///< largest instantaneous distance outside the barriers
};

inline ViolationAccumulator accumulate_violation(ViolationAccumulator acc, double b,
                                                 const BarrierEnvelope& env, double t, double dt) {
  if (!(dt > 0.0)) throw DomainError("accumulate_violation: dt must be > 0");
  const double hi = env.upper_at(t);
  const double lo = env.lower_at(t);
  double excess = 0.0;
  if (b > hi) excess = b - hi;
  else if (b < lo) excess = lo - b;
  if (excess > 0.0) {
    acc.x2 += excess * excess * dt;
    acc.peak_wh = std::max(acc.peak_wh, excess);
  }
  return acc;
}

/// Where the terminal-SOC target of each iteration comes from.
enum class TargetSoc {
  initial,          ///< mission initial SOC every iteration (cyclic b(t_f) = b(0))
  iteration_start,  ///< SOC at the start of the running iteration
  fixed,            ///< configured constant
};

struct IlcSettings {
  double k_p = 5e-5;
  double k_d = 1e-5;
  double delta = 100.0;  ///< buffer width (Wh)
  double u_init = 1.0;
  TargetSoc target = TargetSoc::initial;
  double target_value = 0.0;  ///< used with TargetSoc::fixed
  double iteration_period = 86400.0;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double u_hat = 0.0;  ///< base speed used during the iteration
  double p1 = 0.0;     ///< dual costate of u_hat
  double terminal_soc = 0.0;
};

/// Closed-loop ILC: per step it forms the rate-corrected speed and passes it
/// through the buffered switching law; at each iteration boundary it applies
/// the proportional update on the terminal SOC error.
class IlcController {
 public:
  IlcController(const IlcSettings& settings, const BarrierEnvelope& env,
                const VesselParams& params, double dt)
      : settings_(settings), law_(env, settings.delta, params), params_(params) {
    if (!(dt > 0.0)) throw ConfigError("ilc: dt must be > 0");
    const double ratio = settings.iteration_period / dt;
    steps_per_iteration_ = static_cast<std::size_t>(std::llround(ratio));
    if (steps_per_iteration_ == 0 || std::abs(ratio - static_cast<double>(steps_per_iteration_)) > 1e-9)
      throw ConfigError("controller.iteration_period must be a positive multiple of sim.dt");
    state_.u_hat = params.clamp_speed(settings.u_init);
    state_.k_p = settings.k_p;
    state_.k_d = settings.k_d;
    state_.soc_trace.reserve(steps_per_iteration_);
  }

  /// Speed for mission step k at time t given the measured SOC.
  double command(std::size_t k, double t, double b) {
    const std::size_t j = k % steps_per_iteration_;
    if (!started_) {
      started_ = true;
      mission_initial_ = b;
      begin_iteration(b);
    } else if (j == 0 && !state_.soc_trace.empty()) {
      finish_iteration(b);
      begin_iteration(b);
    }
    const double u_rate = ilc_rate_update(state_, b, j, params_);
    state_.soc_trace.push_back(b);
    return law_(b, t, u_rate);
  }

  /// Closes a partially or fully elapsed final iteration.
  void finish(double b_final) {
    if (started_ && !state_.soc_trace.empty()) finish_iteration(b_final);
  }

  const IlcState& state() const noexcept { return state_; }
  const std::vector<IterationRecord>& records() const noexcept { return records_; }
  std::size_t steps_per_iteration() const noexcept { return steps_per_iteration_; }

 private:
  void begin_iteration(double b) {
    switch (settings_.target) {
      case TargetSoc::initial: state_.b_des = mission_initial_; break;
      case TargetSoc::iteration_start: state_.b_des = b; break;
      case TargetSoc::fixed: state_.b_des = settings_.target_value; break;
    }
  }

  void finish_iteration(double b_tf) {
    IterationRecord rec;
    rec.iteration = state_.iteration;
    rec.u_hat = state_.u_hat;
    rec.p1 = state_.u_hat > 0.0 ? costate_from_velocity(state_.u_hat, params_).p1
                                : -std::numeric_limits<double>::infinity();
    rec.terminal_soc = b_tf;
    records_.push_back(rec);
    // A short final iteration leaves no usable full-length trace; only full
    // iterations feed the rate term.
    const bool full = state_.soc_trace.size() == steps_per_iteration_;
    state_ = ilc_daily_update(std::move(state_), b_tf, params_);
    if (!full) state_.prev_soc_trace.clear();
    state_.soc_trace.reserve(steps_per_iteration_);
  }

  IlcSettings settings_;
  BufferedSwitchingLaw law_;
  VesselParams params_;
  IlcState state_;
  std::size_t steps_per_iteration_ = 1;
  bool started_ = false;
  double mission_initial_ = 0.0;
  std::vector<IterationRecord> records_;
};

}  // namespace asvopt
