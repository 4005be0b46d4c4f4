#pragma once

// Comparison strategies: the energy-balance constant speed (with and without
// barrier switching) and a receding-horizon dynamic-programming controller
// with a perfect forecast.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "asvopt/barrier.hpp"
#include "asvopt/controller.hpp"
#include "asvopt/detail/numbers.hpp"
#include "asvopt/error.hpp"
#include "asvopt/solar.hpp"
#include "asvopt/vessel.hpp"

namespace asvopt {

/// Constant speed whose propulsion energy over [0, t_f] equals the solar
/// energy received. With `include_hotel` the hotel load is paid first.
inline double energy_balance_velocity(const SolarProfile& profile, double t_f,
                                      const VesselParams& params, bool include_hotel) {
  if (!(t_f > 0.0)) throw DomainError("energy_balance_velocity: t_f must be > 0");
  double energy = profile.integrate(0.0, t_f);  // W·s
  if (include_hotel) {
    energy -= params.k_h * t_f;
    if (!(energy > 0.0)) return params.u_min;
  }
  energy = std::max(0.0, energy);
  return params.clamp_speed(std::cbrt(energy / (params.k_m * t_f)));
}

/// Fixed interior speed with the barrier branches of the switching law.
class ConstrainedConstantController {
 public:
  ConstrainedConstantController(double u_const, const BarrierEnvelope& env,
                                const VesselParams& params)
      : u_const_(u_const), env_(&env), params_(params) {
    if (!(u_const >= params.u_min && u_const <= params.u_max))
      throw DomainError("constrained constant speed " + detail::format_number(u_const) +
                        " outside speed limits");
  }

  /// Speed for the step starting at t with SOC b and input p_in held for dt.
  /// On or past a barrier this is the switching law's limit speed. From the
  /// interior, when u_const would carry the SOC past a barrier by the end of
  /// the step, returns the speed that lands on it, within the speed limits.
  double operator()(double b, double t, double p_in, double dt) const {
    if (b >= env_->upper_at(t)) return params_.u_max;
    if (b <= env_->lower_at(t)) return params_.u_min;
    const double lo = env_->lower_at(t + dt);
    const double hi = env_->upper_at(t + dt);
    const double next = b + (p_in - power_draw(u_const_, params_)) * dt / seconds_per_hour;
    if (next < lo) return speed_for_draw(p_in - (lo - b) * seconds_per_hour / dt);
    if (next > hi) return speed_for_draw(p_in - (hi - b) * seconds_per_hour / dt);
    return u_const_;
  }

  double speed() const noexcept { return u_const_; }

 private:
  double speed_for_draw(double draw) const {
    const double prop = draw - params_.k_h;
    if (!(prop > 0.0)) return params_.u_min;
    return params_.clamp_speed(std::cbrt(prop / params_.k_m));
  }

  double u_const_;
  const BarrierEnvelope* env_;
  VesselParams params_;
};

struct MpcConfig {
  double horizon = 48.0 * 3600.0;      ///< look-ahead (s)
  std::size_t soc_grid = 131;          ///< SOC levels over [b_min, b_max]
  std::size_t u_grid = 24;             ///< speed levels over [u_min, u_max]
  double terminal_reward_slope = 4.3;  ///< metres credited per Wh left at the horizon
  double replan_interval = 6.0 * 3600.0;  ///< re-solve period (s)

  void validate(double dt) const {
    std::string bad;
    if (!(horizon >= dt)) bad += " mpc.horizon>=dt";
    if (soc_grid < 2) bad += " mpc.soc_grid>=2";
    if (u_grid < 2) bad += " mpc.u_grid>=2";
    if (!std::isfinite(terminal_reward_slope)) bad += " mpc.terminal_reward_slope finite";
    if (!(replan_interval >= dt && replan_interval <= horizon))
      bad += " dt<=mpc.replan_interval<=mpc.horizon";
    if (!bad.empty()) throw ConfigError("mpc configuration violates:" + bad);
  }
};

/// Uniform SOC levels and speed choices shared by every solve.
class DpLattice {
 public:
  DpLattice(const VesselParams& params, std::size_t soc_levels, std::size_t speed_levels)
      : params_(params) {
    params.validate();
    if (soc_levels < 2 || speed_levels < 2)
      throw ConfigError("dp lattice needs at least two SOC and two speed levels");
    spacing_ = (params.b_max - params.b_min) / static_cast<double>(soc_levels - 1);
    levels_.resize(soc_levels);
    for (std::size_t j = 0; j < soc_levels; ++j)
      levels_[j] = j + 1 == soc_levels ? params.b_max
                                       : params.b_min + static_cast<double>(j) * spacing_;
    const double du = (params.u_max - params.u_min) / static_cast<double>(speed_levels - 1);
    speeds_.resize(speed_levels);
    for (std::size_t a = 0; a < speed_levels; ++a)
      speeds_[a] = a + 1 == speed_levels ? params.u_max
                                         : params.u_min + static_cast<double>(a) * du;
    draws_.resize(speed_levels);
    for (std::size_t a = 0; a < speed_levels; ++a) draws_[a] = power_draw(speeds_[a], params);
  }

  /// Explicit speed set (ascending, within limits).
  DpLattice(const VesselParams& params, std::size_t soc_levels, std::vector<double> speeds)
      : DpLattice(params, soc_levels, std::size_t{2}) {
    if (speeds.empty()) throw ConfigError("dp lattice: empty speed set");
    if (!std::is_sorted(speeds.begin(), speeds.end()))
      throw ConfigError("dp lattice: speeds must be ascending");
    speeds_ = std::move(speeds);
    draws_.resize(speeds_.size());
    for (std::size_t a = 0; a < speeds_.size(); ++a) draws_[a] = power_draw(speeds_[a], params);
  }

  std::span<const double> levels() const noexcept { return levels_; }
  std::span<const double> speeds() const noexcept { return speeds_; }
  std::span<const double> draws() const noexcept { return draws_; }
  double spacing() const noexcept { return spacing_; }
  const VesselParams& params() const noexcept { return params_; }

  /// Surplus above b_max is curtailed; a draw below b_min is left unclamped
  /// so the bound check rejects it.
  double next_soc(double b, std::size_t action, double p_in, double dt) const {
    const double raw = b + (p_in - draws_[action]) * dt / seconds_per_hour;
    return std::min(raw, params_.b_max);
  }

  /// Linear interpolation of a value row at SOC b. Next to an infeasible
  /// (-inf) node the value is extrapolated from the two nearest feasible
  /// nodes on the other side; -inf when there are not two.
  double interpolate(std::span<const double> row, double b) const {
    const double x = (b - params_.b_min) / spacing_;
    const double last = static_cast<double>(levels_.size() - 1);
    if (x <= 0.0) return row.front();
    if (x >= last) return row.back();
    const double cell = std::floor(x);
    const auto i = static_cast<std::size_t>(cell);
    const double w = x - cell;
    if (w == 0.0) return row[i];
    const double a = row[i];
    const double c = row[i + 1];
    const bool fa = std::isfinite(a);
    const bool fc = std::isfinite(c);
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    if (fa && fc) return a + w * (c - a);
    if (fc) {
      if (i + 2 >= row.size() || !std::isfinite(row[i + 2])) return ninf;
      return c - (1.0 - w) * (row[i + 2] - c);
    }
    if (fa) {
      if (i == 0 || !std::isfinite(row[i - 1])) return ninf;
      return a + w * (a - row[i - 1]);
    }
    return ninf;
  }

 private:
  VesselParams params_;
  double spacing_ = 0.0;
  std::vector<double> levels_;
  std::vector<double> speeds_;
  std::vector<double> draws_;
};

/// Value tables of one finite-horizon solve: value(k, j) is the best
/// distance-to-go (m) from SOC level j at step k, -inf when no admissible
/// speed sequence exists.
class DpPlan {
 public:
  DpPlan() = default;

  std::size_t steps() const noexcept { return steps_; }
  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * width_, width_);
  }
  double value(std::size_t k, std::size_t level) const { return values_[k * width_ + level]; }

  /// Best action index and its value from an arbitrary SOC at step k < steps().
  /// Ties resolve toward the faster speed. Returns false when every action
  /// leaves the bounds.
  bool best_action(const DpLattice& lattice, std::size_t k, double b, std::size_t& action,
                   double& value) const {
    const auto next = row(k + 1);
    bool found = false;
    value = -std::numeric_limits<double>::infinity();
    const auto speeds = lattice.speeds();
    for (std::size_t a = speeds.size(); a-- > 0;) {
      const double b_next = lattice.next_soc(b, a, p_in_[k], dt_);
      if (b_next < lower_[k] || b_next > upper_[k]) continue;
      const double q = speeds[a] * dt_ + lattice.interpolate(next, b_next);
      if (q > value) {
        value = q;
        action = a;
        found = std::isfinite(q);
      }
    }
    return found;
  }

  friend DpPlan solve_finite_horizon(const DpLattice&, std::span<const double>,
                                     std::span<const double>, std::span<const double>, double,
                                     double);

 private:
  std::size_t steps_ = 0;
  std::size_t width_ = 0;
  double dt_ = 0.0;
  std::vector<double> values_;
  std::vector<double> p_in_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Backward recursion over steps x SOC levels. `p_in[k]` is the input power
/// held over step k; `lower[k]`/`upper[k]` bound the SOC reached at the end
/// of step k. Terminal value is slope x SOC.
inline DpPlan solve_finite_horizon(const DpLattice& lattice, std::span<const double> p_in,
                                   std::span<const double> lower, std::span<const double> upper,
                                   double dt, double terminal_reward_slope) {
  const std::size_t steps = p_in.size();
  if (steps == 0) throw DomainError("solve_finite_horizon: empty horizon");
  if (lower.size() != steps || upper.size() != steps)
    throw DomainError("solve_finite_horizon: bound sequences must match horizon length");
  if (!(dt > 0.0)) throw DomainError("solve_finite_horizon: dt must be > 0");

  DpPlan plan;
  plan.steps_ = steps;
  plan.width_ = lattice.levels().size();
  plan.dt_ = dt;
  plan.p_in_.assign(p_in.begin(), p_in.end());
  plan.lower_.assign(lower.begin(), lower.end());
  plan.upper_.assign(upper.begin(), upper.end());
  plan.values_.assign((steps + 1) * plan.width_, 0.0);

  const auto levels = lattice.levels();
  for (std::size_t j = 0; j < plan.width_; ++j)
    plan.values_[steps * plan.width_ + j] = terminal_reward_slope * levels[j];

  for (std::size_t k = steps; k-- > 0;) {
    for (std::size_t j = 0; j < plan.width_; ++j) {
      std::size_t action = 0;
      double v = 0.0;
      plan.best_action(lattice, k, levels[j], action, v);
      plan.values_[k * plan.width_ + j] = v;
    }
  }
  return plan;
}

/// Receding-horizon controller on a perfect forecast. Every replan interval
/// it solves the look-ahead window (truncated at the mission end) and acts
/// on that solution until the next replan.
class RecedingHorizonDp {
 public:
  RecedingHorizonDp(const MpcConfig& cfg, const SolarProfile& forecast,
                    const BarrierEnvelope& env, const VesselParams& params, double dt,
                    std::size_t mission_steps)
      : cfg_(cfg),
        forecast_(&forecast),
        env_(&env),
        params_(params),
        lattice_(params, cfg.soc_grid, cfg.u_grid),
        dt_(dt),
        mission_steps_(mission_steps),
        last_(params.u_min) {
    cfg.validate(dt);
    horizon_steps_ = static_cast<std::size_t>(std::floor(cfg.horizon / dt + 1e-9));
    replan_steps_ = static_cast<std::size_t>(std::floor(cfg.replan_interval / dt + 1e-9));
    horizon_steps_ = std::max<std::size_t>(1, horizon_steps_);
    replan_steps_ = std::clamp<std::size_t>(replan_steps_, 1, horizon_steps_);
  }

  // the forecast and envelope are held by pointer
  RecedingHorizonDp(const MpcConfig&, SolarProfile&&, const BarrierEnvelope&, const VesselParams&,
                    double, std::size_t) = delete;
  RecedingHorizonDp(const MpcConfig&, const SolarProfile&, BarrierEnvelope&&, const VesselParams&,
                    double, std::size_t) = delete;

  /// Speed at mission step k for SOC b.
  double command(std::size_t k, double b) {
    if (!planned_ || k < plan_start_ || k - plan_start_ >= replan_steps_ ||
        k - plan_start_ >= plan_.steps())
      replan(k);
    std::size_t action = 0;
    double value = 0.0;
    const double t = static_cast<double>(k) * dt_;
    if (plan_.best_action(lattice_, k - plan_start_, b, action, value)) {
      last_ = lattice_.speeds()[action];
    } else {
      ++fallbacks_;
      last_ = switching_control(b, t, *env_, last_, params_);
    }
    return last_;
  }

  const DpLattice& lattice() const noexcept { return lattice_; }
  std::size_t horizon_steps() const noexcept { return horizon_steps_; }
  std::size_t replans() const noexcept { return replans_; }
  std::size_t fallbacks() const noexcept { return fallbacks_; }

 private:
  void replan(std::size_t k) {
    const std::size_t remaining = mission_steps_ > k ? mission_steps_ - k : 1;
    const std::size_t n = std::min(horizon_steps_, remaining);
    p_in_.resize(n);
    lower_.resize(n);
    upper_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(k + i) * dt_;
      p_in_[i] = forecast_->sample(t);
      lower_[i] = env_->lower_at(t + dt_);
      upper_[i] = env_->upper_at(t + dt_);
    }
    plan_ = solve_finite_horizon(lattice_, p_in_, lower_, upper_, dt_, cfg_.terminal_reward_slope);
    plan_start_ = k;
    planned_ = true;
    ++replans_;
  }

  MpcConfig cfg_;
  const SolarProfile* forecast_;
  const BarrierEnvelope* env_;
  VesselParams params_;
  DpLattice lattice_;
  double dt_;
  std::size_t mission_steps_;
  std::size_t horizon_steps_ = 1;
  std::size_t replan_steps_ = 1;
  DpPlan plan_;
  bool planned_ = false;
  std::size_t plan_start_ = 0;
  std::size_t replans_ = 0;
  std::size_t fallbacks_ = 0;
  double last_ = 0.0;
  std::vector<double> p_in_, lower_, upper_;
};

}  // namespace asvopt
