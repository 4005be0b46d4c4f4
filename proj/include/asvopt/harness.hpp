#pragma once

// Closed-loop mission simulation and strategy comparison.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <future>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asvopt/barrier.hpp"
#include "asvopt/benchmark.hpp"
#include "asvopt/controller.hpp"
#include "asvopt/error.hpp"
#include "asvopt/solar.hpp"
#include "asvopt/vessel.hpp"

namespace asvopt {

enum class Strategy { ilc, constant_unconstrained, constant_constrained, mpc };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::ilc: return "ilc";
    case Strategy::constant_unconstrained: return "constant-unconstrained";
    case Strategy::constant_constrained: return "constant-constrained";
    case Strategy::mpc: return "mpc";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  for (auto v : {Strategy::ilc, Strategy::constant_unconstrained, Strategy::constant_constrained,
                 Strategy::mpc})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

/// Idealized model, either one repeating day or a per-day table. Mission
/// t = 0 is local midnight; `noon_time` places the model's peak.
struct IdealizedSource {
  IdealizedSolarParams params;
  std::vector<IdealizedSolarParams> daily;
  double noon_time = 43200.0;

  friend bool operator==(const IdealizedSource&, const IdealizedSource&) = default;
};

struct FileSource {
  std::filesystem::path path;
  double scale = 1.0;
  Interpolation interpolation = Interpolation::linear;
  std::optional<double> period;

  friend bool operator==(const FileSource&, const FileSource&) = default;
};

/// Already-built profile, e.g. from a test. Compared by identity.
struct ProfileSource {
  std::shared_ptr<const SolarProfile> profile;

  friend bool operator==(const ProfileSource&, const ProfileSource&) = default;
};

using SolarSource = std::variant<IdealizedSource, FileSource, ProfileSource>;

/// Sampled at `dt` when the source is the idealized model.
inline SolarProfile resolve_profile(const SolarSource& source, double dt) {
  if (const auto* ideal = std::get_if<IdealizedSource>(&source)) {
    if (ideal->daily.empty()) return tabulate_idealized(ideal->params, dt, ideal->noon_time);
    return tabulate_daily(ideal->daily, dt, ideal->noon_time);
  }
  if (const auto* file = std::get_if<FileSource>(&source))
    return load_profile_file(file->path, file->scale, {file->interpolation, file->period});
  const auto& given = std::get<ProfileSource>(source);
  if (!given.profile) throw ConfigError("solar source: null profile");
  return *given.profile;
}

struct BarrierSettings {
  BarrierMode mode = BarrierMode::periodic_day;
  /// Clear-sky day for periodic-day mode, peaking at `noon_time`.
  IdealizedSolarParams nominal;
  double noon_time = 43200.0;
};

struct SimConfig {
  VesselParams vessel;
  SolarSource solar = IdealizedSource{};
  BarrierSettings barrier;
  IlcSettings controller;
  MpcConfig mpc;
  double dt = 360.0;
  double mission_length = 365.0 * 86400.0;
  double initial_soc = 3250.0;
  Strategy strategy = Strategy::ilc;
  bool include_hotel = false;  ///< energy-balance speed pays the hotel load first
  std::optional<double> constant_speed;  ///< overrides the energy-balance speed
  std::uint64_t rng_seed = 0;
  double soc_noise_std = 0.0;  ///< Gaussian SOC measurement noise (Wh)
  std::filesystem::path output_dir = "out";

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(mission_length / dt)); }

  /// Throws ConfigError listing every offending field.
  void validate() const {
    std::vector<std::string> bad;
    try {
      vessel.validate();
    } catch (const Error& e) {
      bad.emplace_back(std::string("vessel.*: ") + e.what());
    }
    if (!(dt > 0.0)) bad.emplace_back("sim.dt must be > 0");
    if (!(mission_length > 0.0)) bad.emplace_back("sim.mission_length must be > 0");
    if (dt > 0.0 && mission_length > 0.0) {
      const double ratio = mission_length / dt;
      if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || ratio < 0.5)
        bad.emplace_back("sim.mission_length must be a positive multiple of sim.dt");
    }
    if (!(initial_soc >= vessel.b_min && initial_soc <= vessel.b_max))
      bad.emplace_back("sim.initial_soc must lie in [vessel.b_min, vessel.b_max]");
    if (!(soc_noise_std >= 0.0)) bad.emplace_back("sim.soc_noise_std must be >= 0");
    if (constant_speed && !(*constant_speed >= vessel.u_min && *constant_speed <= vessel.u_max))
      bad.emplace_back("benchmark.constant_speed must lie in [vessel.u_min, vessel.u_max]");
    if (!(controller.delta > 0.0)) bad.emplace_back("controller.delta must be > 0");
    if (!(controller.iteration_period > 0.0))
      bad.emplace_back("controller.iteration_period must be > 0");
    if (strategy == Strategy::mpc && dt > 0.0) {
      try {
        mpc.validate(dt);
      } catch (const Error& e) {
        bad.emplace_back(e.what());
      }
    }
    if (barrier.mode == BarrierMode::periodic_day && dt > 0.0) {
      const double ratio = barrier.nominal.period / dt;
      if (!(barrier.nominal.period > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9)
        bad.emplace_back("barrier nominal period must be a positive multiple of sim.dt");
    }
    if (!bad.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& b : bad) msg += "\n  " + b;
      throw ConfigError(msg);
    }
  }
};

struct SimResult {
  Strategy strategy = Strategy::ilc;
  double dt = 0.0;
  double initial_soc = 0.0;
  std::vector<double> soc_trace;       ///< SOC at the start of each step (Wh)
  std::vector<double> velocity_trace;  ///< commanded speed over each step (m/s)
  std::vector<double> p_in_trace;      ///< input power at the start of each step (W)
  double distance = 0.0;      ///< sum of u dt (m)
  double terminal_soc = 0.0;
  ViolationAccumulator violation;
  std::vector<IterationRecord> per_iteration;
  double curtailed_wh = 0.0;
  double shortfall_wh = 0.0;
  bool failed = false;
  double constant_speed = 0.0;  ///< speed used by the constant strategies
  std::size_t mpc_replans = 0;
  std::size_t mpc_fallbacks = 0;
  double wall_time = 0.0;  ///< s
};

/// Envelope the controllers use for this configuration.
inline BarrierEnvelope mission_envelope(const SimConfig& cfg, const SolarProfile& profile) {
  if (cfg.barrier.mode == BarrierMode::horizon)
    return build_envelope(profile, cfg.vessel, TimeGrid{0.0, cfg.dt, cfg.steps()},
                          BarrierMode::horizon);
  const auto nominal = tabulate_idealized(cfg.barrier.nominal, cfg.dt, cfg.barrier.noon_time);
  const auto intervals =
      static_cast<std::size_t>(std::llround(cfg.barrier.nominal.period / cfg.dt));
  return build_envelope(nominal, cfg.vessel, TimeGrid{0.0, cfg.dt, intervals},
                        BarrierMode::periodic_day);
}

/// Runs the closed loop with an already-resolved profile and envelope.
inline SimResult run_mission(const SimConfig& cfg, const SolarProfile& profile,
                             const BarrierEnvelope& env) {
  cfg.validate();
  const std::size_t n = cfg.steps();
  const double dt = cfg.dt;
  if (!profile.covers(0.0, static_cast<double>(n - 1) * dt))
    throw ValidationError("solar data does not cover the mission: profile ends at t=" +
                          detail::format_number(profile.last_time()) + " s, mission needs t=" +
                          detail::format_number(static_cast<double>(n - 1) * dt) + " s");
  const auto clock_start = std::chrono::steady_clock::now();
  const auto& params = cfg.vessel;

  SimResult res;
  res.strategy = cfg.strategy;
  res.dt = dt;
  res.initial_soc = cfg.initial_soc;
  res.soc_trace.resize(n);
  res.velocity_trace.resize(n);
  res.p_in_trace.resize(n);

  const double mission = static_cast<double>(n) * dt;
  res.constant_speed = cfg.constant_speed
                           ? *cfg.constant_speed
                           : energy_balance_velocity(profile, mission, params, cfg.include_hotel);

  std::optional<IlcController> ilc;
  std::optional<ConstrainedConstantController> constrained;
  std::optional<RecedingHorizonDp> mpc;
  switch (cfg.strategy) {
    case Strategy::ilc: ilc.emplace(cfg.controller, env, params, dt); break;
    case Strategy::constant_constrained: constrained.emplace(res.constant_speed, env, params); break;
    case Strategy::mpc: mpc.emplace(cfg.mpc, profile, env, params, dt, n); break;
    case Strategy::constant_unconstrained: break;
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> noise(0.0, cfg.soc_noise_std > 0.0 ? cfg.soc_noise_std : 1.0);

  SocState soc{cfg.initial_soc, false};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double measured = cfg.soc_noise_std > 0.0 ? soc.b + noise(rng) : soc.b;
    const double p_in = profile.sample(t);
    double u = 0.0;
    switch (cfg.strategy) {
      case Strategy::ilc: u = ilc->command(k, t, measured); break;
      case Strategy::constant_constrained: u = (*constrained)(measured, t, p_in, dt); break;
      case Strategy::mpc: u = mpc->command(k, measured); break;
      case Strategy::constant_unconstrained: u = res.constant_speed; break;
    }
    res.soc_trace[k] = soc.b;
    res.velocity_trace[k] = u;
    res.p_in_trace[k] = p_in;
    const auto step = step_soc_detailed(soc, u, p_in, dt, params);
    soc = step.state;
    res.curtailed_wh += step.curtailed_wh;
    res.shortfall_wh += step.shortfall_wh;
    res.violation = accumulate_violation(res.violation, soc.b, env, t + dt, dt);
    res.distance += u * dt;
  }
  res.terminal_soc = soc.b;
  res.failed = soc.failed;
  if (ilc) {
    ilc->finish(cfg.soc_noise_std > 0.0 ? soc.b + noise(rng) : soc.b);
    res.per_iteration = ilc->records();
  }
  if (mpc) {
    res.mpc_replans = mpc->replans();
    res.mpc_fallbacks = mpc->fallbacks();
  }
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return res;
}

inline SimResult run_mission(const SimConfig& cfg) {
  cfg.validate();
  const auto profile = resolve_profile(cfg.solar, cfg.dt);
  const std::size_t n = cfg.steps();
  if (!profile.covers(0.0, static_cast<double>(n - 1) * cfg.dt))
    throw ValidationError("solar data does not cover the mission: profile ends at t=" +
                          detail::format_number(profile.last_time()) + " s");
  const auto env = mission_envelope(cfg, profile);
  return run_mission(cfg, profile, env);
}

struct ComparisonRow {
  Strategy strategy;
  double distance;
  double terminal_soc;
  double violation_x2;
  double violation_peak_wh;
  double wall_time;
};

struct Comparison {
  std::vector<SimResult> results;
  std::vector<ComparisonRow> rows;
};

/// Runs every configuration (in parallel) on a shared solar source.
inline Comparison compare(const std::vector<SimConfig>& cfgs) {
  if (cfgs.size() < 2) throw ValidationError("compare: need at least two configurations");
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    if (!(cfgs[i].solar == cfgs[0].solar))
      throw ValidationError("compare: configuration " + std::to_string(i) +
                            " uses a different solar source");
    if (cfgs[i].mission_length != cfgs[0].mission_length || cfgs[i].dt != cfgs[0].dt)
      throw ValidationError("compare: configuration " + std::to_string(i) +
                            " differs in mission length or step");
  }
  for (const auto& c : cfgs) c.validate();

  const auto profile = resolve_profile(cfgs[0].solar, cfgs[0].dt);
  std::vector<std::future<SimResult>> jobs;
  jobs.reserve(cfgs.size());
  for (const auto& c : cfgs)
    jobs.push_back(std::async(std::launch::async, [&c, &profile] {
      const auto env = mission_envelope(c, profile);
      return run_mission(c, profile, env);
    }));

  Comparison out;
  for (auto& j : jobs) out.results.push_back(j.get());
  for (const auto& r : out.results)
    out.rows.push_back({r.strategy, r.distance, r.terminal_soc, r.violation.x2,
                        r.violation.peak_wh, r.wall_time});
  return out;
}

}  // namespace asvopt
