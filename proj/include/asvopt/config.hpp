#pragma once

// Flat `key = value` configuration files. Keys are namespaced vessel.*,
// solar.*, barrier.*, controller.*, mpc.*, benchmark.*, sim.* and compare.*;
// `#` starts a comment.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "asvopt/detail/numbers.hpp"
#include "asvopt/error.hpp"
#include "asvopt/harness.hpp"
#include "asvopt/solar.hpp"

namespace asvopt {

using KeyValues = std::map<std::string, std::string, std::less<>>;

inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos)
      text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const auto key = detail::trim(text.substr(0, eq));
    const auto value = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (!kv.emplace(std::string(key), std::string(value)).second)
      throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
  }
  return kv;
}

/// Applies `key=value` overrides on top of a parsed file.
inline void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    kv[std::string(detail::trim(std::string_view(o).substr(0, eq)))] =
        std::string(detail::trim(std::string_view(o).substr(eq + 1)));
  }
}

/// Per-day idealized table: rows `d0,d1` (W), one per day.
inline std::vector<IdealizedSolarParams> load_daily_table(std::istream& in, double period) {
  std::vector<IdealizedSolarParams> days;
  std::string line;
  std::size_t line_no = 0;
  bool seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw ParseError(line_no, "expected 'd0,d1'");
    const auto d0 = detail::parse_double(text.substr(0, comma));
    const auto d1 = detail::parse_double(text.substr(comma + 1));
    if (!d0 || !d1) {
      if (!seen && !d0 && !d1) {
        seen = true;
        continue;
      }
      throw ParseError(line_no, "non-numeric field");
    }
    seen = true;
    IdealizedSolarParams p{*d0, *d1, period};
    p.validate();
    days.push_back(p);
  }
  if (days.empty()) throw ValidationError("daily table: no rows");
  return days;
}

namespace detail {

inline const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "vessel.k_h", "vessel.k_m", "vessel.b_min", "vessel.b_max", "vessel.u_min", "vessel.u_max",
      "solar.source", "solar.d0", "solar.d1", "solar.period", "solar.noon_time",
      "solar.daily_table", "solar.file", "solar.scale", "solar.interpolation", "solar.file_period",
      "barrier.mode", "barrier.nominal_d0", "barrier.nominal_d1",
      "controller.k_p", "controller.k_d", "controller.delta", "controller.u_init",
      "controller.b_des", "controller.iteration_period",
      "mpc.horizon", "mpc.soc_grid", "mpc.u_grid", "mpc.terminal_reward_slope",
      "mpc.replan_interval",
      "benchmark.include_hotel", "benchmark.constant_speed",
      "sim.dt", "sim.mission_length", "sim.mission_days", "sim.initial_soc", "sim.strategy",
      "sim.rng_seed", "sim.soc_noise_std", "sim.output_dir",
      "compare.strategies"};
  return keys;
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  const std::string* raw(std::string_view key) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }

  void number(std::string_view key, double& out) {
    if (const auto* v = raw(key)) {
      const auto d = parse_double(*v);
      if (!d || !std::isfinite(*d)) errors_.push_back(std::string(key) + ": not a number");
      else out = *d;
    }
  }

  void count(std::string_view key, std::size_t& out) {
    if (const auto* v = raw(key)) {
      const auto d = parse_double(*v);
      if (!d || *d < 0 || std::floor(*d) != *d) errors_.push_back(std::string(key) + ": not a count");
      else out = static_cast<std::size_t>(*d);
    }
  }

  void flag(std::string_view key, bool& out) {
    if (const auto* v = raw(key)) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else errors_.push_back(std::string(key) + ": expected true/false");
    }
  }

  void fail(std::string msg) { errors_.push_back(std::move(msg)); }

  void finish() const {
    std::string msg;
    for (const auto& [k, v] : kv_)
      if (!known_keys().contains(k)) msg += "\n  unknown key '" + k + "'";
    for (const auto& e : errors_) msg += "\n  " + e;
    if (!msg.empty()) throw ConfigError("invalid configuration:" + msg);
  }

 private:
  const KeyValues& kv_;
  std::vector<std::string> errors_;
};

}  // namespace detail

/// Builds a SimConfig; relative file paths resolve against `base_dir`.
inline SimConfig sim_config_from(const KeyValues& kv, const std::filesystem::path& base_dir = {}) {
  SimConfig cfg;
  detail::Reader r(kv);
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  auto& v = cfg.vessel;
  r.number("vessel.k_h", v.k_h);
  r.number("vessel.k_m", v.k_m);
  r.number("vessel.b_min", v.b_min);
  r.number("vessel.b_max", v.b_max);
  r.number("vessel.u_min", v.u_min);
  r.number("vessel.u_max", v.u_max);

  IdealizedSource ideal;
  r.number("solar.d0", ideal.params.d0);
  r.number("solar.d1", ideal.params.d1);
  r.number("solar.period", ideal.params.period);
  r.number("solar.noon_time", ideal.noon_time);
  const std::string source = r.raw("solar.source") ? *r.raw("solar.source") : "idealized";
  if (source == "idealized") {
    if (const auto* table = r.raw("solar.daily_table")) {
      const auto path = resolve(*table);
      std::ifstream in(path);
      if (!in) r.fail("solar.daily_table: cannot open '" + path.string() + "'");
      else {
        try {
          ideal.daily = load_daily_table(in, ideal.params.period);
        } catch (const Error& e) {
          r.fail("solar.daily_table: " + path.string() + ": " + e.what());
        }
      }
    }
    cfg.solar = ideal;
  } else if (source == "file") {
    FileSource file;
    if (const auto* p = r.raw("solar.file")) file.path = resolve(*p);
    else r.fail("solar.file: required when solar.source = file");
    r.number("solar.scale", file.scale);
    if (const auto* interp = r.raw("solar.interpolation")) {
      if (*interp == "linear") file.interpolation = Interpolation::linear;
      else if (*interp == "hold") file.interpolation = Interpolation::hold;
      else r.fail("solar.interpolation: expected linear or hold");
    }
    if (r.raw("solar.file_period")) {
      double period = 0.0;
      r.number("solar.file_period", period);
      file.period = period;
    }
    cfg.solar = file;
  } else {
    r.fail("solar.source: expected idealized or file");
  }

  cfg.barrier.nominal = ideal.params;
  cfg.barrier.noon_time = ideal.noon_time;
  r.number("barrier.nominal_d0", cfg.barrier.nominal.d0);
  r.number("barrier.nominal_d1", cfg.barrier.nominal.d1);
  if (const auto* mode = r.raw("barrier.mode")) {
    if (*mode == "horizon") cfg.barrier.mode = BarrierMode::horizon;
    else if (*mode == "periodic-day") cfg.barrier.mode = BarrierMode::periodic_day;
    else r.fail("barrier.mode: expected horizon or periodic-day");
  }

  auto& c = cfg.controller;
  r.number("controller.k_p", c.k_p);
  r.number("controller.k_d", c.k_d);
  r.number("controller.delta", c.delta);
  r.number("controller.u_init", c.u_init);
  r.number("controller.iteration_period", c.iteration_period);
  if (const auto* target = r.raw("controller.b_des")) {
    if (*target == "initial") c.target = TargetSoc::initial;
    else if (*target == "iteration-start") c.target = TargetSoc::iteration_start;
    else if (const auto d = detail::parse_double(*target)) {
      c.target = TargetSoc::fixed;
      c.target_value = *d;
    } else {
      r.fail("controller.b_des: expected initial, iteration-start or a number");
    }
  }

  auto& m = cfg.mpc;
  r.number("mpc.horizon", m.horizon);
  r.count("mpc.soc_grid", m.soc_grid);
  r.count("mpc.u_grid", m.u_grid);
  r.number("mpc.terminal_reward_slope", m.terminal_reward_slope);
  r.number("mpc.replan_interval", m.replan_interval);

  r.flag("benchmark.include_hotel", cfg.include_hotel);
  if (r.raw("benchmark.constant_speed")) {
    double u = 0.0;
    r.number("benchmark.constant_speed", u);
    cfg.constant_speed = u;
  }

  r.number("sim.dt", cfg.dt);
  if (r.raw("sim.mission_length") && r.raw("sim.mission_days"))
    r.fail("sim.mission_length and sim.mission_days are mutually exclusive");
  r.number("sim.mission_length", cfg.mission_length);
  if (r.raw("sim.mission_days")) {
    double days = 0.0;
    r.number("sim.mission_days", days);
    cfg.mission_length = days * 86400.0;
  }
  r.number("sim.initial_soc", cfg.initial_soc);
  if (const auto* s = r.raw("sim.strategy")) {
    if (const auto st = parse_strategy(*s)) cfg.strategy = *st;
    else r.fail("sim.strategy: unknown strategy '" + *s + "'");
  }
  if (r.raw("sim.rng_seed")) {
    std::size_t seed = 0;
    r.count("sim.rng_seed", seed);
    cfg.rng_seed = seed;
  }
  r.number("sim.soc_noise_std", cfg.soc_noise_std);
  if (const auto* out = r.raw("sim.output_dir")) cfg.output_dir = resolve(*out);

  if (const auto* list = r.raw("compare.strategies")) {
    std::string_view rest = *list;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = detail::trim(rest.substr(0, comma));
      if (!item.empty() && !parse_strategy(item))
        r.fail("compare.strategies: unknown strategy '" + std::string(item) + "'");
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  r.finish();
  return cfg;
}

/// Strategies listed under compare.strategies (all four by default).
inline std::vector<Strategy> compare_strategies(const KeyValues& kv) {
  std::vector<Strategy> out;
  const auto it = kv.find("compare.strategies");
  if (it == kv.end())
    return {Strategy::constant_unconstrained, Strategy::constant_constrained, Strategy::ilc,
            Strategy::mpc};
  std::string_view rest = it->second;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = detail::trim(rest.substr(0, comma));
    if (!item.empty()) {
      const auto s = parse_strategy(item);
      if (!s) throw ConfigError("compare.strategies: unknown strategy '" + std::string(item) + "'");
      out.push_back(*s);
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

/// Reads a config file, applies overrides, and returns the raw keys too.
inline KeyValues load_key_values(const std::filesystem::path& path,
                                 const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  KeyValues kv;
  try {
    kv = parse_key_values(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
  apply_overrides(kv, overrides);
  return kv;
}

}  // namespace asvopt
