#pragma once

// Exogenous solar input power: the idealized diurnal model and tabulated
// profiles ingested from delimited text.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asvopt/detail/numbers.hpp"
#include "asvopt/error.hpp"

namespace asvopt {

struct IdealizedSolarParams {
  double d0 = 300.0;       ///< mean level (W)
  double d1 = 500.0;       ///< oscillation amplitude (W)
  double period = 86400.0; ///< cycle length (s)

  void validate() const {
    if (!(period > 0.0)) throw ValidationError("idealized solar: period must be > 0");
    if (!(d1 >= 0.0)) throw ValidationError("idealized solar: d1 must be >= 0");
  }

  friend bool operator==(const IdealizedSolarParams&, const IdealizedSolarParams&) = default;
};

/// max(0, d0 + d1 cos(2 pi t / period)). Peaks at t = 0.
inline double idealized_irradiance(double t, const IdealizedSolarParams& p) {
  const double phase = 2.0 * std::numbers::pi * t / p.period;
  return std::max(0.0, p.d0 + p.d1 * std::cos(phase));
}

enum class Interpolation { hold, linear };

struct SolarSample {
  double time_s;
  double power_w;

  friend bool operator==(const SolarSample&, const SolarSample&) = default;
};

/// Immutable, time-ordered power samples with hold or linear interpolation.
///
/// A periodic profile repeats with `period`; its samples must all fall in
/// [first, first + period). Past the last sample a non-periodic profile holds
/// the final value; before the first sample it is undefined.
class SolarProfile {
 public:
  SolarProfile(std::vector<SolarSample> samples,
               Interpolation interpolation = Interpolation::linear,
               std::optional<double> period = std::nullopt)
      : samples_(std::move(samples)), interpolation_(interpolation), period_(period) {
    if (samples_.empty()) throw ValidationError("solar profile: no samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const auto& s = samples_[i];
      if (!std::isfinite(s.time_s) || !std::isfinite(s.power_w))
        throw ValidationError("solar profile: non-finite sample at index " + std::to_string(i));
      if (s.power_w < 0.0)
        throw ValidationError("solar profile: negative power at index " + std::to_string(i));
      if (i > 0 && !(s.time_s > samples_[i - 1].time_s))
        throw ValidationError("solar profile: times not strictly increasing at index " +
                              std::to_string(i));
    }
    if (period_) {
      if (!(*period_ > 0.0)) throw ValidationError("solar profile: period must be > 0");
      if (!(samples_.back().time_s < samples_.front().time_s + *period_))
        throw ValidationError("solar profile: samples span more than one period");
    }
    build_prefix();
  }

  std::span<const SolarSample> samples() const noexcept { return samples_; }
  Interpolation interpolation() const noexcept { return interpolation_; }
  bool periodic() const noexcept { return period_.has_value(); }
  std::optional<double> period() const noexcept { return period_; }
  double first_time() const noexcept { return samples_.front().time_s; }
  double last_time() const noexcept { return samples_.back().time_s; }

  /// True when sampling every instant of [t0, t1] is well defined and backed
  /// by data: periodic profiles always; otherwise the samples must start no
  /// later than t0 and extend at least to t1.
  bool covers(double t0, double t1) const noexcept {
    if (periodic()) return true;
    return first_time() <= t0 && last_time() >= t1;
  }

  double sample(double t) const {
    const double tw = wrap(t);
    const auto i = segment(tw);
    const auto& a = samples_[i];
    if (interpolation_ == Interpolation::hold) return a.power_w;
    if (i + 1 < samples_.size()) {
      const auto& b = samples_[i + 1];
      if (tw == a.time_s) return a.power_w;
      const double w = (tw - a.time_s) / (b.time_s - a.time_s);
      return a.power_w + w * (b.power_w - a.power_w);
    }
    if (!periodic() || tw == a.time_s) return a.power_w;
    // Wrap segment: last sample back to the first one, one period later.
    const double next_t = first_time() + *period_;
    const double w = (tw - a.time_s) / (next_t - a.time_s);
    return a.power_w + w * (samples_.front().power_w - a.power_w);
  }

  /// Exact integral of the interpolant over [t0, t1], in W·s.
  double integrate(double t0, double t1) const { return antiderivative(t1) - antiderivative(t0); }

 private:
  double wrap(double t) const {
    if (!periodic()) {
      if (t < first_time())
        throw DomainError("solar profile: t=" + detail::format_number(t) +
                          " precedes first sample");
      return t;
    }
    double r = std::fmod(t - first_time(), *period_);
    if (r < 0.0) r += *period_;
    return first_time() + r;
  }

  std::size_t segment(double tw) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), tw,
                               [](double v, const SolarSample& s) { return v < s.time_s; });
    return static_cast<std::size_t>(std::distance(samples_.begin(), it)) - 1;
  }

  // Integral from sample i's time up to tw (tw within segment i).
  double partial(std::size_t i, double tw) const {
    const auto& a = samples_[i];
    const double s = tw - a.time_s;
    if (interpolation_ == Interpolation::hold) return a.power_w * s;
    double next_t = 0.0;
    double next_v = 0.0;
    if (i + 1 < samples_.size()) {
      next_t = samples_[i + 1].time_s;
      next_v = samples_[i + 1].power_w;
    } else if (periodic()) {
      next_t = first_time() + *period_;
      next_v = samples_.front().power_w;
    } else {
      return a.power_w * s;
    }
    const double h = next_t - a.time_s;
    return a.power_w * s + (next_v - a.power_w) * s * s / (2.0 * h);
  }

  void build_prefix() {
    prefix_.assign(samples_.size(), 0.0);
    for (std::size_t i = 1; i < samples_.size(); ++i)
      prefix_[i] = prefix_[i - 1] + partial(i - 1, samples_[i].time_s);
    if (periodic()) {
      const std::size_t last = samples_.size() - 1;
      period_integral_ = prefix_[last] + partial(last, first_time() + *period_);
    }
  }

  double antiderivative(double t) const {
    if (!periodic()) {
      const double tw = wrap(t);
      const auto i = segment(tw);
      return prefix_[i] + partial(i, tw);
    }
    const double offset = t - first_time();
    const double cycles = std::floor(offset / *period_);
    double tw = first_time() + (offset - cycles * *period_);
    if (tw >= first_time() + *period_) tw = first_time();  // rounding guard
    const auto i = segment(tw);
    return cycles * period_integral_ + prefix_[i] + partial(i, tw);
  }

  std::vector<SolarSample> samples_;
  Interpolation interpolation_;
  std::optional<double> period_;
  std::vector<double> prefix_;
  double period_integral_ = 0.0;
};

struct ProfileOptions {
  Interpolation interpolation = Interpolation::linear;
  std::optional<double> period;
};

/// Reads `time_s,power` rows. `#` starts a comment line; blank lines are
/// skipped; a non-numeric first row is taken as a header. Every value is
/// multiplied by `scale` (irradiance W/m^2 -> battery input W).
inline SolarProfile load_profile(std::istream& in, double scale = 1.0, ProfileOptions options = {}) {
  if (!(scale >= 0.0) || !std::isfinite(scale))
    throw ValidationError("solar profile: scale must be finite and >= 0");
  std::vector<SolarSample> samples;
  std::string line;
  std::size_t line_no = 0;
  bool seen_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos)
      throw ParseError(line_no, "expected two comma-separated fields");
    const auto f0 = text.substr(0, comma);
    const auto f1 = text.substr(comma + 1);
    if (f1.find(',') != std::string_view::npos)
      throw ParseError(line_no, "expected two comma-separated fields");
    const auto t = detail::parse_double(f0);
    const auto v = detail::parse_double(f1);
    if (!t || !v) {
      if (!seen_row && !t && !v) {
        seen_row = true;  // header
        continue;
      }
      throw ParseError(line_no, "non-numeric field");
    }
    seen_row = true;
    if (!std::isfinite(*t) || !std::isfinite(*v)) throw ParseError(line_no, "non-finite value");
    if (*v < 0.0)
      throw ValidationError("line " + std::to_string(line_no) + ": negative value");
    if (!samples.empty() && !(*t > samples.back().time_s))
      throw ValidationError("line " + std::to_string(line_no) +
                            ": timestamps not strictly increasing");
    samples.push_back({*t, *v * scale});
  }
  if (samples.empty()) throw ValidationError("solar profile: no data rows");
  return SolarProfile(std::move(samples), options.interpolation, options.period);
}

inline SolarProfile load_profile_file(const std::filesystem::path& path, double scale = 1.0,
                                      ProfileOptions options = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open solar data file '" + path.string() + "'");
  try {
    return load_profile(in, scale, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// One period of the idealized model sampled every `step` seconds, as a
/// periodic linear profile. `phase` shifts the model so its peak falls at
/// t = phase (e.g. 43200 puts noon half a day after a midnight origin).
inline SolarProfile tabulate_idealized(const IdealizedSolarParams& params, double step,
                                       double phase = 0.0) {
  params.validate();
  if (!(step > 0.0)) throw ValidationError("tabulate_idealized: step must be > 0");
  std::vector<SolarSample> samples;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * step;
    if (!(t < params.period)) break;
    samples.push_back({t, idealized_irradiance(t - phase, params)});
  }
  return SolarProfile(std::move(samples), Interpolation::linear, params.period);
}

/// Per-day idealized parameters laid end to end; periodic over the whole
/// table. All entries must share one period.
inline SolarProfile tabulate_daily(std::span<const IdealizedSolarParams> days, double step,
                                   double phase = 0.0) {
  if (days.empty()) throw ValidationError("tabulate_daily: empty table");
  if (!(step > 0.0)) throw ValidationError("tabulate_daily: step must be > 0");
  const double period = days.front().period;
  std::vector<SolarSample> samples;
  for (std::size_t d = 0; d < days.size(); ++d) {
    days[d].validate();
    if (days[d].period != period)
      throw ValidationError("tabulate_daily: entries disagree on period");
    const double origin = static_cast<double>(d) * period;
    for (std::size_t k = 0;; ++k) {
      const double local = static_cast<double>(k) * step;
      if (!(local < period)) break;
      samples.push_back({origin + local, idealized_irradiance(local - phase, days[d])});
    }
  }
  return SolarProfile(std::move(samples), Interpolation::linear,
                      period * static_cast<double>(days.size()));
}

}  // namespace asvopt
