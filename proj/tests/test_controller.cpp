#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "asvopt/controller.hpp"
#include "asvopt/harness.hpp"

using namespace asvopt;
using Catch::Approx;

namespace {

// Flat envelope [lo, hi] over a day.
BarrierEnvelope flat(double lo, double hi) {
  BarrierEnvelope env;
  env.grid = {0.0, 360.0, 240};
  env.lower.assign(241, lo);
  env.upper.assign(241, hi);
  return env;
}

}  // namespace

TEST_CASE("costate and velocity are dual", "[controller]") {
  const VesselParams p;
  CHECK(velocity_from_costate({-0.0012}, p) == Approx(1.829404333161506).epsilon(1e-14));
  CHECK(velocity_from_costate({-0.0012}, p) == Approx(1.83).epsilon(0.005));
  CHECK(costate_from_velocity(1.83, p).p1 == Approx(-0.001199218924729945).epsilon(1e-13));
  CHECK(velocity_from_costate({-1e-6}, p) == p.u_max);
  CHECK(velocity_from_costate({-1e3}, p) == Approx(std::sqrt(1.0 / (3.0 * 83.0 * 1e3))));
  CHECK_THROWS_AS(velocity_from_costate({0.0}, p), DomainError);
  CHECK_THROWS_AS(velocity_from_costate({1e-3}, p), DomainError);
  CHECK_THROWS_AS(costate_from_velocity(0.0, p), DomainError);
}

TEST_CASE("stationarity residual", "[controller]") {
  const VesselParams p;
  CHECK(stationarity_residual(1.83, {-0.0012}, p) == Approx(0.00065132).margin(1e-12));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lg(-4.0, 0.0);
  for (int i = 0; i < 200; ++i) {
    const Costate c{-std::pow(10.0, lg(rng)) * 1e-2};
    const double u = std::sqrt(-1.0 / (3.0 * p.k_m * c.p1));
    if (u > p.u_max) continue;
    CHECK(std::abs(stationarity_residual(velocity_from_costate(c, p), c, p)) < 1e-12);
  }
}

TEST_CASE("switching law branches", "[controller]") {
  const VesselParams p;
  const auto env = flat(500, 6000);
  CHECK(switching_control(6001, 100, env, 1.2, p) == 2.315);
  CHECK(switching_control(499, 100, env, 1.2, p) == 0.0);
  CHECK(switching_control(3000, 100, env, 1.83, p) == 1.83);
  CHECK(switching_control(6000, 100, env, 1.2, p) == 2.315);
  CHECK(switching_control(500, 100, env, 1.2, p) == 0.0);
}

TEST_CASE("buffered law", "[controller]") {
  const VesselParams p;
  const auto env = flat(500, 6000);
  CHECK(buffered_control(500, 0, env, 2.0, 100, p) == 0.0);
  CHECK(buffered_control(550, 0, env, 2.0, 100, p) == Approx(1.0));
  CHECK(buffered_control(5900, 0, env, 1.5, 100, p) == 1.5);
  CHECK(buffered_control(5950, 0, env, 1.5, 100, p) == Approx(0.5 * (1.5 + 2.315)));
  CHECK(buffered_control(3000, 0, env, 1.5, 100, p) == 1.5);
  CHECK(buffered_control(7000, 0, env, 1.5, 100, p) == 2.315);
  CHECK_THROWS_AS(buffered_control(3000, 0, env, 1.5, 0, p), ConfigError);
  CHECK_THROWS_AS(buffered_control(3000, 0, flat(500, 600), 1.5, 60, p), ConfigError);
  CHECK_THROWS_AS(BufferedSwitchingLaw(flat(500, 600), 60, p), ConfigError);
  CHECK_NOTHROW(BufferedSwitchingLaw(flat(500, 600), 40, p));
}

TEST_CASE("buffered law is continuous in b", "[controller][property]") {
  const VesselParams p;
  const auto env = flat(400, 6100);
  const double delta = 100.0;
  for (double u_hat : {0.0, 0.7, 1.83, 2.315}) {
    const double lip = (std::abs(u_hat - p.u_min) + std::abs(p.u_max - u_hat)) / delta;
    const double eps = 0.01;
    double prev = buffered_control(env.lower[0] - delta, 0, env, u_hat, delta, p);
    for (double b = env.lower[0] - delta + eps; b <= env.upper[0] + delta; b += eps) {
      const double cur = buffered_control(b, 0, env, u_hat, delta, p);
      CHECK(std::abs(cur - prev) <= lip * eps * (1.0 + 1e-6) + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("daily update", "[controller]") {
  const VesselParams p;
  IlcState s;
  s.u_hat = 1.2;
  s.b_des = 3000;
  s.soc_trace = {1, 2, 3};
  auto same = ilc_daily_update(s, 3000, p);
  CHECK(same.u_hat == 1.2);
  CHECK(same.iteration == 1);
  CHECK(same.prev_soc_trace == std::vector<double>{1, 2, 3});
  CHECK(same.soc_trace.empty());
  CHECK(ilc_daily_update(s, 4000, p).u_hat == Approx(1.25));
  s.u_hat = 2.3;
  CHECK(ilc_daily_update(s, 6000, p).u_hat == 2.315);
  s.u_hat = 0.01;
  CHECK(ilc_daily_update(s, 0, p).u_hat == 0.0);
}

TEST_CASE("rate update", "[controller]") {
  const VesselParams p;
  IlcState s;
  s.u_hat = 1.5;
  CHECK(ilc_rate_update(s, 9999, 0, p) == 1.5);
  s.iteration = 1;
  s.prev_soc_trace = {1000, 2000};
  CHECK(ilc_rate_update(s, 2500, 1, p) == Approx(1.505));
  CHECK(ilc_rate_update(s, 1000, 0, p) == 1.5);
  CHECK(s.u_hat == 1.5);
  CHECK_THROWS_AS(ilc_rate_update(s, 1000, 2, p), DomainError);
  s.prev_soc_trace = {0.0};
  CHECK(ilc_rate_update(s, 1e6, 0, p) == p.u_max);
}

TEST_CASE("violation accumulator", "[controller]") {
  const auto env = flat(500, 6000);
  ViolationAccumulator acc;
  acc = accumulate_violation(acc, 3000, env, 0, 360);
  CHECK(acc.x2 == 0.0);
  acc = accumulate_violation(acc, 490, env, 0, 360);
  CHECK(acc.x2 == 100.0 * 360.0);
  CHECK(acc.peak_wh == 10.0);
  acc = accumulate_violation(acc, 6002, env, 0, 360);
  CHECK(acc.x2 == 104.0 * 360.0);
  CHECK(acc.peak_wh == 10.0);
  CHECK_THROWS_AS(accumulate_violation(acc, 0, env, 0, 0), DomainError);
}

TEST_CASE("ILC controller bookkeeping", "[controller]") {
  const VesselParams p;
  const auto env = flat(0, 6500);
  IlcSettings s;
  s.iteration_period = 3600;
  IlcController c(s, env, p, 360);
  CHECK(c.steps_per_iteration() == 10);
  for (std::size_t k = 0; k < 25; ++k) c.command(k, k * 360.0, 3000.0 + k);
  c.finish(3100);
  REQUIRE(c.records().size() == 3);
  CHECK(c.records()[0].iteration == 0);
  CHECK(c.records()[0].u_hat == 1.0);
  CHECK(c.records()[0].terminal_soc == 3010.0);
  CHECK(c.records()[1].u_hat == Approx(1.0 + 5e-5 * 10));
  CHECK(c.records()[2].terminal_soc == 3100.0);
  CHECK(c.records()[0].p1 == Approx(costate_from_velocity(1.0, p).p1));

  s.iteration_period = 1000;
  CHECK_THROWS_AS(IlcController(s, env, p, 360), ConfigError);
}

TEST_CASE("ILC fixed point on a balanced day", "[controller][property]") {
  // Input exactly matches the draw at u_hat with no barrier contact: both
  // updates leave u_hat unchanged.
  VesselParams p;
  const double u = 1.4;
  SimConfig cfg;
  cfg.vessel = p;
  cfg.solar = ProfileSource{std::make_shared<SolarProfile>(
      SolarProfile({{0, power_draw(u, p)}}, Interpolation::hold, 86400.0))};
  cfg.barrier.mode = BarrierMode::horizon;
  cfg.controller.u_init = u;
  cfg.mission_length = 5 * 86400.0;
  cfg.strategy = Strategy::ilc;
  const auto r = run_mission(cfg);
  REQUIRE(r.per_iteration.size() == 5);
  for (const auto& it : r.per_iteration) {
    CHECK(it.u_hat == Approx(u).epsilon(1e-12));
    CHECK(it.terminal_soc == Approx(cfg.initial_soc).epsilon(1e-12));
  }
}

TEST_CASE("interior commands are constant with no rate gain", "[controller][property]") {
  SimConfig cfg;
  cfg.solar = IdealizedSource{{518.6, 518.6, 86400}, {}, 43200};
  cfg.barrier.nominal = {518.6, 518.6, 86400};
  cfg.controller.k_d = 0.0;
  cfg.mission_length = 4 * 86400.0;
  cfg.strategy = Strategy::ilc;
  const auto r = run_mission(cfg);
  const auto profile = resolve_profile(cfg.solar, cfg.dt);
  const auto env = mission_envelope(cfg, profile);
  const std::size_t per = 240;
  for (std::size_t day = 0; day < 4; ++day) {
    const double u_hat = r.per_iteration[day].u_hat;
    for (std::size_t j = 0; j < per; ++j) {
      const std::size_t k = day * per + j;
      const double t = static_cast<double>(k) * cfg.dt;
      const double b = r.soc_trace[k];
      if (b > env.lower_at(t) + cfg.controller.delta && b < env.upper_at(t) - cfg.controller.delta)
        CHECK(r.velocity_trace[k] == u_hat);
    }
  }
}
