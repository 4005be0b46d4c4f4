#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "asvopt/benchmark.hpp"
#include "dp_oracle.hpp"

using namespace asvopt;
using Catch::Approx;

namespace {

SolarProfile constant(double w, double span) {
  return SolarProfile({{0.0, w}, {span, w}}, Interpolation::hold);
}

BarrierEnvelope flat(double lo, double hi, std::size_t n, double dt) {
  BarrierEnvelope env;
  env.grid = {0.0, dt, n};
  env.lower.assign(n + 1, lo);
  env.upper.assign(n + 1, hi);
  return env;
}

}  // namespace

TEST_CASE("energy balance velocity", "[benchmark]") {
  const VesselParams p;
  CHECK(energy_balance_velocity(constant(83, 86400), 86400, p, false) == Approx(1.0).epsilon(1e-14));
  CHECK(energy_balance_velocity(constant(518.6, 86400), 86400, p, true) ==
        Approx(1.829922741856045).epsilon(1e-13));
  CHECK(energy_balance_velocity(constant(0, 86400), 86400, p, false) == 0.0);
  CHECK(energy_balance_velocity(constant(5, 86400), 86400, p, true) == 0.0);
  CHECK(energy_balance_velocity(constant(1e5, 86400), 86400, p, false) == p.u_max);
  CHECK_THROWS_AS(energy_balance_velocity(constant(1, 10), 0.0, p, false), DomainError);
}

TEST_CASE("energy balance closes on the idealized day", "[benchmark][property]") {
  const VesselParams p;
  for (double d0 : {150.0, 300.0, 518.6}) {
    const auto prof = tabulate_idealized({d0, 1.2 * d0, 86400}, 360.0, 43200.0);
    for (double days : {1.0, 3.0, 10.0}) {
      const double tf = days * 86400.0;
      const double u = energy_balance_velocity(prof, tf, p, false);
      CHECK(p.k_m * u * u * u * tf == Approx(prof.integrate(0, tf)).epsilon(1e-9));
    }
  }
}

TEST_CASE("constrained constant controller", "[benchmark]") {
  const VesselParams p;
  const auto env = flat(500, 6000, 10, 360);
  const ConstrainedConstantController c(1.2, env, p);
  CHECK(c(3000, 0, 100, 360) == 1.2);
  CHECK(c(500, 0, 100, 360) == 0.0);
  CHECK(c(400, 0, 900, 360) == 0.0);
  CHECK(c(6000, 0, 100, 360) == p.u_max);
  CHECK(c.speed() == 1.2);
  CHECK_THROWS_AS(ConstrainedConstantController(3.0, env, p), DomainError);

  SECTION("lands on the lower barrier at equality") {
    // at 1.2 m/s the step would drop 0.1 h * (153.424 W) below 510 Wh
    const double b = 510.0;
    const double u = c(b, 0, 0.0, 360);
    CHECK(u > 0.0);
    CHECK(u < 1.2);
    CHECK(step_soc({b, false}, u, 0.0, 360, p).b == Approx(500.0).margin(1e-9));
  }
  SECTION("lands on the upper barrier at equality") {
    const double b = 5990.0;
    const double u = c(b, 0, 900.0, 360);
    CHECK(u > 1.2);
    CHECK(step_soc({b, false}, u, 900.0, 360, p).b == Approx(6000.0).margin(1e-9));
  }
  SECTION("limited by the speed range") {
    CHECK(c(501, 0, 0.0, 360) == 0.0);
    CHECK(c(5999, 0, 2000.0, 360) == p.u_max);
  }
}

TEST_CASE("constrained controller stays within one step of the envelope", "[benchmark][property]") {
  const VesselParams p;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> level(0.0, 1150.0);
  std::vector<SolarSample> s;
  for (int h = 0; h <= 96; ++h) s.push_back({h * 3600.0, level(rng)});
  const SolarProfile prof(s, Interpolation::hold);
  const TimeGrid g{0, 360, 960};
  const auto env = build_envelope(prof, p, g, BarrierMode::horizon);
  const double tol = (1150.0 + power_draw(p.u_max, p)) * 360 / 3600;
  for (double uc : {0.3, 1.0, 1.6, 2.2}) {
    const ConstrainedConstantController c(uc, env, p);
    SocState soc{3000, false};
    for (std::size_t k = 0; k < g.intervals; ++k) {
      const double t = g.time(k);
      const double pin = prof.sample(t);
      soc = step_soc(soc, c(soc.b, t, pin, 360), pin, 360, p);
      CHECK(soc.b >= env.lower_at(t + 360) - tol);
      CHECK(soc.b <= env.upper_at(t + 360) + tol);
    }
  }
}

TEST_CASE("MPC config validation", "[benchmark]") {
  MpcConfig cfg;
  CHECK_NOTHROW(cfg.validate(360));
  cfg.soc_grid = 1;
  CHECK_THROWS_AS(cfg.validate(360), ConfigError);
  cfg = {};
  cfg.horizon = 100;
  CHECK_THROWS_AS(cfg.validate(360), ConfigError);
  cfg = {};
  cfg.replan_interval = cfg.horizon * 2;
  CHECK_THROWS_AS(cfg.validate(360), ConfigError);
}

TEST_CASE("DP lattice", "[benchmark]") {
  const VesselParams p;
  const DpLattice lat(p, 131, 24);
  CHECK(lat.levels().size() == 131);
  CHECK(lat.spacing() == Approx(50.0));
  CHECK(lat.levels().back() == p.b_max);
  CHECK(lat.speeds().front() == p.u_min);
  CHECK(lat.speeds().back() == p.u_max);
  CHECK(lat.draws()[0] == 10.0);
  CHECK(lat.next_soc(6490, 0, 1000, 360) == p.b_max);
  CHECK(lat.next_soc(1, 23, 0, 360) < 0.0);

  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> row(131, 1.0);
  CHECK(lat.interpolate(row, 25.0) == 1.0);
  std::vector<double> lin(131);
  for (std::size_t j = 0; j < 131; ++j) lin[j] = 2.0 * static_cast<double>(j);
  CHECK(lat.interpolate(lin, 75.0) == Approx(3.0));
  lin[0] = ninf;
  lin[1] = ninf;
  // extrapolated from nodes 2 and 3
  CHECK(lat.interpolate(lin, 75.0) == Approx(3.0));
  lin[3] = ninf;
  CHECK(lat.interpolate(lin, 75.0) == ninf);
  CHECK_THROWS_AS(DpLattice(p, 1, 5), ConfigError);
  CHECK_THROWS_AS(DpLattice(p, 5, std::vector<double>{2.0, 1.0}), ConfigError);
}

TEST_CASE("DP value equals exhaustive enumeration", "[benchmark][oracle]") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 6; ++trial) {
    const auto inst = oracle::random_instance(rng, 8, 5);
    const auto plan = oracle::solve(inst);
    for (std::size_t j = 0; j < inst.lattice.levels().size(); ++j)
      CHECK(plan.value(0, j) == oracle::enumerate_best(inst, inst.lattice.levels()[j]));
  }
  for (int trial = 0; trial < 2; ++trial) {
    const auto inst = oracle::random_instance(rng, 20, 2);
    const auto plan = oracle::solve(inst);
    for (std::size_t j : {0u, 5u, 11u, 19u})
      CHECK(plan.value(0, j) == oracle::enumerate_best(inst, inst.lattice.levels()[j]));
  }
}

TEST_CASE("MPC examples", "[benchmark]") {
  const VesselParams p;
  const double dt = 360;

  SECTION("steady state at a grid speed") {
    const DpLattice probe(p, 131, 24);
    const double u = probe.speeds()[13];
    const double b0 = 2000.0;
    const auto prof = constant(power_draw(u, p), 86400 * 3);
    const auto env = flat(b0, p.b_max, 720, dt);
    MpcConfig cfg;
    cfg.horizon = 12 * 3600;
    cfg.terminal_reward_slope = 0.0;
    RecedingHorizonDp mpc(cfg, prof, env, p, dt, 720);
    double b = b0;
    for (std::size_t k = 0; k < 100; ++k) {
      const double cmd = mpc.command(k, b);
      CHECK(cmd == u);
      b = step_soc({b, false}, cmd, prof.sample(k * dt), dt, p).b;
    }
    CHECK(mpc.fallbacks() == 0);
  }
  SECTION("one step, huge terminal reward hoards charge") {
    MpcConfig cfg;
    cfg.horizon = dt;
    cfg.replan_interval = dt;
    cfg.terminal_reward_slope = 1e9;
    const auto prof = constant(100, 86400);
    const auto env = flat(0, p.b_max, 240, dt);
    RecedingHorizonDp mpc(cfg, prof, env, p, dt, 240);
    CHECK(mpc.command(0, 3000) == p.u_min);
  }
  SECTION("one step, no terminal reward runs as fast as the bounds allow") {
    MpcConfig cfg;
    cfg.horizon = dt;
    cfg.replan_interval = dt;
    cfg.terminal_reward_slope = 0.0;
    const auto prof = constant(100, 86400);
    const auto open = flat(0, p.b_max, 240, dt);
    RecedingHorizonDp free_run(cfg, prof, open, p, dt, 240);
    CHECK(free_run.command(0, 3000) == p.u_max);
    // 50 Wh above the floor: the fastest speed losing at most 50 Wh in 0.1 h
    const auto raised = flat(2950, p.b_max, 240, dt);
    RecedingHorizonDp tight(cfg, prof, raised, p, dt, 240);
    const double u = tight.command(0, 3000);
    const auto& speeds = tight.lattice().speeds();
    for (double s : speeds) {
      const bool ok = 3000 + (100 - power_draw(s, p)) * 0.1 >= 2950;
      if (s > u) CHECK_FALSE(ok);
    }
    CHECK(3000 + (100 - power_draw(u, p)) * 0.1 >= 2950);
  }
  SECTION("falls back to the switching branch when nothing is admissible") {
    MpcConfig cfg;
    cfg.horizon = dt;
    cfg.replan_interval = dt;
    const auto prof = constant(0, 86400);
    const auto env = flat(3000, p.b_max, 240, dt);
    RecedingHorizonDp mpc(cfg, prof, env, p, dt, 240);
    CHECK(mpc.command(0, 2990) == p.u_min);
    CHECK(mpc.fallbacks() == 1);
  }
  SECTION("replans on the configured interval") {
    MpcConfig cfg;
    cfg.horizon = 6 * 3600;
    cfg.replan_interval = 3600;
    const auto prof = constant(300, 86400);
    const auto env = flat(0, p.b_max, 240, dt);
    RecedingHorizonDp mpc(cfg, prof, env, p, dt, 240);
    for (std::size_t k = 0; k < 240; ++k) mpc.command(k, 3000);
    CHECK(mpc.replans() == 24);
    CHECK(mpc.horizon_steps() == 60);
  }
}
