// asvopt: run, compare and inspect solar-ASV speed strategies.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "asvopt/asvopt.hpp"

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("-c,--config", common.config, "key = value configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", common.overrides, "override a key (KEY=VALUE), repeatable");
}

asvopt::SimConfig load(const Common& common, asvopt::KeyValues* kv_out = nullptr) {
  const auto kv = asvopt::load_key_values(common.config, common.overrides);
  auto base = std::filesystem::path(common.config).parent_path();
  if (kv_out) *kv_out = kv;
  return asvopt::sim_config_from(kv, base);
}

void print_row(const asvopt::SimResult& r) {
  std::printf("%-24s distance=%.6g m  terminal_soc=%.6g Wh  x2=%.6g  wall=%.3f s\n",
              std::string(asvopt::to_string(r.strategy)).c_str(), r.distance, r.terminal_soc,
              r.violation.x2, r.wall_time);
}

int cmd_run(const Common& common) {
  const auto cfg = load(common);
  const auto result = asvopt::run_mission(cfg);
  asvopt::export_traces(result, cfg.output_dir);
  print_row(result);
  std::printf("wrote %s/{trace,iterations,summary,daily}.csv\n", cfg.output_dir.string().c_str());
  return 0;
}

int cmd_compare(const Common& common) {
  asvopt::KeyValues kv;
  const auto base = load(common, &kv);
  std::vector<asvopt::SimConfig> cfgs;
  for (auto s : asvopt::compare_strategies(kv)) {
    auto c = base;
    c.strategy = s;
    cfgs.push_back(std::move(c));
  }
  const auto cmp = asvopt::compare(cfgs);
  asvopt::export_comparison(cmp, base.output_dir);
  for (const auto& r : cmp.results) print_row(r);
  for (const auto& r : cmp.results)
    if (r.strategy == asvopt::Strategy::mpc)
      std::printf("mpc lattice: %zu SOC levels x %zu speeds, horizon %.0f s, %zu replans\n",
                  base.mpc.soc_grid, base.mpc.u_grid, base.mpc.horizon, r.mpc_replans);
  std::printf("wrote %s/{comparison,distance}.csv\n", base.output_dir.string().c_str());
  return 0;
}

int cmd_barriers(const Common& common, const std::string& out_path) {
  const auto cfg = load(common);
  const auto profile = asvopt::resolve_profile(cfg.solar, cfg.dt);
  const auto env = asvopt::mission_envelope(cfg, profile);
  if (out_path.empty() || out_path == "-") {
    asvopt::write_envelope_csv(std::cout, env);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw asvopt::IoError("cannot write '" + out_path + "'");
    asvopt::write_envelope_csv(out, env);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solar-powered ASV speed optimization: barriers, ILC, benchmarks"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "simulate one mission and export traces");
  add_common(run, run_opts);

  Common cmp_opts;
  auto* cmp = app.add_subcommand("compare", "run every strategy in compare.strategies");
  add_common(cmp, cmp_opts);

  Common bar_opts;
  std::string bar_out;
  auto* bar = app.add_subcommand("barriers", "emit the SOC barrier envelope as CSV");
  add_common(bar, bar_opts);
  bar->add_option("-o,--out", bar_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*cmp) return cmd_compare(cmp_opts);
    if (*bar) return cmd_barriers(bar_opts, bar_out);
  } catch (const asvopt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
