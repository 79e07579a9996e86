// sausage_lab: run experiments and the self-test from the command line.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "wsl/experiments.hpp"
#include "wsl/parallel.hpp"
#include "wsl/stochastic.hpp"

using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw wsl::ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw wsl::ConfigError(path + ": " + e.what());
  }
}

int run(const json& merged, bool quiet_flag) {
  wsl::ExperimentConfig cfg = wsl::parse_config(merged);
  if (quiet_flag) cfg.quiet = true;
  if (cfg.out.empty()) cfg.out = cfg.experiment + ".csv";
  const wsl::ExperimentOutput out = wsl::run_experiment(cfg);
  std::ofstream csv(cfg.out, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + cfg.out);
  csv << out.csv;
  if (!cfg.quiet) std::cout << out.summary << "  csv: " << cfg.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wiener sausage lab: Monte Carlo experiments on sausage volumes, sphere walks and detection"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run one experiment and write its CSV");
  std::string config, experiment, out, shape, method;
  std::uint64_t seed = 0;
  std::size_t replicates = 0, steps = 0, samples = 0;
  int dim = 0, grid = 0;
  double t = 0.0, eps = 0.0;
  unsigned workers = 0;
  bool quiet = false;
  run_cmd->add_option("--config", config, "JSON config file (flags override its keys)");
  auto* o_exp = run_cmd->add_option("--experiment", experiment, "volume, theorem1, discrete, drift, rearrange, "
                                                              "sphere-survival, coupling, duality, capacity, detect");
  auto* o_seed = run_cmd->add_option("--seed", seed, "master seed");
  auto* o_rep = run_cmd->add_option("--replicates", replicates, "replicate count");
  auto* o_dim = run_cmd->add_option("--dim", dim, "dimension d");
  auto* o_out = run_cmd->add_option("--out", out, "CSV output path (default <experiment>.csv)");
  auto* o_workers = run_cmd->add_option("--workers", workers, "worker threads (default $SAUSAGE_LAB_WORKERS or all cores)");
  run_cmd->add_flag("--quiet", quiet, "suppress the summary");
  auto* o_shape = run_cmd->add_option("--shape", shape, "ball:<radius> or box:<side>");
  auto* o_steps = run_cmd->add_option("--steps", steps, "walk steps (coupling: chain length n)");
  auto* o_t = run_cmd->add_option("--t", t, "time horizon");
  auto* o_grid = run_cmd->add_option("--grid", grid, "dyadic grid depth n");
  auto* o_eps = run_cmd->add_option("--eps", eps, "walk step radius");
  auto* o_method = run_cmd->add_option("--method", method, "interval, hitting, coverage or voxel");
  auto* o_samples = run_cmd->add_option("--samples", samples, "Monte Carlo points per volume estimate");

  auto* self_cmd = app.add_subcommand("selftest", "run the reduced invariant suite");
  std::uint64_t self_seed = 1;
  double fault = 1.0;
  unsigned self_workers = 0;
  self_cmd->add_option("--seed", self_seed, "master seed");
  self_cmd->add_option("--workers", self_workers, "worker threads");
  self_cmd->add_option("--fault-cap-measure", fault, "multiply cap_measure by this factor (negative control)");

  auto* path_cmd = app.add_subcommand("path", "write one sampled path as CSV (t,x1..xd)");
  std::string path_kind = "walk", path_out = "path.csv";
  int path_dim = 2, path_grid = 6;
  std::size_t path_steps = 16;
  double path_eps = 0.3, path_t = 1.0;
  std::uint64_t path_seed = 1;
  path_cmd->add_option("--kind", path_kind, "walk (uniform ball steps) or brownian (dyadic grid)")
      ->check(CLI::IsMember({"walk", "brownian"}));
  path_cmd->add_option("--dim", path_dim, "dimension d");
  path_cmd->add_option("--steps", path_steps, "walk steps");
  path_cmd->add_option("--eps", path_eps, "walk step radius");
  path_cmd->add_option("--t", path_t, "Brownian time horizon");
  path_cmd->add_option("--grid", path_grid, "dyadic grid depth n");
  path_cmd->add_option("--seed", path_seed, "seed");
  path_cmd->add_option("--out", path_out, "CSV output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      json flags = json::object();
      if (*o_exp) flags["experiment"] = experiment;
      if (*o_seed) flags["seed"] = seed;
      if (*o_rep) flags["replicates"] = replicates;
      if (*o_dim) flags["dim"] = dim;
      if (*o_out) flags["out"] = out;
      if (*o_workers) flags["workers"] = workers;
      if (*o_steps) flags["steps"] = steps;
      if (*o_t) flags["t"] = t;
      if (*o_grid) flags["grid"] = grid;
      if (*o_eps) flags["eps"] = eps;
      if (*o_method) flags["method"] = method;
      if (*o_samples) flags["samples"] = samples;
      json merged = load_config(config);
      if (!merged.is_object()) throw wsl::ConfigError("<root>: config must be a JSON object");
      merged.update(flags);
      if (*o_shape) {
        // The flag form needs the dimension, which may come from the file.
        int d = merged.contains("dim") && merged["dim"].is_number_integer() ? merged["dim"].get<int>() : 0;
        if (d < 1 || d >= wsl::kMaxDim) {
          const std::string e = merged.contains("experiment") && merged["experiment"].is_string()
                                    ? merged["experiment"].get<std::string>()
                                    : "";
          d = e == "discrete" ? 1 : e == "capacity" ? 3 : 2;
        }
        merged["shape"] = wsl::shape_flag_to_json(shape, d);
      }
      return run(merged, quiet);
    }
    if (*path_cmd) {
      wsl::RngStream rng(path_seed, 0);
      const wsl::Path p = path_kind == "walk"
                              ? wsl::ball_walk(path_dim, path_eps, wsl::Point(path_dim), path_steps, rng)
                              : wsl::brownian_grid(path_dim, wsl::DyadicGrid(path_t, path_grid), rng);
      std::ofstream os(path_out);
      if (!os) throw std::runtime_error("cannot write " + path_out);
      wsl::write_path_csv(os, p);
      return 0;
    }
    const auto checks = wsl::selftest(self_seed, wsl::resolve_workers(self_workers), fault);
    int failed = 0;
    for (const auto& c : checks) {
      std::printf("%s %-10s %s%s%s\n", c.pass ? "PASS" : "FAIL", c.suite.c_str(), c.name.c_str(),
                  c.detail.empty() ? "" : " | ", c.detail.c_str());
      failed += c.pass ? 0 : 1;
    }
    std::printf("%zu checks, %d failed\n", checks.size(), failed);
    return failed == 0 ? 0 : 1;
  } catch (const wsl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
