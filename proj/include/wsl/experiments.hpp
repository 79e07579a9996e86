#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsl/geometry.hpp"
#include "wsl/sausage.hpp"
#include "wsl/stochastic.hpp"

namespace wsl {

inline constexpr int kCsvSchemaVersion = 1;

/// Invalid configuration; the message starts with the path of the
/// offending key, e.g. "shape.ball.radius: must be > 0".
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Validated experiment parameters. Unset optionals take the experiment's
/// default (see README).
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  std::optional<std::size_t> replicates;
  std::optional<int> dim;
  std::optional<int> grid;
  std::optional<double> t;
  std::optional<std::size_t> steps;
  std::optional<double> eps;
  std::optional<nlohmann::json> shape;
  std::optional<nlohmann::json> schedule;
  std::optional<std::string> method;
  std::optional<std::size_t> samples;
  std::optional<double> r;
  std::optional<double> lambda;
  std::optional<nlohmann::json> drift;
  std::optional<double> L;
  std::optional<double> c;
  std::optional<std::vector<double>> R_list;
  std::optional<std::vector<double>> t_list;
  std::optional<std::vector<double>> times;
  std::optional<std::size_t> instances;
  std::optional<std::size_t> resolution;
  std::optional<double> max_step;
  std::optional<std::size_t> walks;
  std::optional<std::string> pipeline;
  std::optional<double> window_margin;
  std::optional<bool> cross_check;
  std::string out;
  unsigned workers = 0;
  bool quiet = false;
};

const std::vector<std::string>& experiment_names();

/// Parses a config object; unknown keys and wrong types raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Overlays every key of `overrides` onto `base` (flags win over the file).
ExperimentConfig merge_config(const ExperimentConfig& base, const nlohmann::json& overrides);

/// {"ball": {"center": [..], "radius": r}}, {"box": {"min": [..], "max": [..]}}
/// or {"box": {"side": s}}, {"union": [...]}, {"translate": {"inner": .., "offset": [..]}},
/// {"dyadic": {"depth": k, "cubes": [[..], ..]}}, {"eroded"|"enlarged": {"inner": .., "delta": x}}.
Shape parse_shape(const nlohmann::json& j, int dim, const std::string& path = "shape");

/// Short flag form: "ball:<radius>" or "box:<side>", centered at the origin.
nlohmann::json shape_flag_to_json(const std::string& flag, int dim);

/// List of {"from_index": k, "shape": ..} or {"from_time": s, "shape": ..}.
ShapeSchedule parse_schedule(const nlohmann::json& j, int dim, const std::string& path = "schedule");

/// {"zero": true}, {"constant": [..]}, {"linear": [..]}, or
/// {"jump": {"at": s, "before": [..], "after": [..]}}.
Drift parse_drift(const nlohmann::json& j, const std::string& path = "drift");

struct ExperimentOutput {
  std::string csv;
  std::string summary;
  bool invariants_pass = true;
  double wall_time_ms = 0.0;
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Small configuration of an experiment (used by selftest and the
/// worker-count determinism check).
ExperimentConfig smoke_config(const std::string& experiment);

struct SelftestCheck {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Reduced invariant suite. A cap-measure fault factor other than 1
/// corrupts cap_measure for the duration of the run.
std::vector<SelftestCheck> selftest(std::uint64_t seed, unsigned workers, double cap_measure_fault = 1.0);

}  // namespace wsl
