#include "wsl/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "wsl/capacity.hpp"
#include "wsl/coupling.hpp"
#include "wsl/detection.hpp"
#include "wsl/instances.hpp"
#include "wsl/parallel.hpp"
#include "wsl/spherewalk.hpp"

namespace wsl {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, "must be > 0");
  return v;
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

Point point(const json& j, int dim, const std::string& path) {
  const auto v = numbers(j, path);
  if (dim > 0 && static_cast<int>(v.size()) != dim) {
    fail(path, "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(v.size()));
  }
  try {
    return Point::from_span(v);
  } catch (const DimensionError& e) {
    fail(path, e.what());
  }
}

const json& single_entry(const json& j, const std::string& path, std::string& key) {
  if (!j.is_object() || j.size() != 1) fail(path, "expected an object with exactly one key");
  key = j.begin().key();
  return j.begin().value();
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

const json& required(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  return j.at(key);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  // Cells are given as column -> value; every row carries all columns.
  void row(const std::map<std::string, std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const auto it = cells.find(columns_[i]);
      line += (i ? "," : "") + (it == cells.end() ? std::string() : quote(it->second));
    }
    for (const auto& [k, v] : cells) {
      bool known = false;
      for (const auto& c : columns_) known = known || c == k;
      if (!known) throw std::logic_error("csv: undeclared column " + k);
    }
    rows_ += line + "\n";
  }

  [[nodiscard]] std::string str() const {
    std::string head;
    for (std::size_t i = 0; i < columns_.size(); ++i) head += (i ? "," : "") + columns_[i];
    return head + "\n" + rows_;
  }

 private:
  std::vector<std::string> columns_;
  std::string rows_;
};

std::vector<std::string> with_prefix(std::vector<std::string> cols) {
  cols.insert(cols.begin(), {"schema_version", "experiment", "seed"});
  return cols;
}

std::map<std::string, std::string> base_cells(const ExperimentConfig& cfg) {
  return {{"schema_version", std::to_string(kCsvSchemaVersion)},
          {"experiment", cfg.experiment},
          {"seed", std::to_string(cfg.seed)}};
}

struct Summary {
  std::ostringstream os;
  bool pass = true;

  void param(const std::string& k, const std::string& v) { os << "  " << k << " = " << v << "\n"; }
  void line(const std::string& s) { os << "  " << s << "\n"; }
  void check(const std::string& what, bool ok) {
    os << "  [" << (ok ? "PASS" : "FAIL") << "] " << what << "\n";
    pass = pass && ok;
  }
};

void add_comparison(std::map<std::string, std::string>& cells, const ComparisonResult& t) {
  cells["mean_diff"] = num(t.mean_diff);
  cells["stderr"] = num(t.std_error);
  cells["ci_low"] = num(t.ci_low);
  cells["ci_high"] = num(t.ci_high);
  cells["p_value"] = num(t.p_value);
  cells["level"] = num(t.level);
  cells["degenerate"] = t.degenerate ? "1" : "0";
}

const std::vector<std::string> kComparisonCols = {"mean_diff", "stderr", "ci_low", "ci_high",
                                                  "p_value",   "level",  "degenerate"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string comparison_line(const ComparisonResult& t) {
  std::ostringstream os;
  os << "mean_diff = " << num(t.mean_diff) << " (stderr " << num(t.std_error) << "), one-sided "
     << num(100.0 * t.level) << "% CI [" << num(t.ci_low) << ", inf), p = " << num(t.p_value)
     << (t.degenerate ? " (identically zero)" : "");
  return os.str();
}

// ---------------------------------------------------------------- resolved parameters

struct Resolved {
  const ExperimentConfig& cfg;

  template <class T>
  T get(const std::optional<T>& v, T fallback) const {
    return v ? *v : fallback;
  }
  [[nodiscard]] ReplicateSettings rep(std::size_t fallback) const {
    ReplicateSettings r;
    r.replicates = get(cfg.replicates, fallback);
    r.seed = cfg.seed;
    r.workers = resolve_workers(cfg.workers);
    return r;
  }
  [[nodiscard]] SausageOptions sausage(const std::string& method, std::size_t samples) const {
    SausageOptions o;
    o.method = parse_sausage_method(get(cfg.method, method));
    o.samples = get(cfg.samples, samples);
    return o;
  }
  [[nodiscard]] Shape shape(int dim, const std::string& fallback) const {
    return parse_shape(cfg.shape ? *cfg.shape : shape_flag_to_json(fallback, dim), dim);
  }
  [[nodiscard]] Drift drift(int dim) const {
    if (cfg.drift) return parse_drift(*cfg.drift);
    Point v(dim);
    v[0] = 1.0;
    return Drift::linear(v);
  }
};

std::string schedule_text(const ShapeSchedule& s) {
  std::ostringstream os;
  os << (s.key() == ShapeSchedule::Key::Index ? "index" : "time") << "{";
  for (std::size_t i = 0; i < s.pieces().size(); ++i) {
    os << (i ? "; " : "") << num(s.pieces()[i].from) << ": " << s.pieces()[i].shape.describe();
  }
  return os.str() + "}";
}

// ---------------------------------------------------------------- experiments

ExperimentOutput run_volume(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const int d = R.get(cfg.dim, 2);
  const std::size_t steps = R.get(cfg.steps, std::size_t{16});
  const double eps = R.get(cfg.eps, 0.3);
  const ShapeSchedule sched =
      cfg.schedule ? parse_schedule(*cfg.schedule, d) : ShapeSchedule::constant(R.shape(d, "ball:1"));
  const auto rep = R.rep(1000);
  const auto opts = R.sausage(d == 1 ? "interval" : "hitting", 4096);
  const auto e = expected_sausage_volume(
      [&](RngStream& rng) { return ball_walk(d, eps, Point(d), steps, rng); }, sched, rep, opts);
  Csv csv(with_prefix({"replicates", "dim", "steps", "eps", "schedule", "method", "samples", "estimate", "stderr"}));
  auto cells = base_cells(cfg);
  cells.insert({{"replicates", std::to_string(rep.replicates)},
                {"dim", std::to_string(d)},
                {"steps", std::to_string(steps)},
                {"eps", num(eps)},
                {"schedule", schedule_text(sched)},
                {"method", to_string(opts.method)},
                {"samples", std::to_string(opts.samples)},
                {"estimate", num(e.value)},
                {"stderr", num(e.std_error)}});
  csv.row(cells);
  sum.param("schedule", schedule_text(sched));
  sum.param("walk", "d=" + std::to_string(d) + " steps=" + std::to_string(steps) + " eps=" + num(eps));
  sum.line("E[vol] = " + num(e.value) + " (stderr " + num(e.std_error) + ")");
  if (steps == 0 && sched.pieces().size() == 1) {
    const VolumeValue v = volume(sched.pieces().front().shape);
    if (v.exact) {
      sum.check("steps = 0 matches vol(U_0) = " + num(v.value) + " within 4 stderr",
                std::abs(e.value - v.value) <= 4.0 * e.std_error + 1e-9 * std::max(1.0, v.value));
    }
  }
  return {csv.str(), "", true, 0.0};
}

std::vector<std::string> comparison_cols(std::vector<std::string> params) {
  return with_prefix(concat(concat(std::move(params), {"d_volume", "d_stderr", "ball_volume", "ball_stderr"}),
                            concat(kComparisonCols, {"replicates"})));
}

void comparison_cells(std::map<std::string, std::string>& cells, const PairedComparison& c) {
  cells["d_volume"] = num(c.first.value);
  cells["d_stderr"] = num(c.first.std_error);
  cells["ball_volume"] = num(c.second.value);
  cells["ball_stderr"] = num(c.second.std_error);
  add_comparison(cells, c.test);
  cells["replicates"] = std::to_string(c.test.replicates);
}

ExperimentOutput run_theorem1(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const int d = R.get(cfg.dim, 2);
  const DyadicGrid grid(R.get(cfg.t, 1.0), R.get(cfg.grid, 6));
  const std::string pipeline = R.get(cfg.pipeline, std::string("grid"));
  const ShapeSchedule sched =
      cfg.schedule ? parse_schedule(*cfg.schedule, d) : ShapeSchedule::constant(R.shape(d, "box:1"));
  const auto rep = R.rep(10'000);
  const auto opts = R.sausage(d == 1 ? "interval" : "hitting", 4096);
  Csv csv(comparison_cols({"dim", "t", "grid", "schedule", "pipeline", "method", "samples", "delta",
                           "omega_violation_rate"}));
  auto cells = base_cells(cfg);
  cells.insert({{"dim", std::to_string(d)},
                {"t", num(grid.t)},
                {"grid", std::to_string(grid.n)},
                {"schedule", schedule_text(sched)},
                {"pipeline", pipeline},
                {"method", to_string(opts.method)},
                {"samples", std::to_string(opts.samples)}});
  ComparisonResult test;
  if (pipeline == "grid") {
    const auto c = compare_isoperimetric([&](RngStream& rng) { return brownian_grid(d, grid, rng); }, sched, rep, opts);
    comparison_cells(cells, c);
    test = c.test;
    sum.line("E[vol D-sausage] = " + num(c.first.value) + ", E[vol ball-sausage] = " + num(c.second.value));
  } else if (pipeline == "eroded") {
    const auto e = discretized_brownian_sausage(grid, sched, rep, opts);
    cells["d_volume"] = num(e.z_volume.value);
    cells["d_stderr"] = num(e.z_volume.std_error);
    cells["ball_volume"] = num(e.ball_volume.value);
    cells["ball_stderr"] = num(e.ball_volume.std_error);
    cells["delta"] = num(e.delta);
    cells["omega_violation_rate"] = num(e.omega_violation_rate);
    add_comparison(cells, e.test);
    cells["replicates"] = std::to_string(e.test.replicates);
    test = e.test;
    sum.line("E[vol Z-sausage] = " + num(e.z_volume.value) + ", E[vol r*-ball sausage] = " +
             num(e.ball_volume.value) + ", delta = " + num(e.delta) +
             ", Omega_n violation rate = " + num(e.omega_violation_rate));
  } else {
    fail("pipeline", "expected \"grid\" or \"eroded\"");
  }
  csv.row(cells);
  sum.param("schedule", schedule_text(sched));
  sum.param("grid", "t=" + num(grid.t) + " n=" + std::to_string(grid.n) + " pipeline=" + pipeline);
  sum.line(comparison_line(test));
  sum.check("one-sided CI excludes negative values", test.nonnegative());
  return {csv.str(), "", true, 0.0};
}

ShapeSchedule default_discrete_schedule() {
  return ShapeSchedule::by_index({{0.0, Shape::box(Point{0.0}, Point{1.0})}, {1.0, Shape::box(Point{0.0}, Point{3.0})}});
}

ExperimentOutput run_discrete(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const int d = R.get(cfg.dim, 1);
  const std::size_t steps = R.get(cfg.steps, std::size_t{1});
  const double eps = R.get(cfg.eps, 1.0);
  const ShapeSchedule sched = cfg.schedule   ? parse_schedule(*cfg.schedule, d)
                              : cfg.shape    ? ShapeSchedule::constant(parse_shape(*cfg.shape, d))
                              : d == 1       ? default_discrete_schedule()
                                             : ShapeSchedule::constant(R.shape(d, "box:1"));
  const auto rep = R.rep(100'000);
  const auto opts = R.sausage(d == 1 ? "interval" : "hitting", 4096);
  const auto c = compare_isoperimetric(
      [&](RngStream& rng) { return ball_walk(d, eps, Point(d), steps, rng); }, sched, rep, opts);
  Csv csv(comparison_cols({"dim", "steps", "eps", "schedule", "method", "samples"}));
  auto cells = base_cells(cfg);
  cells.insert({{"dim", std::to_string(d)},
                {"steps", std::to_string(steps)},
                {"eps", num(eps)},
                {"schedule", schedule_text(sched)},
                {"method", to_string(opts.method)},
                {"samples", std::to_string(opts.samples)}});
  comparison_cells(cells, c);
  csv.row(cells);
  sum.param("schedule", schedule_text(sched));
  sum.param("walk", "d=" + std::to_string(d) + " steps=" + std::to_string(steps) + " eps=" + num(eps));
  sum.line("E[vol D-sausage] = " + num(c.first.value) + " (stderr " + num(c.first.std_error) +
           "), E[vol ball-sausage] = " + num(c.second.value) + " (stderr " + num(c.second.std_error) + ")");
  sum.line(comparison_line(c.test));
  sum.check("one-sided CI excludes negative values", c.test.nonnegative());
  return {csv.str(), "", true, 0.0};
}

ExperimentOutput run_drift(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const int d = cfg.drift ? parse_drift(*cfg.drift).dim() : R.get(cfg.dim, 2);
  const Drift f = R.drift(d);
  if (cfg.dim && *cfg.dim != f.dim()) fail("drift", "dimension differs from dim");
  const DyadicGrid grid(R.get(cfg.t, 1.0), R.get(cfg.grid, 6));
  const double r = R.get(cfg.r, 0.5);
  const auto rep = R.rep(4000);
  const auto opts = R.sausage(d == 1 ? "interval" : "hitting", 4096);
  const auto c = drift_comparison(f, r, grid, rep, opts);
  Csv csv(comparison_cols({"dim", "t", "grid", "r", "drift", "method", "samples"}));
  auto cells = base_cells(cfg);
  cells.insert({{"dim", std::to_string(d)},
                {"t", num(grid.t)},
                {"grid", std::to_string(grid.n)},
                {"r", num(r)},
                {"drift", f.describe()},
                {"method", to_string(opts.method)},
                {"samples", std::to_string(opts.samples)}});
  comparison_cells(cells, c);
  csv.row(cells);
  sum.param("drift", f.describe());
  sum.line("E[vol drifted] = " + num(c.first.value) + ", E[vol undrifted] = " + num(c.second.value));
  sum.line(comparison_line(c.test));
  sum.check("one-sided CI excludes negative values", c.test.nonnegative());
  return {csv.str(), "", true, 0.0};
}

ExperimentOutput run_rearrange(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const int d = R.get(cfg.dim, 1);
  if (d != 1 && d != 2) fail("dim", "rearrange supports d = 1 (quadrature) or d = 2 (Monte Carlo)");
  const std::size_t instances = R.get(cfg.instances, static_cast<std::size_t>(d == 1 ? 50 : 20));
  const std::size_t M = R.get(cfg.resolution, std::size_t{4096});
  const std::size_t samples = R.get(cfg.samples, std::size_t{200'000});
  const unsigned workers = resolve_workers(cfg.workers);
  const auto res = parallel_map(instances, workers, [&](std::size_t k) {
    RngStream rng(cfg.seed, k);
    const std::size_t n = 2 + k % 2;
    if (d == 1) {
      const auto inst = random_circle_instance(n, M, rng);
      return std::make_pair(inst.describe(),
                            rearrangement_quadrature(inst.sphere, inst.sets, inst.kernels, inst.sphere.north_pole(), M));
    }
    const auto inst = random_sphere_instance(n, rng);
    RngStream g = rng.child(99);
    return std::make_pair(inst.describe(), rearrangement_monte_carlo(inst.sphere, inst.sets, inst.kernels,
                                                                     inst.sphere.north_pole(), samples, g));
  });
  Csv csv(with_prefix({"dim", "instance", "n", "method", "resolution", "samples", "instance_spec", "lhs", "rhs",
                       "margin", "stderr", "pass"}));
  bool all = true;
  double worst = INFINITY;
  for (std::size_t k = 0; k < res.size(); ++k) {
    const auto& [desc, r] = res[k];
    const bool ok = d == 1 ? r.margin >= -1e-9 : r.margin >= -4.0 * r.std_error - 1e-9;
    all = all && ok;
    worst = std::min(worst, r.margin);
    auto cells = base_cells(cfg);
    cells.insert({{"dim", std::to_string(d)},
                  {"instance", std::to_string(k)},
                  {"n", std::to_string(2 + k % 2)},
                  {"method", d == 1 ? "quadrature" : "monte-carlo"},
                  {"resolution", d == 1 ? std::to_string(M) : ""},
                  {"samples", d == 1 ? "" : std::to_string(samples)},
                  {"instance_spec", desc},
                  {"lhs", num(r.lhs)},
                  {"rhs", num(r.rhs)},
                  {"margin", num(r.margin)},
                  {"stderr", num(r.std_error)},
                  {"pass", ok ? "1" : "0"}});
    csv.row(cells);
  }
  sum.param("instances", std::to_string(instances) + (d == 1 ? " circle, M = " + std::to_string(M) : " on S^2"));
  sum.line("min margin = " + num(worst));
  sum.check(d == 1 ? "every margin >= -1e-9" : "every margin >= -4 stderr - 1e-9", all);
  return {csv.str(), "", true, 0.0};
}

ExperimentOutput run_sphere_survival(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const std::size_t instances = R.get(cfg.instances, std::size_t{25});
  const std::size_t M = R.get(cfg.resolution, std::size_t{4096});
  const std::size_t reps = R.get(cfg.replicates, std::size_t{20'000});
  const unsigned workers = resolve_workers(cfg.workers);
  struct Row {
    std::string desc;
    std::size_t n;
    double eps, theta, caps;
    ProbabilityEstimate mc;
  };
  std::vector<Row> rows;
  for (std::size_t k = 0; k < instances; ++k) {
    RngStream rng(cfg.seed, k);
    const std::size_t n = 1 + k % 3;
    const auto suite = random_obstacle_suite(n, M, rng);
    Row row{suite.describe(), n, suite.eps, circle_survival_quadrature(suite.sphere, suite.obstacles, suite.eps, M),
            circle_survival_quadrature(suite.sphere, rearranged_obstacles(suite), suite.eps, M), {}};
    if (reps > 0) row.mc = survival_probability(suite.sphere, suite.obstacles, suite.eps, reps, cfg.seed + k, workers);
    rows.push_back(row);
  }
  Csv csv(with_prefix({"instance", "n", "eps", "resolution", "instance_spec", "survival_obstacles", "survival_caps",
                       "margin", "mc_survival_obstacles", "mc_stderr", "replicates", "pass"}));
  bool all = true, mc_ok = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    const bool ok = r.theta <= r.caps + 1e-9;
    all = all && ok;
    // The quadrature discretizes the kernel; allow one cell of slack per step.
    if (reps > 0) mc_ok = mc_ok && std::abs(r.mc.value - r.theta) <= 4.0 * r.mc.std_error + 2e-3 * r.n;
    auto cells = base_cells(cfg);
    cells.insert({{"instance", std::to_string(k)},
                  {"n", std::to_string(r.n)},
                  {"eps", num(r.eps)},
                  {"resolution", std::to_string(M)},
                  {"instance_spec", r.desc},
                  {"survival_obstacles", num(r.theta)},
                  {"survival_caps", num(r.caps)},
                  {"margin", num(r.caps - r.theta)},
                  {"mc_survival_obstacles", reps > 0 ? num(r.mc.value) : ""},
                  {"mc_stderr", reps > 0 ? num(r.mc.std_error) : ""},
                  {"replicates", std::to_string(reps)},
                  {"pass", ok ? "1" : "0"}});
    csv.row(cells);
  }
  sum.param("suites", std::to_string(instances) + " on S^1, M = " + std::to_string(M));
  sum.check("P(tau^Theta > n) <= P(tau^C > n) + 1e-9 on every suite", all);
  if (reps > 0) sum.check("Monte Carlo agrees with quadrature (4 stderr + grid slack)", mc_ok);
  return {csv.str(), "", true, 0.0};
}

ExperimentOutput run_coupling(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  CouplingParams p;
  p.L = R.get(cfg.L, 1.0);
  p.c = R.get(cfg.c, 2.0);
  p.n = R.get(cfg.steps, std::size_t{10});
  p.eps = R.get(cfg.eps, 0.1);
  const int d = R.get(cfg.dim, 2);
  const auto R_list = R.get(cfg.R_list, std::vector<double>{1e2, 1e3, 1e4, 1e6});
  const auto rep = R.rep(20'000);
  const auto rows = coupling_failure_curve(p, d, R_list, rep.replicates, rep.seed, rep.workers);
  Csv csv(with_prefix({"R", "d", "L", "c", "n", "eps", "failure_prob", "stderr", "replicates"}));
  bool mono = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto cells = base_cells(cfg);
    cells.insert({{"R", num(r.R)},
                  {"d", std::to_string(r.d)},
                  {"L", num(p.L)},
                  {"c", num(p.c)},
                  {"n", std::to_string(p.n)},
                  {"eps", num(p.eps)},
                  {"failure_prob", num(r.failure_prob)},
                  {"stderr", num(r.std_error)},
                  {"replicates", std::to_string(r.replicates)}});
    csv.row(cells);
    sum.line("R = " + num(r.R) + ": failure = " + num(r.failure_prob) + " (stderr " + num(r.std_error) + ")");
    if (i > 0 && rows[i].R > rows[i - 1].R) {
      mono = mono && rows[i].failure_prob <=
                         rows[i - 1].failure_prob + 4.0 * std::hypot(rows[i].std_error, rows[i - 1].std_error);
    }
  }
  sum.check("failure weakly decreasing in R (4 stderr band)", mono);
  return {csv.str(), "", true, 0.0};
}

ExperimentOutput run_duality(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const std::size_t instances = R.get(cfg.instances, std::size_t{20});
  Csv csv(with_prefix({"instance", "d", "n", "L", "c", "eps", "obstacles", "replicates", "method", "samples", "lhs",
                       "lhs_stderr", "rhs", "rhs_stderr", "gap", "combined_stderr", "pass"}));
  bool all = true;
  for (std::size_t k = 0; k < instances; ++k) {
    RngStream rng(cfg.seed, k);
    const auto inst = random_duality_instance(rng);
    auto rep = R.rep(20'000);
    rep.seed = splitmix64(cfg.seed ^ (0x100 + k));
    const auto opts = R.sausage(inst.d == 1 ? "interval" : "hitting", 512);
    const auto r = survival_duality_check(inst.obstacles, inst.n, inst.L, inst.c, inst.eps, rep, opts);
    const bool ok = std::abs(r.gap) <= 5.0 * r.combined_se;
    all = all && ok;
    auto cells = base_cells(cfg);
    std::string obstacles;
    for (std::size_t j = 0; j <= inst.n; ++j) {
      obstacles += (j ? "; " : "") + inst.obstacles.at(j, static_cast<double>(j)).describe();
    }
    cells.insert({{"instance", std::to_string(k)},
                  {"d", std::to_string(inst.d)},
                  {"n", std::to_string(inst.n)},
                  {"L", num(inst.L)},
                  {"c", num(inst.c)},
                  {"eps", num(inst.eps)},
                  {"obstacles", obstacles},
                  {"replicates", std::to_string(rep.replicates)},
                  {"method", to_string(opts.method)},
                  {"samples", std::to_string(opts.samples)},
                  {"lhs", num(r.lhs)},
                  {"lhs_stderr", num(r.lhs_se)},
                  {"rhs", num(r.rhs)},
                  {"rhs_stderr", num(r.rhs_se)},
                  {"gap", num(r.gap)},
                  {"combined_stderr", num(r.combined_se)},
                  {"pass", ok ? "1" : "0"}});
    csv.row(cells);
  }
  sum.param("instances", std::to_string(instances));
  sum.check("|lhs - rhs| <= 5 combined stderr on every instance", all);
  return {csv.str(), "", true, 0.0};
}

ExperimentOutput run_capacity(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const int d = R.get(cfg.dim, 3);
  if (d != 3) fail("dim", "capacity runs in d = 3");
  const Shape a = R.shape(3, "ball:1");
  const auto t_list = R.get(cfg.t_list, std::vector<double>{5.0, 10.0, 20.0, 40.0});
  const double max_step = R.get(cfg.max_step, 0.01);
  const auto rep = R.rep(400);
  const auto opts = R.sausage("coverage", 2048);
  const auto rows = ksw_trend(a, t_list, max_step, rep, opts);
  CapacityOptions copts;
  copts.walks = R.get(cfg.walks, std::size_t{200'000});
  copts.seed = splitmix64(cfg.seed ^ 0xca9ULL);
  copts.workers = rep.workers;
  const auto cap = capacity_hitting(a, copts);
  Csv csv(with_prefix({"kind", "shape", "t", "grid", "grid_step", "method", "samples", "replicates", "volume",
                       "volume_stderr", "ratio", "ratio_stderr", "capacity", "capacity_stderr", "start_radius",
                       "walks"}));
  for (const auto& r : rows) {
    auto cells = base_cells(cfg);
    cells.insert({{"kind", "ratio"},
                  {"shape", a.describe()},
                  {"t", num(r.t)},
                  {"grid", std::to_string(r.grid_n)},
                  {"grid_step", num(r.grid_step)},
                  {"method", to_string(opts.method)},
                  {"samples", std::to_string(opts.samples)},
                  {"replicates", std::to_string(rep.replicates)},
                  {"volume", num(r.volume.value)},
                  {"volume_stderr", num(r.volume.std_error)},
                  {"ratio", num(r.ratio)},
                  {"ratio_stderr", num(r.ratio_se)}});
    csv.row(cells);
    sum.line("t = " + num(r.t) + ": E[vol]/t = " + num(r.ratio) + " (stderr " + num(r.ratio_se) + ")");
  }
  auto cells = base_cells(cfg);
  cells.insert({{"kind", "capacity"},
                {"shape", a.describe()},
                {"capacity", num(cap.value)},
                {"capacity_stderr", num(cap.std_error)},
                {"start_radius", num(cap.start_radius)},
                {"walks", std::to_string(cap.walks)}});
  csv.row(cells);
  sum.line("capacity (far-sphere hitting) = " + num(cap.value) + " (stderr " + num(cap.std_error) + ")");
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) decreasing = decreasing && rows[i + 1].ratio < rows[i].ratio;
  sum.check("E[vol]/t decreasing in t", decreasing);
  if (!rows.empty()) {
    const double rel = std::abs(rows.back().ratio - cap.value) / cap.value;
    sum.check("E[vol]/t at the largest t within 5% of the capacity (relative gap " + num(rel) + ")", rel <= 0.05);
  }
  return {csv.str(), "", true, 0.0};
}

ExperimentOutput run_detect(const ExperimentConfig& cfg, Summary& sum) {
  const Resolved R{cfg};
  const int d = cfg.drift ? parse_drift(*cfg.drift).dim() : R.get(cfg.dim, 2);
  DetectionConfig dc;
  dc.lambda = R.get(cfg.lambda, 0.5);
  dc.r = R.get(cfg.r, 0.5);
  dc.t = R.get(cfg.t, 1.0);
  dc.f = R.drift(d);
  dc.window_margin = R.get(cfg.window_margin, 6.0);
  const int n = R.get(cfg.grid, 6);
  const auto times = R.get(cfg.times, std::vector<double>{0.5 * dc.t, dc.t});
  const auto rep = R.rep(10'000);
  const auto report = pascal_check(dc, n, times, rep);
  std::vector<SurvivalCurve> curves = {report.still, report.drift};
  if (R.get(cfg.cross_check, false)) {
    curves.push_back(survival_from_volume(dc, n, rep, R.sausage(d == 1 ? "interval" : "hitting", 1024)));
  }
  Csv csv(with_prefix({"dim", "lambda", "r", "horizon", "grid", "drift", "window_margin", "t", "survival", "stderr",
                       "variant", "replicates"}));
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      auto cells = base_cells(cfg);
      cells.insert({{"dim", std::to_string(d)},
                    {"lambda", num(dc.lambda)},
                    {"r", num(dc.r)},
                    {"horizon", num(dc.t)},
                    {"grid", std::to_string(n)},
                    {"drift", dc.f.describe()},
                    {"window_margin", num(dc.window_margin)},
                    {"t", num(p.t)},
                    {"survival", num(p.survival)},
                    {"stderr", num(p.std_error)},
                    {"variant", c.variant},
                    {"replicates", std::to_string(c.replicates)}});
      csv.row(cells);
    }
  }
  sum.param("detectors", "lambda=" + num(dc.lambda) + " r=" + num(dc.r) + " t=" + num(dc.t) +
                             " grid=" + std::to_string(n) + " drift=" + dc.f.describe());
  bool ordered = true;
  for (const auto& row : report.rows) {
    sum.line("t = " + num(row.t) + ": still " + num(row.still) + ", drift " + num(row.drift) + ", " +
             comparison_line(row.test));
    ordered = ordered && row.test.nonnegative();
  }
  sum.check("drifted survival <= still survival at every requested t (99%)", ordered);
  const double vp = void_probability(dc.lambda, d, dc.r);
  const auto& p0 = report.still.points.front();
  sum.check("t = 0 survival " + num(p0.survival) + " matches void probability " + num(vp) + " within 4 stderr",
            std::abs(p0.survival - vp) <= 4.0 * p0.std_error);
  if (curves.size() == 3) {
    const auto& vc = curves[2];
    bool agree = true;
    for (std::size_t j = 0; j < vc.points.size(); ++j) {
      const auto& e = report.drift.points[j];
      agree = agree && std::abs(e.survival - vc.points[j].survival) <=
                           4.0 * std::hypot(e.std_error, vc.points[j].std_error) + 1e-6;
    }
    sum.check("empirical survival matches exp(-lambda E[vol]) within 4 propagated stderr", agree);
  }
  return {csv.str(), "", true, 0.0};
}

using Runner = ExperimentOutput (*)(const ExperimentConfig&, Summary&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> m = {
      {"volume", run_volume},     {"theorem1", run_theorem1},
      {"discrete", run_discrete}, {"drift", run_drift},
      {"rearrange", run_rearrange}, {"sphere-survival", run_sphere_survival},
      {"coupling", run_coupling}, {"duality", run_duality},
      {"capacity", run_capacity}, {"detect", run_detect},
  };
  return m;
}

template <class T>
void set_opt(std::optional<T>& field, const json& j, const std::string& key, T (*conv)(const json&, const std::string&)) {
  if (j.contains(key)) field = conv(j.at(key), key);
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}
std::size_t as_count(const json& j, const std::string& path) { return count(j, path); }
double as_number(const json& j, const std::string& path) { return number(j, path); }
double as_positive(const json& j, const std::string& path) { return positive(j, path); }
std::vector<double> as_numbers(const json& j, const std::string& path) { return numbers(j, path); }
std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}
bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}
json as_json(const json& j, const std::string&) { return j; }

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment", "seed",   "replicates", "dim",        "grid",       "t",          "steps",
      "eps",        "shape",  "schedule",   "method",     "samples",    "r",          "lambda",
      "drift",      "L",      "c",          "R_list",     "t_list",     "times",      "instances",
      "resolution", "max_step", "walks",    "pipeline",   "window_margin", "cross_check", "out",
      "workers",    "quiet"};
  return keys;
}

void apply(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) fail("<root>", "config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known_keys().count(it.key())) fail(it.key(), "unknown key");
  }
  if (j.contains("experiment")) {
    c.experiment = as_string(j.at("experiment"), "experiment");
    if (!runners().count(c.experiment)) fail("experiment", "unknown experiment '" + c.experiment + "'");
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  set_opt(c.replicates, j, "replicates", as_count);
  set_opt(c.dim, j, "dim", as_int);
  if (c.dim && (*c.dim < 1 || *c.dim > kMaxDim - 1)) fail("dim", "expected 1.." + std::to_string(kMaxDim - 1));
  set_opt(c.grid, j, "grid", as_int);
  if (c.grid && (*c.grid < 0 || *c.grid > 24)) fail("grid", "expected 0..24");
  set_opt(c.t, j, "t", as_positive);
  set_opt(c.steps, j, "steps", as_count);
  set_opt(c.eps, j, "eps", as_positive);
  set_opt(c.shape, j, "shape", as_json);
  set_opt(c.schedule, j, "schedule", as_json);
  set_opt(c.method, j, "method", as_string);
  if (c.method) {
    try {
      parse_sausage_method(*c.method);
    } catch (const std::invalid_argument& e) {
      fail("method", e.what());
    }
  }
  set_opt(c.samples, j, "samples", as_count);
  set_opt(c.r, j, "r", as_positive);
  set_opt(c.lambda, j, "lambda", as_positive);
  set_opt(c.drift, j, "drift", as_json);
  set_opt(c.L, j, "L", as_positive);
  set_opt(c.c, j, "c", as_positive);
  set_opt(c.R_list, j, "R_list", as_numbers);
  set_opt(c.t_list, j, "t_list", as_numbers);
  set_opt(c.times, j, "times", as_numbers);
  set_opt(c.instances, j, "instances", as_count);
  set_opt(c.resolution, j, "resolution", as_count);
  set_opt(c.max_step, j, "max_step", as_positive);
  set_opt(c.walks, j, "walks", as_count);
  set_opt(c.pipeline, j, "pipeline", as_string);
  set_opt(c.window_margin, j, "window_margin", as_number);
  set_opt(c.cross_check, j, "cross_check", as_bool);
  if (j.contains("out")) c.out = as_string(j.at("out"), "out");
  if (j.contains("workers")) c.workers = static_cast<unsigned>(count(j.at("workers"), "workers"));
  if (j.contains("quiet")) c.quiet = as_bool(j.at("quiet"), "quiet");
  // Nested records are checked eagerly so errors surface before sampling.
  const int d = c.dim.value_or(c.experiment == "discrete" ? 1 : c.experiment == "capacity" ? 3 : 2);
  if (c.shape) parse_shape(*c.shape, d);
  if (c.schedule) parse_schedule(*c.schedule, d);
  if (c.drift) parse_drift(*c.drift);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"volume",          "theorem1", "discrete", "drift",
                                                 "rearrange",       "sphere-survival", "coupling", "duality",
                                                 "capacity",        "detect"};
  return names;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  apply(c, j);
  if (c.experiment.empty()) fail("experiment", "missing");
  return c;
}

ExperimentConfig merge_config(const ExperimentConfig& base, const json& overrides) {
  ExperimentConfig c = base;
  apply(c, overrides);
  if (c.experiment.empty()) fail("experiment", "missing");
  return c;
}

Shape parse_shape(const json& j, int dim, const std::string& path) {
  std::string kind;
  const json& v = single_entry(j, path, kind);
  const std::string p = path + "." + kind;
  if (kind == "ball") {
    only_keys(v, p, {"center", "radius"});
    const Point c = v.contains("center") ? point(v.at("center"), dim, p + ".center") : Point(dim);
    return Shape::ball(c, positive(required(v, p, "radius"), p + ".radius"));
  }
  if (kind == "box") {
    only_keys(v, p, {"min", "max", "side"});
    if (v.contains("side")) {
      if (v.contains("min") || v.contains("max")) fail(p, "give either side or min/max");
      const double s = positive(v.at("side"), p + ".side");
      return Shape::box(Point::filled(dim, -0.5 * s), Point::filled(dim, 0.5 * s));
    }
    const Point lo = point(required(v, p, "min"), dim, p + ".min");
    const Point hi = point(required(v, p, "max"), dim, p + ".max");
    for (int i = 0; i < dim; ++i) {
      if (!(lo[i] < hi[i])) fail(p, "min < max required in every coordinate");
    }
    return Shape::box(lo, hi);
  }
  if (kind == "union") {
    if (!v.is_array() || v.empty()) fail(p, "expected a nonempty array of shapes");
    std::vector<Shape> parts;
    for (std::size_t i = 0; i < v.size(); ++i) parts.push_back(parse_shape(v[i], dim, p + "[" + std::to_string(i) + "]"));
    return Shape::union_of(std::move(parts));
  }
  if (kind == "translate") {
    only_keys(v, p, {"inner", "offset"});
    return Shape::translated(parse_shape(required(v, p, "inner"), dim, p + ".inner"),
                             point(required(v, p, "offset"), dim, p + ".offset"));
  }
  if (kind == "dyadic") {
    only_keys(v, p, {"depth", "cubes"});
    const int depth = as_int(required(v, p, "depth"), p + ".depth");
    if (depth < 0 || depth > 30) fail(p + ".depth", "expected 0..30");
    const json& cubes = required(v, p, "cubes");
    if (!cubes.is_array()) fail(p + ".cubes", "expected an array of integer multi-indices");
    std::vector<DyadicIndex> idx;
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      const std::string q = p + ".cubes[" + std::to_string(i) + "]";
      if (!cubes[i].is_array() || static_cast<int>(cubes[i].size()) != dim) fail(q, "expected " + std::to_string(dim) + " integers");
      DyadicIndex k{};
      for (int c = 0; c < dim; ++c) {
        if (!cubes[i][static_cast<std::size_t>(c)].is_number_integer()) fail(q, "expected integers");
        k[static_cast<std::size_t>(c)] = cubes[i][static_cast<std::size_t>(c)].get<std::int64_t>();
      }
      idx.push_back(k);
    }
    try {
      return Shape::dyadic(dim, depth, std::move(idx));
    } catch (const std::invalid_argument& e) {
      fail(p, e.what());
    }
  }
  if (kind == "eroded" || kind == "enlarged") {
    only_keys(v, p, {"inner", "delta"});
    const Shape inner = parse_shape(required(v, p, "inner"), dim, p + ".inner");
    const double delta = number(required(v, p, "delta"), p + ".delta");
    if (delta < 0.0) fail(p + ".delta", "must be >= 0");
    return kind == "eroded" ? erode(inner, delta) : enlarge(inner, delta);
  }
  fail(path, "unknown shape kind '" + kind + "' (ball, box, union, translate, dyadic, eroded, enlarged)");
}

json shape_flag_to_json(const std::string& flag, int dim) {
  const auto colon = flag.find(':');
  if (colon == std::string::npos) fail("shape", "expected ball:<radius> or box:<side>, got '" + flag + "'");
  const std::string kind = flag.substr(0, colon);
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(flag.substr(colon + 1), &used);
    if (used != flag.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    fail("shape", "bad number in '" + flag + "'");
  }
  require_dimension(dim);
  if (kind == "ball") return {{"ball", {{"radius", v}}}};
  if (kind == "box") return {{"box", {{"side", v}}}};
  fail("shape", "expected ball:<radius> or box:<side>, got '" + flag + "'");
}

ShapeSchedule parse_schedule(const json& j, int dim, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty list of {from_index|from_time, shape}");
  std::vector<ShapeSchedule::Piece> pieces;
  std::optional<ShapeSchedule::Key> key;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    only_keys(j[i], p, {"from_index", "from_time", "shape"});
    const bool by_index = j[i].contains("from_index");
    if (by_index == j[i].contains("from_time")) fail(p, "give exactly one of from_index, from_time");
    const auto k = by_index ? ShapeSchedule::Key::Index : ShapeSchedule::Key::Time;
    if (key && *key != k) fail(p, "cannot mix from_index and from_time");
    key = k;
    const double from = by_index ? static_cast<double>(count(j[i].at("from_index"), p + ".from_index"))
                                 : number(j[i].at("from_time"), p + ".from_time");
    pieces.push_back({from, parse_shape(required(j[i], p, "shape"), dim, p + ".shape")});
  }
  try {
    return *key == ShapeSchedule::Key::Index ? ShapeSchedule::by_index(std::move(pieces))
                                             : ShapeSchedule::by_time(std::move(pieces));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

Drift parse_drift(const json& j, const std::string& path) {
  std::string kind;
  const json& v = single_entry(j, path, kind);
  const std::string p = path + "." + kind;
  if (kind == "zero") {
    return Drift::zero(v.is_number_integer() ? v.get<int>() : 2);
  }
  if (kind == "constant") return Drift::constant(point(v, 0, p));
  if (kind == "linear") return Drift::linear(point(v, 0, p));
  if (kind == "jump") {
    only_keys(v, p, {"at", "before", "after"});
    const Point b = point(required(v, p, "before"), 0, p + ".before");
    return Drift::jump(number(required(v, p, "at"), p + ".at"), b, point(required(v, p, "after"), b.dim(), p + ".after"));
  }
  fail(path, "unknown drift kind '" + kind + "' (zero, constant, linear, jump)");
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  const auto it = runners().find(cfg.experiment);
  if (it == runners().end()) fail("experiment", "unknown experiment '" + cfg.experiment + "'");
  const auto t0 = std::chrono::steady_clock::now();
  Summary sum;
  ExperimentOutput out = it->second(cfg, sum);
  out.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  out.invariants_pass = sum.pass;
  std::ostringstream head;
  head << "== " << cfg.experiment << " ==\n"
       << "  seed = " << cfg.seed << "\n"
       << "  workers = " << resolve_workers(cfg.workers) << "\n";
  out.summary = head.str() + sum.os.str() + "  wall_time_ms = " + num(std::round(out.wall_time_ms)) + "\n" +
                "  result: " + (sum.pass ? "all declared invariants hold" : "some declared invariants FAILED") + "\n";
  return out;
}

ExperimentConfig smoke_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.seed = 5;
  c.replicates = 200;
  c.samples = 256;
  if (experiment == "theorem1") c.grid = 4;
  if (experiment == "drift") c.grid = 4;
  if (experiment == "discrete") c.replicates = 2000;
  if (experiment == "rearrange") {
    c.instances = 3;
    c.resolution = 512;
  }
  if (experiment == "sphere-survival") {
    c.instances = 3;
    c.resolution = 512;
    c.replicates = 500;
  }
  if (experiment == "coupling") c.R_list = std::vector<double>{1e2, 1e4};
  if (experiment == "duality") c.instances = 3;
  if (experiment == "capacity") {
    c.t_list = std::vector<double>{1.0, 2.0};
    c.max_step = 0.05;
    c.replicates = 100;
    c.walks = 2000;
  }
  if (experiment == "detect") {
    c.grid = 4;
    c.replicates = 300;
  }
  return c;
}

}  // namespace wsl
