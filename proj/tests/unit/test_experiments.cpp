#include <doctest.h>

#include <json.hpp>
#include <string>

#include "wsl/experiments.hpp"

using namespace wsl;
using nlohmann::json;

namespace {

// Message of the ConfigError thrown by f, or "" if none.
template <class F>
std::string config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(json{{"experiment", "volume"}, {"seed", 9}, {"replicates", 200}, {"dim", 3}});
  CHECK(c.experiment == "volume");
  CHECK(c.seed == 9);
  CHECK(*c.replicates == 200);
  CHECK(*c.dim == 3);
  CHECK_FALSE(c.steps.has_value());
}

TEST_CASE("config errors name the offending key") {
  CHECK(starts_with(config_error([] { parse_config(json{{"experiment", "volume"}, {"colour", 1}}); }), "colour:"));
  CHECK(starts_with(config_error([] { parse_config(json{{"experiment", "nope"}}); }), "experiment:"));
  CHECK(starts_with(config_error([] { parse_config(json{{"experiment", "volume"}, {"seed", -1}}); }), "seed:"));
  CHECK(starts_with(config_error([] { parse_config(json{{"experiment", "volume"}, {"dim", 0}}); }), "dim:"));
  CHECK(starts_with(config_error([] { parse_config(json{{"experiment", "volume"}, {"method", "magic"}}); }), "method:"));
  CHECK(starts_with(config_error([] { parse_config(json::array()); }), "<root>:"));
  CHECK(starts_with(config_error([] { parse_shape(json{{"ball", {{"radius", -1.0}}}}, 2); }), "shape.ball.radius:"));
  CHECK(starts_with(config_error([] { parse_shape(json{{"ball", {{"radius", 1.0}, {"colour", 2}}}}, 2); }),
                    "shape.ball.colour:"));
  CHECK(starts_with(config_error([] { parse_shape(json{{"box", {{"min", {0, 0}}, {"max", {1, 0}}}}}, 2); }),
                    "shape.box:"));
  CHECK(starts_with(config_error([] { parse_shape(json{{"union", {json{{"ball", {{"radius", 1.0}}}}, json{{"cone", 1}}}}}, 2); }),
                    "shape.union[1]"));
  CHECK(starts_with(config_error([] { parse_drift(json{{"spiral", 1}}); }), "drift:"));
  CHECK(starts_with(config_error([] { shape_flag_to_json("cone:1", 2); }), "shape:"));
  const json mixed = json::array({json{{"from_index", 0}, {"shape", {{"ball", {{"radius", 1.0}}}}}},
                                  json{{"from_time", 0.5}, {"shape", {{"ball", {{"radius", 1.0}}}}}}});
  CHECK(starts_with(config_error([&] { parse_schedule(mixed, 2); }), "schedule[1]"));
}

TEST_CASE("flags override file values") {
  const auto base = parse_config(json{{"experiment", "volume"}, {"seed", 1}, {"steps", 4}});
  const auto merged = merge_config(base, json{{"seed", 2}, {"workers", 3}});
  CHECK(merged.seed == 2);
  CHECK(*merged.steps == 4);
  CHECK(merged.workers == 3);
  CHECK(merged.experiment == "volume");
  CHECK(starts_with(config_error([&] { merge_config(base, json{{"bogus", 1}}); }), "bogus:"));
}

TEST_CASE("shape parsing") {
  const Shape b = parse_shape(json{{"ball", {{"center", {1.0, 2.0}}, {"radius", 0.5}}}}, 2);
  CHECK(b.kind() == ShapeKind::Ball);
  CHECK(b.center() == Point{1.0, 2.0});
  const Shape s = parse_shape(json{{"box", {{"side", 2.0}}}}, 3);
  CHECK(s.lo() == Point{-1.0, -1.0, -1.0});
  const Shape t = parse_shape(json{{"translate", {{"inner", {{"dyadic", {{"depth", 1}, {"cubes", {{0, 0}}}}}}}, {"offset", {3.0, 0.0}}}}}, 2);
  CHECK(t.contains(Point{3.25, 0.25}));
  CHECK_FALSE(t.contains(Point{0.25, 0.25}));
  const Shape e = parse_shape(json{{"eroded", {{"inner", {{"box", {{"side", 2.0}}}}}, {"delta", 0.5}}}}, 2);
  CHECK(e.contains(Point{0.4, 0.4}));
  CHECK_FALSE(e.contains(Point{0.6, 0.0}));
  const Shape fb = parse_shape(shape_flag_to_json("ball:1.5", 2), 2);
  CHECK(fb.radius() == 1.5);
  CHECK(fb.center() == Point{0.0, 0.0});
  CHECK(parse_shape(shape_flag_to_json("box:2", 1), 1).hi() == Point{1.0});
}

TEST_CASE("schedules and drifts") {
  const json j = json::array({json{{"from_time", 0.0}, {"shape", {{"ball", {{"radius", 1.0}}}}}},
                              json{{"from_time", 0.5}, {"shape", {{"ball", {{"radius", 2.0}}}}}}});
  const auto s = parse_schedule(j, 2);
  CHECK(s.key() == ShapeSchedule::Key::Time);
  CHECK(s.pieces().size() == 2);
  CHECK(parse_drift(json{{"zero", true}}).is_zero());
  CHECK(parse_drift(json{{"linear", {1.0, 0.0}}})(2.0) == Point{2.0, 0.0});
  const Drift jd = parse_drift(json{{"jump", {{"at", 0.5}, {"before", {0.0}}, {"after", {1.0}}}}});
  CHECK(jd(0.4) == Point{0.0});
  CHECK(jd(0.5) == Point{1.0});
}

TEST_CASE("every experiment produces a versioned CSV, identical across worker counts") {
  for (const auto& name : experiment_names()) {
    CAPTURE(name);
    auto cfg = smoke_config(name);
    cfg.workers = 1;
    const auto one = run_experiment(cfg);
    cfg.workers = 3;
    const auto three = run_experiment(cfg);
    CHECK(one.csv == three.csv);
    CHECK(starts_with(one.csv, "schema_version,experiment,seed,"));
    const auto second = one.csv.find('\n') + 1;
    CHECK(starts_with(one.csv.substr(second), std::to_string(kCsvSchemaVersion) + "," + name + ","));
    CHECK(one.csv.find("wall_time") == std::string::npos);
    CHECK(one.summary.find("wall_time_ms") != std::string::npos);
  }
}

TEST_CASE("smoke configurations of exact and coarse experiments keep their invariants") {
  for (const char* name : {"volume", "discrete", "rearrange", "sphere-survival", "coupling", "duality"}) {
    CAPTURE(name);
    auto cfg = smoke_config(name);
    cfg.workers = 1;
    CHECK(run_experiment(cfg).invariants_pass);
  }
}

TEST_CASE("seed changes the output") {
  auto cfg = smoke_config("volume");
  cfg.workers = 1;
  const auto a = run_experiment(cfg);
  cfg.seed += 1;
  CHECK(run_experiment(cfg).csv != a.csv);
}

TEST_CASE("selftest passes and the cap-measure fault is caught") {
  const auto ok = selftest(1, 1);
  CHECK_FALSE(ok.empty());
  for (const auto& c : ok) {
    CAPTURE(c.name);
    CHECK(c.pass);
  }
  const auto bad = selftest(1, 1, 1.1);
  bool caught = false;
  for (const auto& c : bad) caught = caught || (!c.pass && c.suite == "sphere");
  CHECK(caught);
  // The fault is scoped to the run.
  for (const auto& c : selftest(1, 1)) CHECK(c.pass);
}
