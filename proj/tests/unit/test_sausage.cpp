#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wsl/geometry.hpp"
#include "wsl/rng.hpp"
#include "wsl/sausage.hpp"
#include "wsl/stochastic.hpp"

using namespace wsl;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Path two_point_path(const Point& a, const Point& b) {
  Path p;
  p.times = {0.0, 1.0};
  p.positions = {a, b};
  return p;
}

// Union area of two discs of radius r at distance c < 2r.
double two_disc_union(double r, double c) {
  const double lens = 2.0 * r * r * std::acos(c / (2.0 * r)) - 0.5 * c * std::sqrt(4.0 * r * r - c * c);
  return 2.0 * kPi * r * r - lens;
}

ShapeSchedule discrete_schedule() {
  return ShapeSchedule::by_index({{0.0, Shape::box(Point{0.0}, Point{1.0})}, {1.0, Shape::box(Point{0.0}, Point{3.0})}});
}

}  // namespace

TEST_CASE("schedule validation and lookup") {
  const auto s = discrete_schedule();
  CHECK(s.key() == ShapeSchedule::Key::Index);
  CHECK(s.at(0, 0.0).bounds().hi[0] == 1.0);
  CHECK(s.at(1, 0.0).bounds().hi[0] == 3.0);
  CHECK(s.at(7, 0.0).bounds().hi[0] == 3.0);
  const auto t = ShapeSchedule::by_time({{0.0, Shape::ball(Point{0.0, 0.0}, 1.0)}, {0.5, Shape::ball(Point{0.0, 0.0}, 2.0)}});
  CHECK(t.piece_index(0.49) == 0);
  CHECK(t.piece_index(0.5) == 1);
  CHECK(t.at(0, 0.7).radius() == 2.0);
  CHECK_THROWS(ShapeSchedule::by_index({{1.0, Shape::ball(Point{0.0}, 1.0)}}));
  CHECK_THROWS(ShapeSchedule::by_index({{0.0, Shape::ball(Point{0.0}, 1.0)}, {0.0, Shape::ball(Point{0.0}, 2.0)}}));
  CHECK_THROWS(ShapeSchedule::by_index({{0.0, Shape::ball(Point{0.0}, 1.0)}, {1.0, Shape::ball(Point{0.0, 0.0}, 2.0)}}));
  const auto eq = s.equivalent_balls();
  CHECK(eq.pieces()[1].shape.radius() == Approx(1.5));
  CHECK(eq.pieces()[1].shape.center() == Point{0.0});
}

TEST_CASE("method names") {
  for (auto m : {SausageMethod::Interval, SausageMethod::Hitting, SausageMethod::Coverage, SausageMethod::Voxel}) {
    CHECK(parse_sausage_method(to_string(m)) == m);
  }
  CHECK_THROWS(parse_sausage_method("grid"));
}

TEST_CASE("one-step interval sausage: 3 + max(z, 0)") {
  SausageOptions opts;
  opts.method = SausageMethod::Interval;
  RngStream rng(1, 1);
  for (double z : {-0.9, -0.3, 0.0, 0.25, 0.8}) {
    const auto spec = SausageSpec::make(two_point_path(Point{0.0}, Point{z}), discrete_schedule());
    CHECK(sausage_volume(spec, opts, rng).value == Approx(3.0 + std::max(z, 0.0)).epsilon(1e-14));
    const auto balls = SausageSpec::make(two_point_path(Point{0.0}, Point{z}), discrete_schedule().equivalent_balls());
    CHECK(sausage_volume(balls, opts, rng).value == Approx(3.0).epsilon(1e-14));
  }
}

TEST_CASE("expected discrete sausage volumes 3.25 and 3") {
  ReplicateSettings rep;
  rep.replicates = 20'000;
  rep.seed = 5;
  SausageOptions opts;
  opts.method = SausageMethod::Interval;
  const auto cmp = compare_isoperimetric([](RngStream& r) { return ball_walk(1, 1.0, Point(1), 1, r); },
                                         discrete_schedule(), rep, opts);
  CHECK(std::abs(cmp.first.value - 3.25) <= 4.0 * cmp.first.std_error);
  CHECK(cmp.second.value == Approx(3.0).epsilon(1e-12));
  CHECK(cmp.test.nonnegative());
  CHECK(cmp.diffs.size() == rep.replicates);
  for (double d : cmp.diffs) CHECK(d >= -1e-12);
}

TEST_CASE("estimators agree on two overlapping discs") {
  const double r = 1.0, c = 1.2;
  const auto spec = SausageSpec::make(two_point_path(Point{0.0, 0.0}, Point{c, 0.0}), Shape::ball(Point{0.0, 0.0}, r));
  const double oracle = two_disc_union(r, c);
  RngStream rng(2, 2);
  SausageOptions opts;
  opts.samples = 200'000;
  for (auto m : {SausageMethod::Hitting, SausageMethod::Coverage}) {
    opts.method = m;
    const auto e = sausage_volume(spec, opts, rng);
    CHECK(e.method == m);
    CHECK(std::abs(e.value - oracle) <= 4.0 * e.std_error);
  }
  opts.method = SausageMethod::Voxel;
  opts.max_voxel_cells = 1'000'000;
  const auto v = sausage_volume(spec, opts, rng);
  CHECK(v.discretization_bound > 0.0);
  CHECK(std::abs(v.value - oracle) <= v.discretization_bound);
  opts.method = SausageMethod::Interval;
  CHECK_THROWS(sausage_volume(spec, opts, rng));
}

TEST_CASE("coverage estimator is exact when pieces are disjoint") {
  const auto spec = SausageSpec::make(two_point_path(Point{0.0, 0.0}, Point{5.0, 0.0}), Shape::ball(Point{0.0, 0.0}, 1.0));
  SausageOptions opts;
  opts.method = SausageMethod::Coverage;
  opts.samples = 1000;
  RngStream rng(3, 3);
  CHECK(sausage_volume(spec, opts, rng).value == Approx(2.0 * kPi).epsilon(1e-12));
}

TEST_CASE("index membership and coverage counts") {
  const auto spec = SausageSpec::make(two_point_path(Point{0.0, 0.0}, Point{1.0, 0.0}), Shape::ball(Point{0.0, 0.0}, 1.0));
  const SausageIndex idx(spec);
  CHECK(idx.coverage(Point{0.5, 0.0}) == 2);
  CHECK(idx.coverage(Point{-0.5, 0.0}) == 1);
  CHECK(idx.coverage(Point{3.0, 0.0}) == 0);
  CHECK(idx.contains(Point{1.9, 0.0}));
  CHECK_FALSE(idx.contains(Point{2.0, 0.0}));
  const auto bb = idx.bounding_ball();
  CHECK(distance(bb.center, Point{0.5, 0.0}) < 1e-12);
  CHECK(bb.radius >= 1.5);
}

TEST_CASE("translation invariance and prefix monotonicity") {
  RngStream rng(4, 4);
  SausageOptions opts;
  opts.method = SausageMethod::Interval;
  const Shape D = Shape::union_of({Shape::box(Point{0.0}, Point{0.3}), Shape::box(Point{0.6}, Point{1.0})});
  for (int trial = 0; trial < 50; ++trial) {
    Path p = ball_walk(1, 0.4, Point(1), 20, rng);
    const double v = sausage_volume(SausageSpec::make(p, D), opts, rng).value;
    Path shifted = p;
    for (auto& x : shifted.positions) x += Point{7.25};
    CHECK(sausage_volume(SausageSpec::make(shifted, D), opts, rng).value == Approx(v).epsilon(1e-12));
    Path prefix = p;
    prefix.positions.resize(10);
    prefix.times.resize(10);
    CHECK(sausage_volume(SausageSpec::make(prefix, D), opts, rng).value <= v + 1e-12);
  }
}

TEST_CASE("paired volumes share sample points") {
  const auto a = SausageSpec::make(two_point_path(Point{0.0, 0.0}, Point{0.5, 0.0}), Shape::ball(Point{0.0, 0.0}, 1.0));
  RngStream rng(5, 5);
  SausageOptions opts;
  opts.samples = 4096;
  const auto [x, y] = sausage_volume_pair(a, a, opts, rng);
  CHECK(x.value == y.value);
}

TEST_CASE("expected volume does not depend on worker count") {
  ReplicateSettings rep;
  rep.replicates = 200;
  rep.seed = 6;
  SausageOptions opts;
  opts.samples = 512;
  const auto gen = [](RngStream& r) { return ball_walk(2, 0.5, Point(2), 5, r); };
  const auto sched = ShapeSchedule::constant(Shape::box(Point{-0.5, -0.5}, Point{0.5, 0.5}));
  rep.workers = 1;
  const auto one = expected_sausage_volume(gen, sched, rep, opts);
  rep.workers = 3;
  const auto three = expected_sausage_volume(gen, sched, rep, opts);
  CHECK(one.value == three.value);
  CHECK(one.std_error == three.std_error);
  rep.replicates = 10;
  CHECK_THROWS_AS(expected_sausage_volume(gen, sched, rep, opts), InsufficientReplicates);
}

TEST_CASE("discretized ball schedule erodes twice by delta") {
  const DyadicGrid g(1.0, 6);
  RngStream rng(7, 7);
  const Path p = brownian_grid(2, g, rng);
  const auto ds = discretize_brownian_sausage(p, g, ShapeSchedule::constant(Shape::ball(Point{0.0, 0.0}, 1.0)));
  CHECK(ds.delta == Approx(std::cbrt(1.0 / 64.0)));
  REQUIRE(ds.r_star.size() == g.points());
  for (double r : ds.r_star) CHECK(r == Approx(1.0 - 2.0 * ds.delta).epsilon(1e-12));
  for (const auto& z : ds.Z) CHECK(volume(z).value == Approx(kPi * std::pow(1.0 - ds.delta, 2)).epsilon(1e-9));

  // A step larger than (2^{1/3} - 1) delta breaks the modulus event.
  Path jumpy = p;
  jumpy.positions[1] = jumpy.positions[0] + Point{1.0, 0.0};
  CHECK_FALSE(discretize_brownian_sausage(jumpy, g, ShapeSchedule::constant(Shape::ball(Point{0.0, 0.0}, 1.0))).omega);
  Path still = p;
  for (auto& x : still.positions) x = Point(2);
  CHECK(discretize_brownian_sausage(still, g, ShapeSchedule::constant(Shape::ball(Point{0.0, 0.0}, 1.0))).omega);
}

TEST_CASE("discretized time schedule picks up every piece active in a grid cell") {
  const DyadicGrid g(1.0, 2);  // cells of width 1/4
  const auto sched = ShapeSchedule::by_time({{0.0, Shape::ball(Point{0.0}, 2.0)}, {0.3, Shape::ball(Point{0.0}, 3.0)}});
  Path p;
  for (std::size_t k = 0; k < g.points(); ++k) {
    p.times.push_back(g.time(k));
    p.positions.push_back(Point(1));
  }
  const auto ds = discretize_brownian_sausage(p, g, sched);
  // Cell [0.25, 0.5) contains the switch at 0.3, so it sees the larger radius.
  CHECK(ds.r_star[0] == Approx(2.0 - 2.0 * ds.delta));
  CHECK(ds.r_star[1] == Approx(3.0 - 2.0 * ds.delta));
  CHECK(ds.r_star[2] == Approx(3.0 - 2.0 * ds.delta));
}

TEST_CASE("sampling inside shapes") {
  RngStream rng(8, 8);
  const Shape u = Shape::union_of({Shape::ball(Point{0.0, 0.0}, 1.0), Shape::box(Point{2.0, 2.0}, Point{3.0, 2.5})});
  for (int i = 0; i < 2000; ++i) CHECK(u.contains(sample_in_shape(u, rng)));
}

TEST_CASE("survival duality on a small instance") {
  const auto obstacles = ShapeSchedule::by_index(
      {{0.0, Shape::ball(Point{0.3, 0.0}, 0.4)}, {1.0, Shape::box(Point{-0.5, -0.2}, Point{0.2, 0.4})}});
  ReplicateSettings rep;
  rep.replicates = 20'000;
  rep.seed = 9;
  SausageOptions opts;
  opts.samples = 256;
  const auto r = survival_duality_check(obstacles, 2, 1.0, 1.5, 0.3, rep, opts);
  CHECK(r.lhs > 0.0);
  CHECK(r.lhs < 1.0);
  CHECK(std::abs(r.gap) <= 4.0 * r.combined_se);
  CHECK_THROWS(survival_duality_check(obstacles, 2, 1.0, 0.5, 0.3, rep, opts));
  CHECK_THROWS(survival_duality_check(obstacles, 2, 0.2, 1.5, 0.3, rep, opts));
}
