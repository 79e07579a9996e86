#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wsl/geometry.hpp"
#include "wsl/numerics.hpp"
#include "wsl/rng.hpp"
#include "wsl/stochastic.hpp"

using namespace wsl;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Area of the union of two unit discs at distance 1 by direct 1-d
// integration of the union's vertical extent.
double lens_union_oracle() {
  auto chord = [](double x) {
    const double a = x * x < 1.0 ? std::sqrt(1.0 - x * x) : 0.0;
    const double y = x - 1.0;
    const double b = y * y < 1.0 ? std::sqrt(1.0 - y * y) : 0.0;
    return 2.0 * std::max(a, b);
  };
  return integrate(chord, -1.0, 0.5, 1e-14) + integrate(chord, 0.5, 2.0, 1e-14);
}

Point random_point(int d, double scale, RngStream& rng) {
  Point p(d);
  for (int i = 0; i < d; ++i) p[i] = scale * (2.0 * rng.uniform() - 1.0);
  return p;
}

}  // namespace

TEST_CASE("unit ball volume") {
  CHECK(unit_ball_volume(1) == Approx(2.0));
  CHECK(unit_ball_volume(2) == Approx(kPi));
  CHECK(unit_ball_volume(3) == Approx(4.0 * kPi / 3.0));
  CHECK_THROWS_AS(unit_ball_volume(0), DimensionError);
  CHECK_THROWS_AS(unit_ball_volume(-2), DimensionError);
}

TEST_CASE("exact volumes") {
  const VolumeValue disc = volume(Shape::ball(Point{0.0, 0.0}, 1.0));
  CHECK(disc.exact);
  CHECK(disc.std_error == 0.0);
  CHECK(disc.value == Approx(kPi).epsilon(1e-14));
  CHECK(volume(Shape::box(Point{0.0, 0.0, 0.0}, Point{1.0, 1.0, 1.0})).value == Approx(1.0));

  const double oracle = lens_union_oracle();
  CHECK(oracle == Approx(5.0548).epsilon(1e-4));
  CHECK(oracle == Approx(2.0 * kPi - (2.0 * kPi / 3.0 - std::sqrt(3.0) / 2.0)).epsilon(1e-12));
  const Shape u = Shape::union_of({Shape::ball(Point{0.0, 0.0}, 1.0), Shape::ball(Point{1.0, 0.0}, 1.0)});
  const VolumeValue v = volume(u);
  CHECK(v.exact);
  CHECK(v.value == Approx(oracle).epsilon(1e-12));
}

TEST_CASE("union volume: Monte Carlo agrees with inclusion-exclusion") {
  RngStream rng(2024, 0);
  for (int inst = 0; inst < 10; ++inst) {
    const int d = 2 + (inst / 2) % 2;
    // Even instances: three boxes; odd: two balls. Both have closed-form intersections.
    std::vector<Shape> parts;
    const bool balls = inst % 2 == 1;
    for (int k = 0; k < (balls ? 2 : 3); ++k) {
      const Point c = random_point(d, 1.0, rng);
      if (balls) {
        parts.push_back(Shape::ball(c, 0.3 + rng.uniform()));
      } else {
        Point hi = c;
        for (int i = 0; i < d; ++i) hi[i] += 0.2 + rng.uniform();
        parts.push_back(Shape::box(c, hi));
      }
    }
    const Shape u = Shape::union_of(parts);
    const VolumeValue exact = volume(u);
    REQUIRE(exact.exact);
    VolumeOptions mc;
    mc.max_inclusion_exclusion = 0;
    mc.mc_samples = 200'000;
    mc.seed = 100 + static_cast<std::uint64_t>(inst);
    const VolumeValue est = volume(u, mc);
    CHECK_FALSE(est.exact);
    CHECK(std::abs(est.value - exact.value) <= 4.0 * est.std_error);
  }
}

TEST_CASE("equivalent radius") {
  CHECK(equivalent_radius(Shape::ball(Point{0.0, 0.0}, 1.0)) == 1.0);
  CHECK(equivalent_radius(Shape::box(Point{0.0}, Point{3.0})) == Approx(1.5));
  const double r = equivalent_radius(Shape::box(Point{0.0, 0.0}, Point{1.0, 1.0}));
  CHECK(r == Approx(1.0 / std::sqrt(kPi)).epsilon(1e-14));
  CHECK(kPi * r * r == Approx(1.0).epsilon(1e-12));
  CHECK(equivalent_radius(Shape::empty(2)) == 0.0);

  RngStream rng(3, 3);
  for (int i = 0; i < 20; ++i) {
    const int d = 1 + i % 4;
    const Point lo = random_point(d, 2.0, rng);
    Point hi = lo;
    for (int j = 0; j < d; ++j) hi[j] += 0.1 + rng.uniform();
    const Shape b = Shape::box(lo, hi);
    const double v = volume(b).value;
    const double back = volume(Shape::ball(Point(d), equivalent_radius(b))).value;
    CHECK(std::abs(back - v) <= 1e-12 * std::max(1.0, v));
  }
}

TEST_CASE("erosion and enlargement closed forms") {
  const Shape e = erode(Shape::ball(Point{0.0, 0.0}, 2.0), 0.5);
  REQUIRE(e.kind() == ShapeKind::Ball);
  CHECK(e.radius() == Approx(1.5));
  const Shape b = erode(Shape::box(Point{0.0, 0.0}, Point{1.0, 1.0}), 0.1);
  REQUIRE(b.kind() == ShapeKind::Box);
  CHECK(b.lo()[0] == Approx(0.1));
  CHECK(b.hi()[1] == Approx(0.9));
  CHECK(erode(Shape::ball(Point{0.0, 0.0}, 1.0), 1.0).is_empty());
  CHECK(enlarge(Shape::ball(Point{0.0, 0.0}, 1.0), 0.5).radius() == Approx(1.5));
  const Shape p = enlarge(Shape::ball(Point{1.0, 2.0}, 0.0), 1.0);
  CHECK(p.radius() == Approx(1.0));
  CHECK(p.center() == Point{1.0, 2.0});
  const Shape iv = enlarge(Shape::box(Point{0.0}, Point{1.0}), 0.25);
  const auto ivs = intervals_1d(iv);
  REQUIRE(ivs.size() == 1);
  CHECK(ivs[0].first == Approx(-0.25));
  CHECK(ivs[0].second == Approx(1.25));
}

TEST_CASE("erosion properties on sampled points") {
  RngStream rng(4, 4);
  const Shape u = Shape::union_of({Shape::ball(Point{0.0, 0.0}, 1.0), Shape::box(Point{0.5, -0.4}, Point{2.0, 0.6})});
  const Shape e1 = erode(u, 0.1), e2 = erode(u, 0.3);
  const Shape round_trip = erode(enlarge(u, 0.2), 0.2);
  for (int i = 0; i < 4000; ++i) {
    const Point z = random_point(2, 2.5, rng);
    if (e2.contains(z)) CHECK(e1.contains(z));
    if (u.contains(z)) CHECK(round_trip.contains(z));
  }
}

TEST_CASE("union depth is the distance to the complement") {
  // Two overlapping discs: at the midpoint of the centers the nearest
  // boundary point is a lens corner.
  const Shape u = Shape::union_of({Shape::ball(Point{0.0, 0.0}, 1.0), Shape::ball(Point{1.0, 0.0}, 1.0)});
  CHECK(u.depth(Point{0.5, 0.0}) == Approx(std::sqrt(3.0) / 2.0).epsilon(1e-8));
  CHECK(u.depth(Point{-0.5, 0.0}) == Approx(0.5).epsilon(1e-8));
  CHECK(u.depth(Point{3.0, 0.0}) == 0.0);
}

TEST_CASE("dyadic decomposition") {
  const Shape sq = Shape::box(Point{0.0, 0.0}, Point{1.0, 1.0});
  CHECK(volume(dyadic_decompose(sq, 3)).value == Approx(1.0));
  const Shape disc = Shape::ball(Point{0.0, 0.0}, 1.0);
  CHECK(dyadic_decompose(disc, 0).is_empty());

  // Cube count by brute force: cell [i, i+1) x [j, j+1) scaled by 2^-k lies
  // in the open disc iff its farthest corner does.
  double prev = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const double h = std::ldexp(1.0, -k);
    long cells = 0;
    const long m = 1L << k;
    for (long i = -m; i < m; ++i) {
      for (long j = -m; j < m; ++j) {
        const double x = std::max(std::abs(i * h), std::abs((i + 1) * h));
        const double y = std::max(std::abs(j * h), std::abs((j + 1) * h));
        cells += x * x + y * y < 1.0 ? 1 : 0;
      }
    }
    const Shape dy = dyadic_decompose(disc, k);
    const double v = volume(dy).value;
    CHECK(v == Approx(static_cast<double>(cells) * h * h));
    CHECK(v >= prev);
    CHECK(v < kPi);
    prev = v;
    RngStream rng(5, static_cast<std::uint64_t>(k));
    for (int s = 0; s < 2000; ++s) {
      const Point z = random_point(2, 1.0, rng);
      if (dy.contains(z)) CHECK(disc.contains(z));
    }
  }
}

TEST_CASE("shape invariants are enforced") {
  CHECK_THROWS(Shape::box(Point{0.0, 1.0}, Point{1.0, 1.0}));
  CHECK_THROWS(Shape::ball(Point{0.0}, -1.0));
  CHECK_THROWS(Shape::union_of({Shape::ball(Point{0.0}, 1.0), Shape::ball(Point{0.0, 0.0}, 1.0)}));
  CHECK_THROWS(Shape::dyadic(2, 1, {DyadicIndex{0, 0}, DyadicIndex{0, 0}}));
}

TEST_CASE("reflection maps s to -s") {
  RngStream rng(6, 6);
  const Shape s = Shape::union_of({Shape::box(Point{0.1, 0.2}, Point{0.9, 0.5}), Shape::ball(Point{-0.3, 0.4}, 0.2),
                                   Shape::dyadic(2, 2, {DyadicIndex{1, -2}, DyadicIndex{0, 1}})});
  const Shape r = s.reflected();
  for (int i = 0; i < 4000; ++i) {
    const Point z = random_point(2, 1.0, rng);
    CHECK(s.contains(z) == r.contains(-z));
  }
}
