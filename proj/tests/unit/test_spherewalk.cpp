#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wsl/geometry.hpp"
#include "wsl/numerics.hpp"
#include "wsl/rng.hpp"
#include "wsl/spherewalk.hpp"
#include "wsl/stats.hpp"

using namespace wsl;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("cap measure closed forms") {
  for (double R : {1.0, 3.0, 100.0}) {
    const SphereSpec c(R, 1), s(R, 2);
    CHECK(c.total_measure() == Approx(2.0 * kPi * R));
    CHECK(s.total_measure() == Approx(4.0 * kPi * R * R));
    for (double eps : {0.01, 0.5, 1.0}) {
      if (eps >= kPi * R) continue;
      CHECK(cap_measure(c, eps) == Approx(2.0 * eps).epsilon(1e-13));
      const double half = std::sin(0.5 * eps / R);
      CHECK(cap_measure(s, eps) == Approx(4.0 * kPi * R * R * half * half).epsilon(1e-12));
      CHECK(cap_radius_for_measure(s, cap_measure(s, eps)) == Approx(eps).epsilon(1e-9));
    }
    CHECK(cap_measure(s, kPi * R) == Approx(s.total_measure()).epsilon(1e-12));
  }
  // S^3: A_2 R^3 int_0^{e/R} sin^2 = 4 pi R^3 (phi/2 - sin(2 phi)/4).
  const SphereSpec s3(2.0, 3);
  const double phi = 0.7 / 2.0;
  CHECK(cap_measure(s3, 0.7) == Approx(4.0 * kPi * 8.0 * (phi / 2.0 - std::sin(2.0 * phi) / 4.0)).epsilon(1e-12));
}

TEST_CASE("cap measure fault hook scales results") {
  const SphereSpec s(1.0, 2);
  const double m = cap_measure(s, 0.4);
  testing::set_cap_measure_fault(1.1);
  CHECK(cap_measure(s, 0.4) == Approx(1.1 * m));
  testing::set_cap_measure_fault(1.0);
  CHECK(cap_measure(s, 0.4) == m);
}

TEST_CASE("project and lift") {
  const SphereSpec s(5.0, 2);
  RngStream rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    Point x{4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0};
    const Point y = lift(x, s);
    CHECK(y.dim() == 3);
    CHECK(y[2] < 0.0);
    CHECK(y.norm() == Approx(5.0).epsilon(1e-14));
    const Point back = project(y);
    CHECK(back[0] == Approx(x[0]));
    CHECK(back[1] == Approx(x[1]));
  }
  CHECK_THROWS(lift(Point{5.0, 0.0}, s));
  CHECK(lift(Point{0.0, 0.0}, s)[2] == Approx(-5.0));
}

TEST_CASE("geodesic distance") {
  const SphereSpec s(2.0, 2);
  CHECK(geodesic_distance(s, s.south_pole(), s.north_pole()) == Approx(2.0 * kPi));
  CHECK(geodesic_distance(s, s.south_pole(), Point{2.0, 0.0, 0.0}) == Approx(kPi));
  CHECK(geodesic_distance(s, s.south_pole(), s.south_pole()) == 0.0);
}

TEST_CASE("uniform cap sampling: Archimedes height law") {
  // On S^2 the height along the cap axis is uniform on [R cos(eps/R), R].
  const SphereSpec s(3.0, 2);
  const double eps = 1.2;
  RngStream rng(2, 2);
  const Point center = s.normalize(Point{1.0, 2.0, -0.5});
  const CapSpec cap{center, eps};
  std::vector<double> u;
  const double lo = 3.0 * std::cos(eps / 3.0);
  for (int i = 0; i < 20'000; ++i) {
    const Point x = sample_uniform_cap(s, cap, rng);
    CHECK(x.norm() == Approx(3.0).epsilon(1e-12));
    CHECK(geodesic_distance(s, x, center) < eps + 1e-12);
    u.push_back((x.dot(center) / 3.0 - lo) / (3.0 - lo));
  }
  CHECK(ks_statistic(u, [](double v) { return std::clamp(v, 0.0, 1.0); }) < ks_critical(u.size(), 0.001));
}

TEST_CASE("uniform sphere sampling hits caps in proportion") {
  const SphereSpec s(1.0, 2);
  RngStream rng(3, 3);
  const double eps = 0.8;
  const double p = cap_measure(s, eps) / s.total_measure();
  int hits = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    hits += geodesic_distance(s, sample_uniform_sphere(s, rng), s.south_pole()) < eps ? 1 : 0;
  }
  CHECK(std::abs(hits / double(n) - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("sphere walk stays on the sphere with steps below eps") {
  for (int d : {1, 2, 3}) {
    const SphereSpec s(2.0, d);
    RngStream rng(4, static_cast<std::uint64_t>(d));
    const auto w = sphere_walk(s, 0.3, s.south_pole(), 200, rng);
    REQUIRE(w.size() == 201);
    CHECK(w.front() == s.south_pole());
    for (std::size_t k = 1; k < w.size(); ++k) {
      CHECK(w[k].norm() == Approx(2.0).epsilon(1e-12));
      CHECK(geodesic_distance(s, w[k - 1], w[k]) < 0.3 + 1e-12);
    }
  }
}

TEST_CASE("region measures") {
  const SphereSpec s(1.5, 2);
  const Point pole = s.south_pole();
  const auto cap = SphereRegion::cap(s, {pole, 0.9});
  CHECK(cap.measure().exact);
  CHECK(cap.measure().value == Approx(cap_measure(s, 0.9)));
  const auto band = SphereRegion::band(s, pole, 0.5, 1.4);
  CHECK(band.measure().value == Approx(cap_measure(s, 1.4) - cap_measure(s, 0.5)));
  const auto comp = SphereRegion::complement(cap);
  CHECK(comp.measure().value == Approx(s.total_measure() - cap_measure(s, 0.9)));
  CHECK(SphereRegion::empty(s).measure().value == 0.0);
  CHECK(SphereRegion::whole(s).measure().value == Approx(s.total_measure()));

  // Overlapping caps fall back to Monte Carlo; compare with a direct count.
  const auto u = SphereRegion::union_of({cap, SphereRegion::cap(s, {s.normalize(Point{1.0, 0.0, -1.0}), 0.9})});
  VolumeOptions o;
  o.mc_samples = 200'000;
  const auto m = u.measure(o);
  CHECK_FALSE(m.exact);
  CHECK(m.value > cap.measure().value);
  CHECK(m.value < 2.0 * cap.measure().value);
}

TEST_CASE("circle arcs and chart") {
  const SphereSpec s(2.0, 1);
  CHECK(circle_point(0.0, s) == s.south_pole());
  for (double phi : {0.1, 1.0, 3.0, 6.0}) CHECK(circle_angle(circle_point(phi, s), s) == Approx(phi));
  const auto cap = SphereRegion::cap(s, {s.south_pole(), 0.5});
  const auto arcs = cap.arcs();
  double len = 0.0;
  for (const auto& [a, b] : arcs) len += b - a;
  // Chart angle phi has arc length R phi.
  CHECK(2.0 * len == Approx(1.0));
}

TEST_CASE("rearrange keeps measure") {
  const SphereSpec s(1.0, 2);
  const auto band = SphereRegion::band(s, s.north_pole(), 0.2, 0.9);
  const CapSpec c = rearrange(band, s.south_pole());
  CHECK(cap_measure(s, c.radius) == Approx(band.measure().value).epsilon(1e-9));
  CHECK(c.center == s.south_pole());
  const CapSpec already{s.south_pole(), 0.4};
  CHECK(rearrange(SphereRegion::cap(s, already), s.south_pole()).radius == 0.4);
}

TEST_CASE("circle survival: quadrature versus Monte Carlo") {
  const SphereSpec s(1.0, 1);
  std::vector<SphereRegion> obstacles = {
      SphereRegion::cap(s, {circle_point(1.0, s), 0.4}),
      SphereRegion::empty(s),
      SphereRegion::cap(s, {circle_point(4.0, s), 0.8}),
  };
  const double q = circle_survival_quadrature(s, obstacles, 0.5, 4096);
  const auto mc = survival_probability(s, obstacles, 0.5, 100'000, 9, 1);
  CHECK(std::abs(q - mc.value) <= 4.0 * mc.std_error + 2e-3);
  // No obstacles: survival 1; one full-circle obstacle: 0.
  CHECK(circle_survival_quadrature(s, {SphereRegion::empty(s)}, 0.5, 512) == Approx(1.0));
  CHECK(circle_survival_quadrature(s, {SphereRegion::whole(s)}, 0.5, 512) == Approx(0.0));
}

TEST_CASE("kernels") {
  CHECK(DistanceKernel::one()(5.0) == 1.0);
  CHECK(DistanceKernel::indicator(0.3)(0.2) == 1.0);
  CHECK(DistanceKernel::indicator(0.3)(0.4) == 0.0);
  CHECK(DistanceKernel::exponential(2.0)(1.0) == Approx(std::exp(-0.5)));
  CHECK(DistanceKernel::parse("indicator:0.3").kind == DistanceKernel::Kind::Indicator);
  CHECK(DistanceKernel::parse("power:2").param == 2.0);
  CHECK_THROWS(DistanceKernel::parse("gauss:1"));
}

TEST_CASE("rearrangement quadrature on grid-aligned arcs") {
  const SphereSpec s(1.0, 1);
  const std::size_t M = 1024;
  const double h = 2.0 * kPi / M;
  std::vector<SphereRegion> sets = {
      SphereRegion::cap(s, {circle_point(160 * h, s), 64 * h}),
      SphereRegion::cap(s, {circle_point(400 * h, s), 112 * h}),
  };
  const auto q = rearrangement_quadrature(s, sets, {}, s.south_pole(), M);
  CHECK(q.lhs == Approx(128 * h * 224 * h).epsilon(1e-12));
  CHECK(q.rhs == Approx(q.lhs).epsilon(1e-12));

  // Rearranged arcs [-a, a] and [-b, b] with kernel 1(|x - y| < e).
  const double a = 64 * h, b = 112 * h, e = 40 * h;
  const double oracle = integrate(
      [&](double x) { return std::max(0.0, std::min(b, x + e) - std::max(-b, x - e)); }, -a, a, 1e-12);
  const auto r = rearrangement_quadrature(s, sets, {{0, 1, DistanceKernel::indicator(e)}}, s.south_pole(), M);
  CHECK(r.rhs == Approx(oracle).epsilon(2e-2));
  // The original arcs are 64h apart, farther than e, so lhs vanishes.
  CHECK(r.lhs == Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(r.margin >= 0.0);
}

TEST_CASE("lifted ball measure closed forms") {
  // Cap area above the plane disc: 2 pi R (R - sqrt(R^2 - r^2)); arc: 2 R asin(r / R).
  const SphereSpec s2(4.0, 2), s1(4.0, 1);
  for (double r : {0.5, 2.0, 3.5}) {
    CHECK(lifted_ball_measure(s2, r) == Approx(2.0 * kPi * 4.0 * (4.0 - std::sqrt(16.0 - r * r))).epsilon(1e-10));
    CHECK(lifted_ball_measure(s1, r) == Approx(8.0 * std::asin(r / 4.0)).epsilon(1e-10));
    CHECK(lifted_ball_measure_gap(s2, r) == Approx(lifted_ball_measure(s2, r) - kPi * r * r).epsilon(1e-8));
    CHECK(lifted_ball_measure_gap(s2, r) > 0.0);
  }
  const auto lifted = SphereRegion::lifted(s2, Shape::ball(Point{0.0, 0.0}, 2.0));
  CHECK(lifted.measure().exact);
  CHECK(lifted.measure().value == Approx(lifted_ball_measure(s2, 2.0)).epsilon(1e-10));
}

TEST_CASE("projected caps are sandwiched between planar balls") {
  const SphereSpec s(50.0, 2);
  RngStream rng(6, 6);
  const auto r = lemma41_check(s, 3.0, 0.5, 0.05, rng, 20, 2000);
  CHECK(r.inclusion_holds);
  CHECK(r.inner_violations == 0);
  CHECK(r.outer_violations == 0);
  CHECK(r.points_tested > 0);
}
