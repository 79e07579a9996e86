#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wsl/coupling.hpp"
#include "wsl/numerics.hpp"
#include "wsl/rng.hpp"
#include "wsl/spherewalk.hpp"
#include "wsl/stats.hpp"
#include "wsl/stochastic.hpp"

using namespace wsl;
using doctest::Approx;

TEST_CASE("coupling parameter checks") {
  const SphereSpec s(5.0, 2);
  CouplingParams p{0.5, 2.0, 5, 0.1};
  CHECK_NOTHROW(validate_coupling(p, s));
  CHECK(start_cap_radius(p, s) == Approx(5.0 * std::asin(1.5 / 5.0)));
  CHECK_THROWS_AS(validate_coupling({0.5, 2.0, 50, 0.1}, s), std::invalid_argument);  // start radius 10.5 > R
  CHECK_THROWS_AS(validate_coupling({0.5, 0.1, 5, 0.1}, s), std::invalid_argument);   // c too small
  CHECK_THROWS_AS(validate_coupling({0.5, 2.0, 5, 0.0}, s), std::invalid_argument);
}

TEST_CASE("projected cap density integrates to one") {
  // d = 1: the projected arc is [R sin(phi0 - eps/R), R sin(phi0 + eps/R)].
  const SphereSpec s(3.0, 1);
  const Point center = lift(Point{0.7}, s);
  const double eps = 0.4, phi0 = std::asin(0.7 / 3.0);
  const double lo = 3.0 * std::sin(phi0 - eps / 3.0), hi = 3.0 * std::sin(phi0 + eps / 3.0);
  const double m = integrate([&](double x) { return projected_cap_density(s, center, eps, Point{x}); }, lo, hi, 1e-10);
  CHECK(m == Approx(1.0).epsilon(1e-6));
  CHECK(projected_cap_density(s, center, eps, Point{lo - 1e-6}) == 0.0);

  // d = 2: Monte Carlo over a disc containing the support.
  const SphereSpec s2(4.0, 2);
  const Point c2 = lift(Point{0.5, -0.3}, s2);
  const Point x0 = project(c2);
  RngStream rng(7, 7);
  RunningStats f;
  for (int i = 0; i < 200'000; ++i) f.push(projected_cap_density(s2, c2, 0.3, x0 + sample_uniform_ball(2, 0.5, rng)));
  const auto sm = f.summary();
  const double area = std::numbers::pi * 0.25;
  CHECK(std::abs(area * sm.mean - 1.0) <= 4.0 * area * sm.stderr_of_mean());
}

TEST_CASE("overlaps lie in [0, 1] and approach 1 as R grows") {
  CouplingParams p{0.5, 2.0, 5, 0.1};
  double prev = 0.0;
  for (double R : {5.0, 20.0, 100.0, 1000.0}) {
    const SphereSpec s(R, 2);
    const double o = start_overlap(p, s);
    CHECK(o > prev);
    CHECK(o <= 1.0 + 1e-12);
    prev = o;
    const double st = step_overlap(s, lift(Point{0.3, 0.2}, s), 0.1);
    CHECK(st >= 0.0);
    CHECK(st <= 1.0 + 1e-12);
  }
  CHECK(prev == Approx(1.0).epsilon(1e-4));
}

TEST_CASE("maximal start coupling succeeds with probability equal to the overlap") {
  const SphereSpec s(5.0, 2);
  const CouplingParams p{0.5, 2.0, 5, 0.1};
  const double o = start_overlap(p, s);
  const int n = 40'000;
  int coupled = 0;
  for (int i = 0; i < n; ++i) {
    RngStream rng(8, static_cast<std::uint64_t>(i));
    const auto st = coupled_start(p, s, rng);
    CHECK(st.plane_pos.norm() < p.start_radius());
    if (st.coupled) {
      ++coupled;
      CHECK(project(st.sphere_pos) == st.plane_pos);
    }
  }
  CHECK(std::abs(coupled / double(n) - o) <= 4.0 * std::sqrt(o * (1.0 - o) / n));
}

TEST_CASE("coupled steps keep both chains within eps") {
  const SphereSpec s(5.0, 2);
  RngStream rng(9, 9);
  CoupledState st{lift(Point{0.2, 0.1}, s), Point{0.2, 0.1}, true};
  int coupled = 0;
  const int n = 20'000;
  for (int i = 0; i < n; ++i) {
    const auto nx = coupled_step(st, 0.1, s, rng);
    CHECK(geodesic_distance(s, nx.sphere_pos, st.sphere_pos) < 0.1 + 1e-12);
    CHECK(distance(nx.plane_pos, st.plane_pos) < 0.1);
    coupled += nx.coupled ? 1 : 0;
  }
  const double o = step_overlap(s, st.sphere_pos, 0.1);
  CHECK(std::abs(coupled / double(n) - o) <= 4.0 * std::sqrt(o * (1.0 - o) / n) + 1e-3);

  // A cap reaching the equator is rejected.
  CoupledState eq{s.normalize(Point{1.0, 0.0, -0.01}), Point{4.99, 0.0}, true};
  CHECK_THROWS_AS(coupled_step(eq, 0.5, s, rng), std::domain_error);
}

TEST_CASE("failure curve decreases in R and is reproducible") {
  const CouplingParams p{0.5, 2.0, 5, 0.1};
  const auto a = coupling_failure_curve(p, 2, {10.0, 100.0, 1e4}, 2000, 3, 1);
  const auto b = coupling_failure_curve(p, 2, {10.0, 100.0, 1e4}, 2000, 3, 2);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].failure_prob == b[i].failure_prob);
  CHECK(a[0].failure_prob >= a[1].failure_prob);
  CHECK(a[1].failure_prob >= a[2].failure_prob);
  CHECK(a[2].failure_prob <= 0.01);
  CHECK(a[0].replicates == 2000);
}
