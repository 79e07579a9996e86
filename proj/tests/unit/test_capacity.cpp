#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wsl/capacity.hpp"
#include "wsl/numerics.hpp"
#include "wsl/rng.hpp"
#include "wsl/stats.hpp"

using namespace wsl;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("ball capacity from hitting probability") {
  CapacityOptions o;
  o.walks = 40'000;
  o.seed = 3;
  const auto c = capacity_hitting(Shape::ball(Point{0.0, 0.0, 0.0}, 1.0), o);
  // From radius rho the ball of radius a is hit with probability a / rho.
  CHECK(c.start_radius == Approx(2.0));
  CHECK(std::abs(c.hit_probability - 0.5) <= 4.0 * std::sqrt(0.25 / o.walks));
  CHECK(std::abs(c.value - 2.0 * kPi) <= 4.0 * c.std_error);
  CHECK(c.walks == o.walks);

  // Scaling: Cap(B(x, a)) = 2 pi a wherever the ball sits.
  const auto far = capacity_hitting(Shape::ball(Point{3.0, -1.0, 0.5}, 0.5), o);
  CHECK(std::abs(far.value - kPi) <= 4.0 * far.std_error);

  CHECK_THROWS(capacity_hitting(Shape::ball(Point{0.0, 0.0}, 1.0), o));
}

TEST_CASE("capacity is monotone and subadditive") {
  CapacityOptions o;
  o.walks = 20'000;
  const Shape a = Shape::ball(Point{0.0, 0.0, 0.0}, 1.0);
  const Shape b = Shape::ball(Point{1.5, 0.0, 0.0}, 1.0);
  const auto u = capacity_hitting(Shape::union_of({a, b}), o);
  CHECK(u.value > 2.0 * kPi - 4.0 * u.std_error);
  CHECK(u.value < 4.0 * kPi + 4.0 * u.std_error);
  const auto cube = capacity_hitting(Shape::box(Point{-0.5, -0.5, -0.5}, Point{0.5, 0.5, 0.5}), o);
  // Inscribed and circumscribed balls bracket the cube.
  CHECK(cube.value > 2.0 * kPi * 0.5 - 4.0 * cube.std_error);
  CHECK(cube.value < 2.0 * kPi * std::sqrt(0.75) + 4.0 * cube.std_error);
}

TEST_CASE("exterior return point follows harmonic measure") {
  // For |x| = r > rho the cosine u of the angle between x and the hitting
  // point has density proportional to (r^2 + rho^2 - 2 r rho u)^{-3/2}.
  const double r = 3.0, rho = 1.0;
  const Point x{0.0, r, 0.0};
  auto dens = [&](double u) { return std::pow(r * r + rho * rho - 2.0 * r * rho * u, -1.5); };
  const double total = integrate(dens, -1.0, 1.0, 1e-13);
  RngStream rng(4, 4);
  std::vector<double> us;
  for (int i = 0; i < 20'000; ++i) {
    const Point y = exterior_return_point(x, rho, rng);
    CHECK(y.norm() == Approx(rho).epsilon(1e-12));
    us.push_back(y.dot(x) / (rho * r));
  }
  auto cdf = [&](double u) { return u <= -1.0 ? 0.0 : integrate(dens, -1.0, std::min(u, 1.0), 1e-12) / total; };
  CHECK(ks_statistic(us, cdf) < ks_critical(us.size(), 0.001));
}

TEST_CASE("closed-form ball sausage volume") {
  CHECK(ball_sausage_mean_volume_3d(1.0, 0.0) == Approx(4.0 * kPi / 3.0));
  CHECK(ball_sausage_mean_volume_3d(2.0, 1.0) ==
        Approx(2.0 * kPi * 2.0 + 16.0 * std::sqrt(2.0 * kPi) + 32.0 * kPi / 3.0));
}

TEST_CASE("grid sausage volume rises toward the continuous value") {
  ReplicateSettings rep;
  rep.replicates = 300;
  rep.seed = 5;
  SausageOptions opts;
  opts.method = SausageMethod::Coverage;
  opts.samples = 1024;
  const Shape a = Shape::ball(Point{0.0, 0.0, 0.0}, 1.0);
  const auto coarse = ksw_trend(a, {1.0}, 0.25, rep, opts);
  const auto fine = ksw_trend(a, {1.0}, 1.0 / 64.0, rep, opts);
  REQUIRE(coarse.size() == 1);
  CHECK(coarse[0].grid_n == 2);
  CHECK(fine[0].grid_n == 6);
  CHECK(fine[0].grid_step == Approx(1.0 / 64.0));
  CHECK(coarse[0].ratio == Approx(coarse[0].volume.value));
  const double cont = ball_sausage_mean_volume_3d(1.0, 1.0);
  const double se = std::hypot(coarse[0].volume.std_error, fine[0].volume.std_error);
  CHECK(fine[0].volume.value > coarse[0].volume.value - 4.0 * se);
  CHECK(fine[0].volume.value < cont + 4.0 * fine[0].volume.std_error);
  CHECK(coarse[0].volume.value > 4.0 * kPi / 3.0);
}
