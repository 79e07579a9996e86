#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wsl/numerics.hpp"
#include "wsl/stats.hpp"
#include "wsl/stochastic.hpp"

using namespace wsl;
using doctest::Approx;

TEST_CASE("uniform ball: support and moments") {
  // E|U|^2 for U uniform on B(0, eps): radial density d r^{d-1}/eps^d.
  for (int d : {1, 2, 3, 5}) {
    const double eps = 0.7;
    const double oracle = integrate([&](double r) { return r * r * d * std::pow(r, d - 1) / std::pow(eps, d); }, 0.0, eps);
    CHECK(oracle == Approx(eps * eps * d / (d + 2.0)).epsilon(1e-12));
    RngStream rng(1, static_cast<std::uint64_t>(d));
    RunningStats sq;
    std::vector<RunningStats> coord(static_cast<std::size_t>(d));
    for (int i = 0; i < 200'000; ++i) {
      const Point u = sample_uniform_ball(d, eps, rng);
      REQUIRE(u.norm() < eps);
      sq.push(u.squared_norm());
      for (int c = 0; c < d; ++c) coord[static_cast<std::size_t>(c)].push(u[c]);
    }
    CHECK(std::abs(sq.summary().mean - oracle) <= 4.0 * sq.summary().stderr_of_mean());
    for (auto& c : coord) CHECK(std::abs(c.summary().mean) <= 4.0 * c.summary().stderr_of_mean());
  }
}

TEST_CASE("uniform ball: radial law") {
  RngStream rng(2, 2);
  const int d = 3;
  std::vector<double> r;
  for (int i = 0; i < 100'000; ++i) r.push_back(sample_uniform_ball(d, 1.0, rng).norm());
  CHECK(ks_statistic(r, [](double x) { return std::clamp(x * x * x, 0.0, 1.0); }) < ks_critical(r.size(), 0.001));
}

TEST_CASE("ball walk") {
  RngStream rng(3, 3);
  const Path p0 = ball_walk(2, 0.5, Point{1.0, 2.0}, 0, rng);
  REQUIRE(p0.size() == 1);
  CHECK(p0.positions[0] == Point{1.0, 2.0});

  const Path p = ball_walk(2, 0.5, Point(2), 100, rng);
  REQUIRE(p.size() == 101);
  for (std::size_t k = 1; k < p.size(); ++k) {
    CHECK(distance(p.positions[k], p.positions[k - 1]) < 0.5);
    CHECK(p.times[k] == static_cast<double>(k));
  }

  // Variance of z(n) - z(0) per coordinate: n eps^2 / (d + 2).
  const int d = 2, n = 9;
  const double eps = 0.4;
  RunningStats x2;
  for (int i = 0; i < 50'000; ++i) {
    RngStream r(4, static_cast<std::uint64_t>(i));
    const double x = ball_walk(d, eps, Point(d), n, r).positions.back()[0];
    x2.push(x * x);
  }
  const auto s = x2.summary();
  CHECK(std::abs(s.mean - n * eps * eps / (d + 2.0)) <= 4.0 * s.stderr_of_mean());
}

TEST_CASE("brownian grid") {
  const DyadicGrid g0(2.0, 0);
  CHECK(g0.points() == 2);
  RngStream rng(5, 5);
  const Path p = brownian_grid(3, g0, rng);
  REQUIRE(p.size() == 2);
  CHECK(p.positions[0] == Point(3));
  CHECK(p.times[1] == 2.0);

  const DyadicGrid g(1.5, 4);
  RunningStats norm2;
  std::vector<double> incr;
  RunningStats cov01;
  for (int i = 0; i < 20'000; ++i) {
    RngStream r(6, static_cast<std::uint64_t>(i));
    const Path q = brownian_grid(2, g, r);
    norm2.push(q.positions.back().squared_norm());
    const Point dq = q.positions[3] - q.positions[2];
    incr.push_back(dq[0] / std::sqrt(g.step()));
    cov01.push(dq[0] * dq[1]);
  }
  CHECK(std::abs(norm2.summary().mean - 3.0) <= 4.0 * norm2.summary().stderr_of_mean());
  const auto ad = anderson_darling(incr, normal_cdf);
  CHECK(ad.p_value > 0.001);
  CHECK(std::abs(cov01.summary().mean) <= 4.0 * cov01.summary().stderr_of_mean());
  CHECK_THROWS(DyadicGrid(0.0, 3));
  CHECK_THROWS(DyadicGrid(1.0, -1));
}

TEST_CASE("brownian refinement keeps the marginal law") {
  std::vector<double> coarse, fine;
  for (int i = 0; i < 20'000; ++i) {
    RngStream a(7, static_cast<std::uint64_t>(i)), b(8, static_cast<std::uint64_t>(i));
    coarse.push_back(brownian_grid(1, DyadicGrid(1.0, 1), a).positions[1][0]);
    fine.push_back(brownian_grid(1, DyadicGrid(1.0, 5), b).positions[16][0]);
  }
  CHECK(ks_two_sample(coarse, fine) < ks_two_sample_critical(coarse.size(), fine.size(), 0.001));
  const Path p = [] {
    RngStream r(9, 9);
    return brownian_grid(2, DyadicGrid(1.0, 6), r);
  }();
  const Path q = restrict_to_grid(p, 6, 3);
  REQUIRE(q.size() == 9);
  CHECK(q.positions[4] == p.positions[32]);
}

TEST_CASE("drift") {
  RngStream rng(10, 10);
  const Path p = brownian_grid(2, DyadicGrid(1.0, 3), rng);
  const Path z = add_drift(p, Drift::zero(2));
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(z.positions[k] == p.positions[k]);
  const Path c = add_drift(p, Drift::constant(Point{1.0, -2.0}));
  const Path l = add_drift(p, Drift::linear(Point{1.0, 0.0}));
  const Path j = add_drift(p, Drift::jump(0.5, Point{0.0, 0.0}, Point{3.0, 0.0}));
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(c.positions[k][0] == Approx(p.positions[k][0] + 1.0));
    CHECK(c.positions[k][1] == Approx(p.positions[k][1] - 2.0));
    CHECK(l.positions[k][0] == Approx(p.positions[k][0] + p.times[k]));
    CHECK(l.positions[k][1] == p.positions[k][1]);
    CHECK(j.positions[k][0] == Approx(p.positions[k][0] + (p.times[k] >= 0.5 ? 3.0 : 0.0)));
  }
  CHECK_THROWS(add_drift(p, Drift::zero(3)));
}

TEST_CASE("donsker walk") {
  const DyadicGrid g(1.0, 3);
  RngStream rng(11, 11);
  // N l < 1 before the last grid time: the path stays at 0 until then.
  const Path flat = donsker_walk(2, 1, g, rng);
  for (std::size_t k = 0; k + 1 < flat.size(); ++k) CHECK(flat.positions[k] == Point(2));
  CHECK(flat.positions.back() != Point(2));

  RunningStats v;
  std::vector<double> dw, bm;
  for (int i = 0; i < 4000; ++i) {
    RngStream a(12, static_cast<std::uint64_t>(i)), b(13, static_cast<std::uint64_t>(i));
    const Path w = donsker_walk(2, 10'000, g, a);
    v.push(w.positions[3][0] * w.positions[3][0]);
    dw.push_back(w.positions[8][0]);
    bm.push_back(brownian_grid(2, g, b).positions[8][0]);
  }
  // floor(N l)/N at l = 3/8 is exactly 0.375.
  CHECK(std::abs(v.summary().mean - 0.375) <= 4.0 * v.summary().stderr_of_mean());
  CHECK(ks_two_sample(dw, bm) < ks_two_sample_critical(dw.size(), bm.size(), 0.001));
}

TEST_CASE("path csv") {
  RngStream rng(14, 14);
  const Path p = ball_walk(2, 0.1, Point(2), 2, rng);
  std::ostringstream os;
  write_path_csv(os, p);
  const std::string s = os.str();
  CHECK(s.rfind("t,x1,x2\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}

TEST_CASE("determinism") {
  RngStream a(99, 5), b(99, 5);
  const Path p = brownian_grid(3, DyadicGrid(1.0, 5), a), q = brownian_grid(3, DyadicGrid(1.0, 5), b);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(p.positions[k] == q.positions[k]);
}
