#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wsl/numerics.hpp"
#include "wsl/parallel.hpp"
#include "wsl/rng.hpp"
#include "wsl/stats.hpp"

using namespace wsl;
using doctest::Approx;

TEST_CASE("paired one-sided test") {
  const std::vector<double> zeros(100, 0.0), ones(100, 1.0);
  const auto z = paired_one_sided_test(zeros);
  CHECK(z.degenerate);
  CHECK(z.mean_diff == 0.0);
  CHECK(z.p_value == 1.0);
  const auto o = paired_one_sided_test(ones);
  CHECK(o.mean_diff == 1.0);
  CHECK(o.p_value == Approx(0.0));
  CHECK(o.ci_low <= o.mean_diff);

  // Shifted coin {0.24, 0.26}: sd 0.01, stderr 1e-4 at n = 1e4.
  RngStream rng(1, 1);
  std::vector<double> coin;
  for (int i = 0; i < 10'000; ++i) coin.push_back(rng.uniform() < 0.5 ? 0.24 : 0.26);
  const auto c = paired_one_sided_test(coin, 0.99);
  CHECK(c.mean_diff == Approx(0.25).epsilon(1e-3));
  CHECK(c.std_error == Approx(1e-4).epsilon(0.02));
  CHECK(c.mean_diff - c.ci_low == Approx(normal_quantile(0.99) * c.std_error));
  CHECK(c.ci_low <= c.mean_diff);
  CHECK(c.p_value >= 0.0);
  CHECK(c.p_value <= 1.0);

  CHECK_THROWS_AS(paired_one_sided_test(std::vector<double>(99, 1.0)), InsufficientReplicates);
  CHECK_THROWS_AS(paired_one_sided_test(std::vector<double>{}), InsufficientReplicates);
}

TEST_CASE("kolmogorov-smirnov") {
  // Draws from the reference law pass at alpha = 0.01 in at least 95 of 100 trials.
  int pass = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RngStream rng(2, static_cast<std::uint64_t>(trial));
    std::vector<double> xs;
    for (int i = 0; i < 2000; ++i) xs.push_back(rng.uniform());
    pass += ks_statistic(xs, [](double u) { return std::clamp(u, 0.0, 1.0); }) < 1.63 / std::sqrt(2000.0) ? 1 : 0;
  }
  CHECK(pass >= 95);
  CHECK(ks_critical(10'000, 0.01) == Approx(1.6276 / 100.0).epsilon(1e-3));

  // Constant sample c against N(0,1): max(F(c), 1 - F(c)).
  const double c = 0.3;
  CHECK(ks_statistic(std::vector<double>(50, c), normal_cdf) ==
        Approx(std::max(normal_cdf(c), 1.0 - normal_cdf(c))));
  CHECK_THROWS(ks_statistic({}, normal_cdf));
}

TEST_CASE("chi-square uniformity") {
  CHECK(chi_square_uniformity(std::vector<double>{0.25, 0.75}, 2) == 0.0);
  CHECK(chi_square_uniformity(std::vector<double>{0.1, 0.2, 0.3, 0.9}, 2) == Approx(1.0));
  CHECK_THROWS(chi_square_uniformity(std::vector<double>{}, 4));
}

TEST_CASE("anderson-darling") {
  RngStream rng(3, 3);
  std::vector<double> g, u;
  for (int i = 0; i < 20'000; ++i) {
    g.push_back(rng.normal());
    u.push_back(rng.uniform());
  }
  CHECK(anderson_darling(g, normal_cdf).p_value > 0.001);
  CHECK(anderson_darling(u, normal_cdf).p_value < 1e-6);
}

TEST_CASE("summaries: streaming versus two-pass") {
  RngStream rng(4, 4);
  std::vector<double> xs;
  RunningStats st;
  for (int i = 0; i < 10'000; ++i) {
    xs.push_back(1e3 + 5.0 * rng.normal());
    st.push(xs.back());
  }
  const auto a = st.summary(), b = summarize(xs);
  CHECK(a.n == b.n);
  CHECK(a.mean == Approx(b.mean).epsilon(1e-10));
  CHECK(a.variance == Approx(b.variance).epsilon(1e-10));
  CHECK(a.min == b.min);
  CHECK(a.max == b.max);
  CHECK(b.variance >= 0.0);
  CHECK_THROWS(summarize(std::vector<double>{}));
}

TEST_CASE("ordered reduction across worker counts") {
  auto run = [](unsigned w) {
    const auto v = parallel_map(1000, w, [](std::size_t i) {
      RngStream r(5, i);
      double s = 0.0;
      for (int k = 0; k < 100; ++k) s += r.normal();
      return s;
    });
    return summarize(v);
  };
  const auto a = run(1), b = run(2), c = run(8);
  CHECK(a.mean == b.mean);
  CHECK(a.mean == c.mean);
  CHECK(a.variance == c.variance);
}

TEST_CASE("worker resolution") {
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}
