#include "wsl/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wsl/parallel.hpp"
#include "wsl/stats.hpp"

namespace wsl {

namespace {

Point random_unit(int d, RngStream& rng) {
  Point g(d);
  double n2 = 0.0;
  while (n2 < 1e-24) {
    for (int i = 0; i < d; ++i) g[i] = rng.normal();
    n2 = g.squared_norm();
  }
  return g * (1.0 / std::sqrt(n2));
}

double containing_radius(const Shape& a) {
  const Bounds b = a.bounds();
  double r2 = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double m = std::max(std::abs(b.lo[i]), std::abs(b.hi[i]));
    r2 += m * m;
  }
  return std::min(std::sqrt(r2), a.bounding_radius());
}

}  // namespace

Point exterior_return_point(const Point& x, double rho, RngStream& rng) {
  if (x.dim() != 3) throw DimensionError("exterior_return_point: d = 3 only");
  const double r = x.norm();
  if (!(r > rho)) throw std::invalid_argument("exterior_return_point: x must lie outside the sphere");
  const double A = r * r + rho * rho, B = 2.0 * r * rho;
  const double lo = 1.0 / (r + rho), hi = 1.0 / (r - rho);
  const double w = lo + rng.uniform() * (hi - lo);
  const double u = std::clamp((A - 1.0 / (w * w)) / B, -1.0, 1.0);
  const Point xhat = x * (1.0 / r);
  Point e = random_unit(3, rng);
  e -= xhat * e.dot(xhat);
  const double en = e.norm();
  if (en < 1e-12) return xhat * (rho * u);
  e *= 1.0 / en;
  return (xhat * u + e * std::sqrt(std::max(0.0, 1.0 - u * u))) * rho;
}

CapacityEstimate capacity_hitting(const Shape& a, const CapacityOptions& opts) {
  if (a.dim() != 3) throw DimensionError("capacity_hitting: d = 3 only");
  if (a.is_empty()) return {};
  if (!(opts.start_factor > 1.0)) throw std::invalid_argument("capacity_hitting: start_factor must exceed 1");
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("capacity_hitting: tolerance must be > 0");
  require_replicates(opts.walks, 1);
  const double rho = opts.start_factor * containing_radius(a);
  const auto hits = parallel_map(opts.walks, opts.workers, [&](std::size_t w) {
    RngStream rng(opts.seed, w);
    Point x = random_unit(3, rng) * rho;
    for (std::size_t step = 0; step < 100'000; ++step) {
      const double r = x.norm();
      if (r > rho) {
        if (rng.uniform() >= rho / r) return 0.0;
        x = exterior_return_point(x, rho, rng);
      }
      const double dist = a.distance(x);
      if (dist < opts.tolerance) return 1.0;
      x += random_unit(3, rng) * dist;
    }
    throw std::runtime_error("capacity_hitting: walk did not terminate");
  });
  const SampleSummary s = summarize(hits);
  CapacityEstimate out;
  out.hit_probability = s.mean;
  out.start_radius = rho;
  out.walks = opts.walks;
  out.value = 2.0 * std::numbers::pi * rho * s.mean;
  out.std_error = 2.0 * std::numbers::pi * rho * s.stderr_of_mean();
  return out;
}

std::vector<KswRow> ksw_trend(const Shape& a, const std::vector<double>& t_list, double max_step,
                              const ReplicateSettings& rep, const SausageOptions& opts) {
  if (!(max_step > 0.0)) throw std::invalid_argument("ksw_trend: max_step must be > 0");
  std::vector<KswRow> rows;
  const int d = a.dim();
  const ShapeSchedule schedule = ShapeSchedule::constant(a);
  for (double t : t_list) {
    if (!(t > 0.0)) throw std::invalid_argument("ksw_trend: times must be > 0");
    int n = 0;
    while (t / std::ldexp(1.0, n) > max_step) ++n;
    const DyadicGrid grid(t, n);
    KswRow row;
    row.t = t;
    row.grid_n = n;
    row.grid_step = grid.step();
    row.volume = expected_sausage_volume([&](RngStream& rng) { return brownian_grid(d, grid, rng); }, schedule,
                                         rep, opts);
    row.ratio = row.volume.value / t;
    row.ratio_se = row.volume.std_error / t;
    rows.push_back(row);
  }
  return rows;
}

double ball_sausage_mean_volume_3d(double a, double t) {
  const double pi = std::numbers::pi;
  return 2.0 * pi * a * t + 4.0 * a * a * std::sqrt(2.0 * pi * t) + 4.0 * pi * a * a * a / 3.0;
}

}  // namespace wsl
