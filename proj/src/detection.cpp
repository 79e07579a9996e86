#include "wsl/detection.hpp"

#include <algorithm>
#include <boost/random/poisson_distribution.hpp>
#include <cmath>
#include <stdexcept>

#include "wsl/numerics.hpp"
#include "wsl/parallel.hpp"

namespace wsl {

void DetectionConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("detection: lambda must be > 0");
  if (!(r > 0.0)) throw std::invalid_argument("detection: r must be > 0");
  if (!(t > 0.0)) throw std::invalid_argument("detection: t must be > 0");
  if (!(window_margin >= 1.0)) {
    throw std::invalid_argument("detection: window_margin must be >= 1 (detector displacement std devs beyond r)");
  }
}

Bounds detection_window(const DetectionConfig& cfg, const DyadicGrid& grid) {
  cfg.validate();
  const int d = cfg.dim();
  Point lo = cfg.f(0.0), hi = lo;
  for (std::size_t k = 1; k < grid.points(); ++k) {
    const Point p = cfg.f(grid.time(k));
    for (int i = 0; i < d; ++i) lo[i] = std::min(lo[i], p[i]), hi[i] = std::max(hi[i], p[i]);
  }
  const double pad = cfg.r + cfg.window_margin * std::sqrt(cfg.t);
  for (int i = 0; i < d; ++i) lo[i] -= pad, hi[i] += pad;
  return {lo, hi, false};
}

std::vector<Point> sample_ppp(double lambda, const Bounds& window, RngStream& rng) {
  if (lambda < 0.0) throw std::invalid_argument("sample_ppp: lambda must be >= 0");
  std::vector<Point> pts;
  if (window.empty) return pts;
  const double mean = lambda * window.volume();
  if (mean <= 0.0) return pts;
  boost::random::poisson_distribution<std::uint64_t, double> pois(mean);
  const std::uint64_t count = pois(rng);
  const int d = window.lo.dim();
  pts.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Point x(d);
    for (int j = 0; j < d; ++j) x[j] = window.lo[j] + (window.hi[j] - window.lo[j]) * rng.uniform();
    pts.push_back(x);
  }
  return pts;
}

double void_probability(double lambda, int d, double r) {
  return std::exp(-lambda * unit_ball_volume(d) * std::pow(r, d));
}

std::vector<std::size_t> first_detection(const std::vector<Drift>& targets, double lambda, double r,
                                         const DyadicGrid& grid, const Bounds& window, RngStream& rng) {
  if (targets.empty()) return {};
  const int d = targets.front().dim();
  const std::size_t m = grid.points();
  std::vector<std::vector<Point>> target_pos(targets.size());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    if (targets[j].dim() != d) throw DimensionError("first_detection: targets differ in dimension");
    for (std::size_t k = 0; k < m; ++k) target_pos[j].push_back(targets[j](grid.time(k)));
  }
  RngStream cloud = rng.child(0);
  const std::vector<Point> pts = sample_ppp(lambda, window, cloud);
  const double r2 = r * r, sd = std::sqrt(grid.step());
  std::vector<std::size_t> first(targets.size(), m);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    RngStream path = rng.child(1 + i);
    Point x = pts[i];
    const std::size_t horizon = *std::max_element(first.begin(), first.end());
    for (std::size_t k = 0; k < m && k < horizon; ++k) {
      if (k > 0) {
        for (int c = 0; c < d; ++c) x[c] += sd * path.normal();
      }
      for (std::size_t j = 0; j < targets.size(); ++j) {
        if (k < first[j] && squared_distance(x, target_pos[j][k]) < r2) first[j] = k;
      }
    }
  }
  return first;
}

namespace {

SurvivalCurve curve_from(const std::vector<std::size_t>& first, const DyadicGrid& grid, std::string variant) {
  SurvivalCurve c;
  c.variant = std::move(variant);
  c.replicates = first.size();
  const double n = static_cast<double>(first.size());
  for (std::size_t k = 0; k < grid.points(); ++k) {
    std::size_t alive = 0;
    for (auto f : first) alive += f > k ? 1 : 0;
    const double p = static_cast<double>(alive) / n;
    c.points.push_back({grid.time(k), p, std::sqrt(p * (1.0 - p) / n)});
  }
  return c;
}

}  // namespace

SurvivalCurve detection_survival(const DetectionConfig& cfg, int grid_n, const ReplicateSettings& rep) {
  require_replicates(rep.replicates, rep.min_replicates);
  const DyadicGrid grid(cfg.t, grid_n);
  const Bounds window = detection_window(cfg, grid);
  const auto first = parallel_map(rep.replicates, rep.workers, [&](std::size_t k) {
    RngStream rng(rep.seed, k);
    return first_detection({cfg.f}, cfg.lambda, cfg.r, grid, window, rng).front();
  });
  return curve_from(first, grid, cfg.f.is_zero() ? "still" : "drift");
}

SurvivalCurve survival_from_volume(const DetectionConfig& cfg, int grid_n, const ReplicateSettings& rep,
                                   const SausageOptions& opts) {
  cfg.validate();
  const DyadicGrid grid(cfg.t, grid_n);
  const int d = cfg.dim();
  const Shape ball = Shape::ball(Point(d), cfg.r);
  require_replicates(rep.replicates, rep.min_replicates);
  // Per replicate: volume of the prefix sausages up to each grid time.
  const auto vols = parallel_map(rep.replicates, rep.workers, [&](std::size_t k) {
    const RngStream base(rep.seed, k);
    RngStream path_rng = base.child(0), mc = base.child(1);
    const Path p = add_drift(brownian_grid(d, grid, path_rng), cfg.f);
    std::vector<double> v;
    Path prefix;
    for (std::size_t j = 0; j < p.size(); ++j) {
      prefix.times.push_back(p.times[j]);
      prefix.positions.push_back(p.positions[j]);
      RngStream inner = mc.child(j);
      v.push_back(sausage_volume(SausageSpec::make(prefix, ball), opts, inner).value);
    }
    return v;
  });
  SurvivalCurve c;
  c.variant = "volume";
  c.replicates = rep.replicates;
  for (std::size_t j = 0; j < grid.points(); ++j) {
    std::vector<double> col;
    for (const auto& v : vols) col.push_back(v[j]);
    const SampleSummary s = summarize(col);
    const double surv = std::exp(-cfg.lambda * s.mean);
    c.points.push_back({grid.time(j), surv, surv * cfg.lambda * s.stderr_of_mean()});
  }
  return c;
}

PascalReport pascal_check(const DetectionConfig& cfg, int grid_n, const std::vector<double>& times,
                          const ReplicateSettings& rep) {
  require_replicates(rep.replicates, rep.min_replicates);
  const DyadicGrid grid(cfg.t, grid_n);
  const Drift still = Drift::zero(cfg.dim());
  // Window covers both targets.
  Bounds window = detection_window(cfg, grid);
  DetectionConfig still_cfg = cfg;
  still_cfg.f = still;
  const Bounds w0 = detection_window(still_cfg, grid);
  for (int i = 0; i < cfg.dim(); ++i) {
    window.lo[i] = std::min(window.lo[i], w0.lo[i]);
    window.hi[i] = std::max(window.hi[i], w0.hi[i]);
  }
  const auto first = parallel_map(rep.replicates, rep.workers, [&](std::size_t k) {
    RngStream rng(rep.seed, k);
    return first_detection({still, cfg.f}, cfg.lambda, cfg.r, grid, window, rng);
  });
  std::vector<std::size_t> fs, fd;
  for (const auto& f : first) fs.push_back(f[0]), fd.push_back(f[1]);
  PascalReport out;
  out.still = curve_from(fs, grid, "still");
  out.drift = curve_from(fd, grid, "drift");
  for (double t : times) {
    if (t < 0.0 || t > cfg.t) throw std::invalid_argument("pascal_check: time outside [0, t]");
    const auto k = static_cast<std::size_t>(std::floor(t / grid.step() + 1e-9));
    std::vector<double> diffs;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      diffs.push_back((fs[i] > k ? 1.0 : 0.0) - (fd[i] > k ? 1.0 : 0.0));
    }
    PascalRow row;
    row.t = grid.time(k);
    row.still = out.still.points[k].survival;
    row.drift = out.drift.points[k].survival;
    row.test = paired_one_sided_test(diffs, rep.level, rep.min_replicates);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace wsl
