#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wsl/geometry.hpp"
#include "wsl/rng.hpp"
#include "wsl/sausage.hpp"
#include "wsl/stats.hpp"
#include "wsl/stochastic.hpp"

namespace wsl {

/// Poisson cloud of Brownian detectors with intensity lambda against a
/// target moving along f; detection when a detector comes within r.
struct DetectionConfig {
  double lambda = 1.0;
  double r = 0.5;
  double t = 1.0;
  Drift f = Drift::zero(2);
  double window_margin = 6.0;

  [[nodiscard]] int dim() const { return f.dim(); }
  void validate() const;
};

/// Bounding box of the target positions on the grid, enlarged by
/// r + window_margin * sqrt(t).
Bounds detection_window(const DetectionConfig& cfg, const DyadicGrid& grid);

/// Poisson(lambda vol(window)) points, i.i.d. uniform in the window.
std::vector<Point> sample_ppp(double lambda, const Bounds& window, RngStream& rng);

/// exp(-lambda omega(d) r^d).
double void_probability(double lambda, int d, double r);

struct SurvivalPoint {
  double t = 0.0;
  double survival = 0.0;
  double std_error = 0.0;
};

struct SurvivalCurve {
  std::string variant;  // "drift" or "still"
  std::vector<SurvivalPoint> points;
  std::size_t replicates = 0;
};

/// First grid index at which some detector is within r of each target, or
/// grid.points() if none. All targets see the same detectors.
std::vector<std::size_t> first_detection(const std::vector<Drift>& targets, double lambda, double r,
                                         const DyadicGrid& grid, const Bounds& window, RngStream& rng);

/// P(T > t_j) on the grid times.
SurvivalCurve detection_survival(const DetectionConfig& cfg, int grid_n, const ReplicateSettings& rep);

/// exp(-lambda E[vol]) with E[vol] of the grid sausage of B(xi + f, r).
SurvivalCurve survival_from_volume(const DetectionConfig& cfg, int grid_n, const ReplicateSettings& rep,
                                   const SausageOptions& opts);

struct PascalRow {
  double t = 0.0;
  double still = 0.0;
  double drift = 0.0;
  ComparisonResult test;  // on 1{T_still > t} - 1{T_drift > t}
};

struct PascalReport {
  SurvivalCurve still;
  SurvivalCurve drift;
  std::vector<PascalRow> rows;  // one per requested time
};

/// Drifted and still targets on common detector randomness. Requested times
/// are rounded down to the grid.
PascalReport pascal_check(const DetectionConfig& cfg, int grid_n, const std::vector<double>& times,
                          const ReplicateSettings& rep);

}  // namespace wsl
