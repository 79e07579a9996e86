#pragma once

#include <cstddef>
#include <vector>

#include "wsl/geometry.hpp"
#include "wsl/rng.hpp"
#include "wsl/sausage.hpp"

namespace wsl {

/// Brownian capacity estimate in d = 3, normalized so that a ball of radius
/// a has capacity 2 pi a (the constant of E[vol]/t for standard Brownian
/// motion).
struct CapacityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double hit_probability = 0.0;
  double start_radius = 0.0;
  std::size_t walks = 0;
};

struct CapacityOptions {
  std::size_t walks = 200'000;
  /// Start sphere radius as a multiple of the shape's containing radius.
  double start_factor = 2.0;
  /// Walk-on-spheres stops once within this distance of the shape.
  double tolerance = 1e-6;
  std::uint64_t seed = 7;
  unsigned workers = 1;
};

/// Cap(A) = 2 pi rho P(hit A), starting uniform on the sphere of radius rho
/// around the origin. Walk-on-spheres inside, exact escape/return law
/// outside the start sphere. d = 3 only.
CapacityEstimate capacity_hitting(const Shape& a, const CapacityOptions& opts = {});

/// Point on the sphere |y| = rho where Brownian motion from x (|x| > rho)
/// first hits it, conditioned on hitting. d = 3.
Point exterior_return_point(const Point& x, double rho, RngStream& rng);

struct KswRow {
  double t = 0.0;
  int grid_n = 0;
  double grid_step = 0.0;
  VolumeEstimate volume;
  double ratio = 0.0;  // E[vol]/t
  double ratio_se = 0.0;
};

/// E[vol of the Brownian grid sausage of a]/t for each t; the grid depth is
/// the smallest n with t/2^n <= max_step.
std::vector<KswRow> ksw_trend(const Shape& a, const std::vector<double>& t_list, double max_step,
                              const ReplicateSettings& rep, const SausageOptions& opts);

/// Closed-form expected volume of the continuous-time sausage of a ball of
/// radius a in R^3: 2 pi a t + 4 a^2 sqrt(2 pi t) + 4 pi a^3 / 3.
double ball_sausage_mean_volume_3d(double a, double t);

}  // namespace wsl
