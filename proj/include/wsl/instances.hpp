#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wsl/rng.hpp"
#include "wsl/sausage.hpp"
#include "wsl/spherewalk.hpp"

namespace wsl {

// Randomized problem instances shared by the harness, the test suite and
// the acceptance run.

/// Sets and kernels for a rearrangement check.
struct RearrangementInstance {
  SphereSpec sphere;
  std::vector<SphereRegion> sets;
  std::vector<KernelEntry> kernels;
  [[nodiscard]] std::string describe() const;
};

/// Circle (R = 1) instance aligned to a grid of M cells: every arc endpoint
/// is a multiple of 2h and indicator radii are multiples of h, h = 2 pi / M.
RearrangementInstance random_circle_instance(std::size_t n, std::size_t M, RngStream& rng);

/// Instance on S^2 (R = 1) built from caps, bands and cap complements, so
/// every set has an exact measure.
RearrangementInstance random_sphere_instance(std::size_t n, RngStream& rng);

/// Obstacles Theta_0..Theta_n on the unit circle (grid-aligned unions of
/// arcs) with a grid-aligned step radius eps.
struct ObstacleSuite {
  SphereSpec sphere;
  std::vector<SphereRegion> obstacles;
  double eps = 0.0;
  [[nodiscard]] std::string describe() const;
};

ObstacleSuite random_obstacle_suite(std::size_t n, std::size_t M, RngStream& rng);

/// Caps at the south pole with the obstacles' measures.
std::vector<SphereRegion> rearranged_obstacles(const ObstacleSuite& suite);

struct DualityInstance {
  int d = 1;
  std::size_t n = 0;
  double L = 1.0;
  double c = 1.0;
  double eps = 0.1;
  ShapeSchedule obstacles = ShapeSchedule::constant(Shape::empty(1));
  [[nodiscard]] std::string describe() const;
};

/// d in {1, 2}, n <= 3, asymmetric obstacles inside B(0, L), c >= 1.
DualityInstance random_duality_instance(RngStream& rng);

}  // namespace wsl
