#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wsl/point.hpp"
#include "wsl/rng.hpp"
#include "wsl/spherewalk.hpp"

namespace wsl {

/// Joint state of the sphere walk zeta and the plane walk z. While coupled,
/// plane_pos is the stored projection of sphere_pos.
struct CoupledState {
  Point sphere_pos;
  Point plane_pos;
  bool coupled = false;
};

struct CouplingParams {
  double L = 1.0;
  double c = 2.0;
  std::size_t n = 10;
  double eps = 0.1;

  /// Radius L + c n eps of the planar start ball.
  [[nodiscard]] double start_radius() const { return L + c * static_cast<double>(n) * eps; }
};

/// Checks L + c n eps < R and that C(L) = pi^{-1}(B(0, L + c n eps)) has
/// geodesic radius > L + n eps. Throws std::invalid_argument otherwise.
void validate_coupling(const CouplingParams& p, const SphereSpec& s);

/// Geodesic radius of C(L).
double start_cap_radius(const CouplingParams& p, const SphereSpec& s);

/// Maximal coupling of the projected uniform start on C(L) and the uniform
/// start on B(0, L + c n eps).
CoupledState coupled_start(const CouplingParams& p, const SphereSpec& s, RngStream& rng);

/// One step: the sphere walk moves uniformly in C(zeta, eps), the plane walk
/// uniformly in B(z, eps). A coupled state is maximally coupled again; an
/// uncoupled one evolves both chains independently.
CoupledState coupled_step(const CoupledState& state, double eps, const SphereSpec& s,
                          RngStream& rng);

/// Density of pi(U), U uniform on C(center, eps), at the planar point x.
double projected_cap_density(const SphereSpec& s, const Point& center, double eps, const Point& x);

/// int min(f_R^0, f^0) by radial quadrature.
double start_overlap(const CouplingParams& p, const SphereSpec& s);

/// int min(f_R^1, f^1) for a step from sphere point zeta (d <= 2).
double step_overlap(const SphereSpec& s, const Point& zeta, double eps);

struct CouplingRow {
  double R = 0.0;
  int d = 0;
  CouplingParams params;
  double failure_prob = 0.0;
  double std_error = 0.0;
  std::size_t replicates = 0;
};

/// Runs n-step coupled chains for each R; failure means the start or any
/// step was uncoupled.
std::vector<CouplingRow> coupling_failure_curve(const CouplingParams& p, int d,
                                                const std::vector<double>& R_list,
                                                std::size_t replicates, std::uint64_t seed,
                                                unsigned workers = 1,
                                                std::size_t min_replicates = 100);

}  // namespace wsl
