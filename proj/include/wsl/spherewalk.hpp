#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsl/geometry.hpp"
#include "wsl/point.hpp"
#include "wsl/rng.hpp"
#include "wsl/stats.hpp"

namespace wsl {

/// The sphere S_R of radius R in R^{d+1}. Sphere points are Points of
/// dimension d + 1.
struct SphereSpec {
  double R = 1.0;
  int d = 1;

  SphereSpec() = default;
  SphereSpec(double R_, int d_);

  [[nodiscard]] int ambient() const { return d + 1; }
  [[nodiscard]] double total_measure() const;
  /// (0, ..., 0, -R), the center of the caps C_k and of the lifted chart.
  [[nodiscard]] Point south_pole() const;
  /// (0, ..., 0, R).
  [[nodiscard]] Point north_pole() const;
  /// Rescale x onto the sphere.
  [[nodiscard]] Point normalize(const Point& x) const;
  void check_point(const Point& x) const;
};

struct CapSpec {
  Point center;
  double radius = 0.0;  // geodesic
};

double geodesic_distance(const SphereSpec& s, const Point& x, const Point& y);

/// mu(C(x, eps)) = A_{d-1} R^d * int_0^{eps/R} sin^{d-1}.
double cap_measure(const SphereSpec& s, double eps);

/// Geodesic radius of a cap with the given measure (monotone bisection).
double cap_radius_for_measure(const SphereSpec& s, double measure);

namespace testing {
/// Multiplies every cap_measure result; 1 restores normal behavior. Used by
/// the selftest negative control.
void set_cap_measure_fault(double factor);
}  // namespace testing

/// Orthogonal map (det +1) taking the north pole direction to `center`.
class PoleRotation {
 public:
  explicit PoleRotation(const Point& center);
  [[nodiscard]] Point apply(const Point& y) const;

 private:
  Point v_;
  double vv_ = 0.0;
};

Point sample_uniform_sphere(const SphereSpec& s, RngStream& rng);
Point sample_uniform_cap(const SphereSpec& s, const CapSpec& cap, RngStream& rng);

/// Chain with kernel 1(rho(x,y) < eps) / mu(C(x, eps)). start = nullopt draws
/// a uniform starting point. Returns steps + 1 points.
std::vector<Point> sphere_walk(const SphereSpec& s, double eps, const std::optional<Point>& start,
                               std::size_t steps, RngStream& rng);

/// Drops the last coordinate.
Point project(const Point& x);
/// Point of S_R over x with negative last coordinate. Throws if |x| >= R.
Point lift(const Point& x, const SphereSpec& s);

/// Measurable subsets of S_R.
class SphereRegion {
 public:
  enum class Kind { Empty, Cap, Band, Complement, Union, Lifted };

  static SphereRegion empty(const SphereSpec& s);
  static SphereRegion whole(const SphereSpec& s);
  static SphereRegion cap(const SphereSpec& s, const CapSpec& c);
  /// Points whose geodesic distance to `pole` lies in [lo, hi).
  static SphereRegion band(const SphereSpec& s, const Point& pole, double lo, double hi);
  static SphereRegion complement(const SphereRegion& inner);
  static SphereRegion union_of(std::vector<SphereRegion> parts);
  /// pi^{-1}(shape): the lower-hemisphere lift of a planar shape.
  static SphereRegion lifted(const SphereSpec& s, const Shape& planar);

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] const SphereSpec& sphere() const;
  [[nodiscard]] bool contains(const Point& x) const;

  /// Exact for caps, bands, complements of exact regions, circle (d = 1)
  /// regions of any kind, unions of pairwise disjoint caps, and lifts of
  /// origin-centered balls; Monte Carlo otherwise.
  [[nodiscard]] VolumeValue measure(const VolumeOptions& opts = {}) const;

  /// For d = 1: merged arcs [a, b) in the chart phi in [0, 2 pi) with
  /// point(phi) = R (sin phi, -cos phi), so phi = 0 is the south pole.
  [[nodiscard]] std::vector<std::pair<double, double>> arcs() const;

  [[nodiscard]] const CapSpec& cap_spec() const;
  [[nodiscard]] std::string describe() const;

 private:
  struct Node;
  explicit SphereRegion(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Uniform point of the region (direct for caps and bands, rejection from
/// the sphere otherwise). The region must have positive measure.
Point sample_uniform_region(const SphereRegion& r, RngStream& rng);

/// Cap at `pole` with the region's measure. A cap already centered at the
/// pole is returned unchanged.
CapSpec rearrange(const SphereRegion& region, const Point& pole, const VolumeOptions& opts = {});

/// Circle chart helpers (d = 1).
double circle_angle(const Point& x, const SphereSpec& s);
Point circle_point(double phi, const SphereSpec& s);

struct ProbabilityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// MC estimate of P(walk(k) not in obstacles[k] for all k <= n), walk
/// started uniformly on the sphere; n = obstacles.size() - 1.
ProbabilityEstimate survival_probability(const SphereSpec& s,
                                         const std::vector<SphereRegion>& obstacles, double eps,
                                         std::size_t replicates, std::uint64_t seed,
                                         unsigned workers = 1);

/// Tensor quadrature of the same probability on the circle: cells of width
/// 2 pi / M, membership at cell centers, row-normalized indicator kernel.
double circle_survival_quadrature(const SphereSpec& s, const std::vector<SphereRegion>& obstacles,
                                  double eps, std::size_t M = 4096);

/// Nonincreasing functions of geodesic distance.
struct DistanceKernel {
  enum class Kind { One, Indicator, Exponential, Power };
  Kind kind = Kind::One;
  double param = 0.0;  // eps, scale s, or power p

  static DistanceKernel one() { return {}; }
  static DistanceKernel indicator(double eps);
  static DistanceKernel exponential(double scale);
  static DistanceKernel power(double p);
  /// Parses "indicator:0.3", "exp:1.5", "power:2", "one".
  static DistanceKernel parse(const std::string& spec);

  double operator()(double rho) const;
  [[nodiscard]] std::string describe() const;
};

/// psi_ij for i < j; pairs not listed use the constant kernel 1.
struct KernelEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  DistanceKernel kernel;
};

struct RearrangementCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;     // rhs - lhs
  double std_error = 0.0;  // combined; 0 for quadrature
};

/// Quadrature on the circle (d = 1). n <= 3 at any resolution (n = 3 uses
/// FFT circular convolution), n = 4 by direct summation (keep M small).
RearrangementCheck rearrangement_quadrature(const SphereSpec& s,
                                            const std::vector<SphereRegion>& sets,
                                            const std::vector<KernelEntry>& kernels,
                                            const Point& pole, std::size_t M = 4096);

/// Monte Carlo for any d, n <= 6: each side is prod mu(A_i) times the mean
/// of prod psi_ij over independent uniform points of the sets.
RearrangementCheck rearrangement_monte_carlo(const SphereSpec& s,
                                             const std::vector<SphereRegion>& sets,
                                             const std::vector<KernelEntry>& kernels,
                                             const Point& pole, std::size_t samples,
                                             RngStream& rng);

struct Lemma41Result {
  bool inclusion_holds = true;
  std::size_t inner_violations = 0;
  std::size_t outer_violations = 0;
  std::size_t points_tested = 0;
  double measure_gap = 0.0;  // mu(pi^{-1}(B(0, r))) - vol(B(0, r))
};

/// Checks B(x, r - delta) in pi(C(pi^{-1}(x), r)) in B(x, r + delta) for
/// centers x uniform in B(0, K), on boundary-biased points.
Lemma41Result lemma41_check(const SphereSpec& s, double K, double r, double delta, RngStream& rng,
                            std::size_t centers = 50, std::size_t points_per_center = 10000);

/// mu(pi^{-1}(B(0, r))) - omega(d) r^d by radial quadrature of 1/cos(alpha) - 1.
double lifted_ball_measure_gap(const SphereSpec& s, double r);

/// mu(pi^{-1}(B(0, r))) by radial quadrature.
double lifted_ball_measure(const SphereSpec& s, double r);

}  // namespace wsl
