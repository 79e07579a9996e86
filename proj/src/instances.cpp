#include "wsl/instances.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace wsl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Arc [2h i, 2h j) on the unit circle as a cap in the circle chart.
SphereRegion aligned_arc(const SphereSpec& s, std::size_t M, RngStream& rng) {
  const std::size_t slots = M / 2;
  const double h2 = kTwoPi / static_cast<double>(slots);
  const std::size_t start = rng.below(slots);
  const std::size_t len = 1 + rng.below(slots / 3);
  const double a = h2 * static_cast<double>(start), b = a + h2 * static_cast<double>(len);
  return SphereRegion::cap(s, {circle_point(0.5 * (a + b), s), 0.5 * (b - a)});
}

SphereRegion aligned_arcs(const SphereSpec& s, std::size_t M, std::size_t max_arcs, RngStream& rng) {
  const std::size_t k = 1 + rng.below(max_arcs);
  std::vector<SphereRegion> parts;
  for (std::size_t i = 0; i < k; ++i) parts.push_back(aligned_arc(s, M, rng));
  return parts.size() == 1 ? parts.front() : SphereRegion::union_of(std::move(parts));
}

DistanceKernel random_kernel(RngStream& rng, double h) {
  switch (rng.below(4)) {
    case 0:
      return DistanceKernel::one();
    case 1: {
      // Multiple of h (or any radius when h == 0).
      const double eps = 0.2 + 1.5 * rng.uniform();
      return DistanceKernel::indicator(h > 0.0 ? h * std::round(eps / h) : eps);
    }
    case 2:
      return DistanceKernel::exponential(0.2 + 2.0 * rng.uniform());
    default:
      return DistanceKernel::power(0.5 + 3.0 * rng.uniform());
  }
}

std::vector<KernelEntry> random_kernels(std::size_t n, RngStream& rng, double h) {
  std::vector<KernelEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out.push_back({i, j, random_kernel(rng, h)});
  }
  return out;
}

Point random_sphere_point(const SphereSpec& s, RngStream& rng) { return sample_uniform_sphere(s, rng); }

Shape random_obstacle(int d, double L, RngStream& rng) {
  auto inside = [&](double room) {
    // Center within B(0, L - room).
    return sample_uniform_ball(d, std::max(L - room, 1e-6), rng);
  };
  switch (rng.below(4)) {
    case 0:
      return Shape::empty(d);
    case 1: {
      const double r = (0.1 + 0.4 * rng.uniform()) * L;
      return Shape::ball(inside(r), r);
    }
    case 2: {
      const double half = (0.05 + 0.3 * rng.uniform()) * L / std::sqrt(static_cast<double>(d));
      Point lo = inside(half * std::sqrt(static_cast<double>(d)));
      Point hi = lo;
      for (int i = 0; i < d; ++i) lo[i] -= half, hi[i] += half * (0.3 + 0.7 * rng.uniform());
      return Shape::box(lo, hi);
    }
    default: {
      const double r1 = (0.1 + 0.3 * rng.uniform()) * L, r2 = (0.1 + 0.3 * rng.uniform()) * L;
      return Shape::union_of({Shape::ball(inside(r1), r1), Shape::ball(inside(r2), r2)});
    }
  }
}

}  // namespace

std::string RearrangementInstance::describe() const {
  std::ostringstream os;
  os << "S^" << sphere.d << " R=" << sphere.R << " sets=[";
  for (std::size_t i = 0; i < sets.size(); ++i) os << (i ? "; " : "") << sets[i].describe();
  os << "] kernels=[";
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    os << (i ? "; " : "") << kernels[i].i << "-" << kernels[i].j << ":" << kernels[i].kernel.describe();
  }
  os << "]";
  return os.str();
}

RearrangementInstance random_circle_instance(std::size_t n, std::size_t M, RngStream& rng) {
  RearrangementInstance inst;
  inst.sphere = SphereSpec(1.0, 1);
  for (std::size_t i = 0; i < n; ++i) inst.sets.push_back(aligned_arcs(inst.sphere, M, 2, rng));
  inst.kernels = random_kernels(n, rng, kTwoPi / static_cast<double>(M));
  return inst;
}

RearrangementInstance random_sphere_instance(std::size_t n, RngStream& rng) {
  RearrangementInstance inst;
  inst.sphere = SphereSpec(1.0, 2);
  const SphereSpec& s = inst.sphere;
  for (std::size_t i = 0; i < n; ++i) {
    const Point c = random_sphere_point(s, rng);
    switch (rng.below(3)) {
      case 0:
        inst.sets.push_back(SphereRegion::cap(s, {c, 0.2 + 1.2 * rng.uniform()}));
        break;
      case 1: {
        const double lo = 0.1 + 1.2 * rng.uniform();
        inst.sets.push_back(SphereRegion::band(s, c, lo, lo + 0.2 + 0.8 * rng.uniform()));
        break;
      }
      default:
        inst.sets.push_back(SphereRegion::complement(SphereRegion::cap(s, {c, 1.6 + 1.2 * rng.uniform()})));
        break;
    }
  }
  inst.kernels = random_kernels(n, rng, 0.0);
  return inst;
}

std::string ObstacleSuite::describe() const {
  std::ostringstream os;
  os << "eps=" << eps << " obstacles=[";
  for (std::size_t i = 0; i < obstacles.size(); ++i) os << (i ? "; " : "") << obstacles[i].describe();
  os << "]";
  return os.str();
}

ObstacleSuite random_obstacle_suite(std::size_t n, std::size_t M, RngStream& rng) {
  ObstacleSuite suite;
  suite.sphere = SphereSpec(1.0, 1);
  const double h = kTwoPi / static_cast<double>(M);
  for (std::size_t k = 0; k <= n; ++k) {
    if (rng.below(5) == 0) {
      suite.obstacles.push_back(SphereRegion::empty(suite.sphere));
    } else {
      suite.obstacles.push_back(aligned_arcs(suite.sphere, M, 3, rng));
    }
  }
  suite.eps = h * std::round((0.1 + 1.4 * rng.uniform()) / h);
  return suite;
}

std::vector<SphereRegion> rearranged_obstacles(const ObstacleSuite& suite) {
  std::vector<SphereRegion> out;
  const Point pole = suite.sphere.south_pole();
  for (const auto& o : suite.obstacles) out.push_back(SphereRegion::cap(suite.sphere, rearrange(o, pole)));
  return out;
}

std::string DualityInstance::describe() const {
  std::ostringstream os;
  os << "d=" << d << " n=" << n << " L=" << L << " c=" << c << " eps=" << eps << " U=[";
  for (std::size_t k = 0; k <= n; ++k) {
    os << (k ? "; " : "") << obstacles.at(k, static_cast<double>(k)).describe();
  }
  os << "]";
  return os.str();
}

DualityInstance random_duality_instance(RngStream& rng) {
  DualityInstance inst;
  inst.d = 1 + static_cast<int>(rng.below(2));
  inst.n = rng.below(4);
  inst.L = 0.5 + rng.uniform();
  inst.c = 1.0 + rng.uniform();
  inst.eps = 0.1 + 0.4 * rng.uniform();
  std::vector<ShapeSchedule::Piece> pieces;
  for (std::size_t k = 0; k <= inst.n; ++k) {
    pieces.push_back({static_cast<double>(k), random_obstacle(inst.d, inst.L, rng)});
  }
  inst.obstacles = ShapeSchedule::by_index(std::move(pieces));
  return inst;
}

}  // namespace wsl
