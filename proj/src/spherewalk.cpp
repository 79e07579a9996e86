#include "wsl/spherewalk.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "wsl/numerics.hpp"
#include "wsl/parallel.hpp"
#include "wsl/stochastic.hpp"

namespace wsl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::atomic<double> g_cap_fault{1.0};

double wrap_angle(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  return phi;
}

void push_arc(double a, double b, std::vector<std::pair<double, double>>& out) {
  if (!(b > a)) return;
  if (b - a >= kTwoPi) {
    out.emplace_back(0.0, kTwoPi);
    return;
  }
  const double wa = wrap_angle(a);
  const double wb = wa + (b - a);
  if (wb <= kTwoPi) {
    out.emplace_back(wa, wb);
  } else {
    out.emplace_back(wa, kTwoPi);
    out.emplace_back(0.0, wb - kTwoPi);
  }
}

std::vector<std::pair<double, double>> merge_arcs(std::vector<std::pair<double, double>> arcs) {
  std::sort(arcs.begin(), arcs.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& a : arcs) {
    if (!out.empty() && a.first <= out.back().second) {
      out.back().second = std::max(out.back().second, a.second);
    } else {
      out.push_back(a);
    }
  }
  return out;
}

Point uniform_direction(int k, RngStream& rng) {
  Point u(k);
  if (k == 1) {
    u[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return u;
  }
  while (true) {
    double n2 = 0.0;
    for (int i = 0; i < k; ++i) {
      u[i] = rng.normal();
      n2 += u[i] * u[i];
    }
    if (n2 > 0.0) return u * (1.0 / std::sqrt(n2));
  }
}

// Polar angle from the pole of a uniform point of a cap with half-angle
// theta_max < pi; the density is proportional to sin^{d-1}.
double sample_polar_angle(int d, double theta_max, RngStream& rng) {
  if (d == 1) return theta_max * rng.uniform();
  if (d == 2) {
    const double s = std::sin(0.5 * theta_max);
    return 2.0 * std::asin(std::sqrt(rng.uniform()) * s);
  }
  if (theta_max <= 0.5 * std::numbers::pi) {
    // Proposal theta_max U^{1/d} has density ~ theta^{d-1} >= sin^{d-1}.
    while (true) {
      const double th = theta_max * std::pow(rng.uniform_open(), 1.0 / d);
      const double accept = std::pow(std::sin(th) / th, d - 1);
      if (rng.uniform() < accept) return th;
    }
  }
  while (true) {
    // Uniform sphere point: cos(theta) is its last coordinate.
    const Point u = uniform_direction(d + 1, rng);
    const double th = std::acos(std::clamp(u[d], -1.0, 1.0));
    if (th < theta_max) return th;
  }
}

}  // namespace

// ---------------------------------------------------------------- sphere

SphereSpec::SphereSpec(double R_, int d_) : R(R_), d(d_) {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("sphere radius must be > 0");
  require_dimension(d, kMaxDim - 1);
}

double SphereSpec::total_measure() const { return unit_sphere_area(d) * std::pow(R, d); }

Point SphereSpec::south_pole() const {
  Point p(d + 1);
  p[d] = -R;
  return p;
}

Point SphereSpec::north_pole() const {
  Point p(d + 1);
  p[d] = R;
  return p;
}

Point SphereSpec::normalize(const Point& x) const {
  const double n = x.norm();
  if (n == 0.0) throw std::invalid_argument("cannot normalize the zero vector onto the sphere");
  return x * (R / n);
}

void SphereSpec::check_point(const Point& x) const {
  if (x.dim() != d + 1) throw DimensionError("sphere point has wrong dimension");
}

double geodesic_distance(const SphereSpec& s, const Point& x, const Point& y) {
  s.check_point(x);
  s.check_point(y);
  return s.R * 2.0 * std::atan2((x - y).norm(), (x + y).norm());
}

double cap_measure(const SphereSpec& s, double eps) {
  if (!(eps > 0.0) || eps > std::numbers::pi * s.R * (1.0 + 1e-15)) {
    throw std::invalid_argument("cap_measure: geodesic radius must be in (0, pi R]");
  }
  const double theta = std::min(eps / s.R, std::numbers::pi);
  return g_cap_fault.load(std::memory_order_relaxed) * unit_sphere_area(s.d - 1) *
         std::pow(s.R, s.d) * sin_power_integral(s.d - 1, theta);
}

void testing::set_cap_measure_fault(double factor) { g_cap_fault.store(factor); }

double cap_radius_for_measure(const SphereSpec& s, double measure) {
  if (!(measure > 0.0)) return 0.0;
  const double total = s.total_measure();
  if (measure >= total) return std::numbers::pi * s.R;
  double lo = 0.0, hi = std::numbers::pi * s.R;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * s.R; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    if (cap_measure(s, mid) < measure) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

PoleRotation::PoleRotation(const Point& center) {
  const int n = center.dim();
  const double len = center.norm();
  if (len == 0.0) throw std::invalid_argument("PoleRotation: zero center");
  Point e(n);
  e[n - 1] = 1.0;
  v_ = e - center * (1.0 / len);
  vv_ = v_.squared_norm();
}

Point PoleRotation::apply(const Point& y) const {
  if (vv_ < 1e-30) return y;
  // Reflect the first coordinate (fixes the pole), then the Householder
  // reflection swapping pole and center; the composition has det +1.
  Point z = y;
  z[0] = -z[0];
  return z - v_ * (2.0 * v_.dot(z) / vv_);
}

Point sample_uniform_sphere(const SphereSpec& s, RngStream& rng) {
  return uniform_direction(s.d + 1, rng) * s.R;
}

Point sample_uniform_cap(const SphereSpec& s, const CapSpec& cap, RngStream& rng) {
  s.check_point(cap.center);
  if (!(cap.radius > 0.0)) throw std::invalid_argument("sample_uniform_cap: radius must be > 0");
  const double theta_max = cap.radius / s.R;
  if (theta_max >= std::numbers::pi) return sample_uniform_sphere(s, rng);
  const PoleRotation rot(cap.center);
  while (true) {
    const double th = sample_polar_angle(s.d, theta_max, rng);
    const Point u = uniform_direction(s.d, rng);
    Point y(s.d + 1);
    const double st = std::sin(th);
    for (int i = 0; i < s.d; ++i) y[i] = s.R * st * u[i];
    y[s.d] = s.R * std::cos(th);
    Point x = s.normalize(rot.apply(y));
    if (geodesic_distance(s, x, cap.center) < cap.radius) return x;
  }
}

std::vector<Point> sphere_walk(const SphereSpec& s, double eps, const std::optional<Point>& start,
                               std::size_t steps, RngStream& rng) {
  std::vector<Point> out;
  out.reserve(steps + 1);
  if (start) {
    s.check_point(*start);
    out.push_back(s.normalize(*start));
  } else {
    out.push_back(sample_uniform_sphere(s, rng));
  }
  for (std::size_t k = 0; k < steps; ++k) out.push_back(sample_uniform_cap(s, {out.back(), eps}, rng));
  return out;
}

Point project(const Point& x) {
  if (x.dim() < 2) throw DimensionError("project: need a sphere point in R^{d+1}, d >= 1");
  Point p(x.dim() - 1);
  for (int i = 0; i < p.dim(); ++i) p[i] = x[i];
  return p;
}

Point lift(const Point& x, const SphereSpec& s) {
  if (x.dim() != s.d) throw DimensionError("lift: planar point dimension must equal d");
  const double n2 = x.squared_norm();
  if (!(n2 < s.R * s.R)) throw std::invalid_argument("lift: point must satisfy |x| < R");
  Point y(s.d + 1);
  for (int i = 0; i < s.d; ++i) y[i] = x[i];
  y[s.d] = -std::sqrt(s.R * s.R - n2);
  return y;
}

double circle_angle(const Point& x, const SphereSpec& s) {
  if (s.d != 1) throw DimensionError("circle chart requires d = 1");
  return wrap_angle(std::atan2(x[0], -x[1]));
}

Point circle_point(double phi, const SphereSpec& s) {
  if (s.d != 1) throw DimensionError("circle chart requires d = 1");
  return Point{s.R * std::sin(phi), -s.R * std::cos(phi)};
}

// ---------------------------------------------------------------- regions

struct SphereRegion::Node {
  Kind kind = Kind::Empty;
  SphereSpec sphere;
  CapSpec cap;        // Cap; Band uses center as its pole
  double lo = 0.0;    // Band
  double hi = 0.0;    // Band
  std::vector<SphereRegion> parts;  // Union; Complement uses parts[0]
  std::optional<Shape> planar;      // Lifted
};

SphereRegion SphereRegion::empty(const SphereSpec& s) {
  auto n = std::make_shared<Node>();
  n->sphere = s;
  return SphereRegion(std::move(n));
}

SphereRegion SphereRegion::whole(const SphereSpec& s) { return complement(empty(s)); }

SphereRegion SphereRegion::cap(const SphereSpec& s, const CapSpec& c) {
  s.check_point(c.center);
  if (!(c.radius >= 0.0)) throw std::invalid_argument("cap radius must be >= 0");
  if (c.radius == 0.0) return empty(s);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Cap;
  n->sphere = s;
  n->cap = {s.normalize(c.center), std::min(c.radius, std::numbers::pi * s.R)};
  return SphereRegion(std::move(n));
}

SphereRegion SphereRegion::band(const SphereSpec& s, const Point& pole, double lo, double hi) {
  s.check_point(pole);
  if (!(lo >= 0.0 && lo <= hi)) throw std::invalid_argument("band requires 0 <= lo <= hi");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Band;
  n->sphere = s;
  n->cap = {s.normalize(pole), 0.0};
  n->lo = lo;
  n->hi = std::min(hi, std::numbers::pi * s.R);
  return SphereRegion(std::move(n));
}

SphereRegion SphereRegion::complement(const SphereRegion& inner) {
  if (inner.kind() == Kind::Complement) return inner.node_->parts.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Complement;
  n->sphere = inner.sphere();
  n->parts = {inner};
  return SphereRegion(std::move(n));
}

SphereRegion SphereRegion::union_of(std::vector<SphereRegion> parts) {
  if (parts.empty()) throw std::invalid_argument("union of zero regions");
  const SphereSpec s = parts.front().sphere();
  std::vector<SphereRegion> flat;
  for (auto& p : parts) {
    if (p.sphere().R != s.R || p.sphere().d != s.d) throw std::invalid_argument("union regions on different spheres");
    if (p.kind() == Kind::Union) {
      for (const auto& q : p.node_->parts) flat.push_back(q);
    } else if (p.kind() != Kind::Empty) {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return empty(s);
  if (flat.size() == 1) return flat.front();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Union;
  n->sphere = s;
  n->parts = std::move(flat);
  return SphereRegion(std::move(n));
}

SphereRegion SphereRegion::lifted(const SphereSpec& s, const Shape& planar) {
  if (planar.dim() != s.d) throw DimensionError("lifted shape dimension must equal d");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Lifted;
  n->sphere = s;
  n->planar = planar;
  return SphereRegion(std::move(n));
}

SphereRegion::Kind SphereRegion::kind() const { return node_->kind; }
const SphereSpec& SphereRegion::sphere() const { return node_->sphere; }

const CapSpec& SphereRegion::cap_spec() const {
  if (kind() != Kind::Cap) throw std::logic_error("cap_spec on a non-cap region");
  return node_->cap;
}

bool SphereRegion::contains(const Point& x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Empty:
      return false;
    case Kind::Cap:
      return geodesic_distance(n.sphere, x, n.cap.center) < n.cap.radius;
    case Kind::Band: {
      const double r = geodesic_distance(n.sphere, x, n.cap.center);
      return r >= n.lo && r < n.hi;
    }
    case Kind::Complement:
      return !n.parts.front().contains(x);
    case Kind::Union:
      for (const auto& p : n.parts) {
        if (p.contains(x)) return true;
      }
      return false;
    case Kind::Lifted:
      return x[n.sphere.d] < 0.0 && n.planar->contains(project(x));
  }
  return false;
}

std::vector<std::pair<double, double>> SphereRegion::arcs() const {
  const Node& n = *node_;
  const SphereSpec& s = n.sphere;
  if (s.d != 1) throw DimensionError("arcs() requires the circle (d = 1)");
  std::vector<std::pair<double, double>> out;
  switch (n.kind) {
    case Kind::Empty:
      return {};
    case Kind::Cap: {
      const double c = circle_angle(n.cap.center, s);
      const double w = n.cap.radius / s.R;
      push_arc(c - w, c + w, out);
      break;
    }
    case Kind::Band: {
      const double c = circle_angle(n.cap.center, s);
      const double a = n.lo / s.R, b = n.hi / s.R;
      if (b >= std::numbers::pi && a == 0.0) {
        push_arc(0.0, kTwoPi, out);
      } else {
        push_arc(c + a, c + b, out);
        push_arc(c - b, c - a, out);
      }
      break;
    }
    case Kind::Complement: {
      double prev = 0.0;
      for (const auto& [a, b] : n.parts.front().arcs()) {
        if (a > prev) out.emplace_back(prev, a);
        prev = std::max(prev, b);
      }
      if (prev < kTwoPi) out.emplace_back(prev, kTwoPi);
      return out;
    }
    case Kind::Union:
      for (const auto& p : n.parts) {
        for (const auto& a : p.arcs()) out.push_back(a);
      }
      break;
    case Kind::Lifted:
      for (auto [a, b] : intervals_1d(*n.planar)) {
        a = std::max(a, -s.R);
        b = std::min(b, s.R);
        if (b > a) push_arc(std::asin(a / s.R), std::asin(b / s.R), out);
      }
      break;
  }
  return merge_arcs(std::move(out));
}

VolumeValue SphereRegion::measure(const VolumeOptions& opts) const {
  const Node& n = *node_;
  const SphereSpec& s = n.sphere;
  switch (n.kind) {
    case Kind::Empty:
      return {0.0, true, 0.0};
    case Kind::Cap:
      return {cap_measure(s, n.cap.radius), true, 0.0};
    case Kind::Band: {
      const double upper = n.hi > 0.0 ? cap_measure(s, n.hi) : 0.0;
      const double lower = n.lo > 0.0 ? cap_measure(s, n.lo) : 0.0;
      return {std::max(0.0, upper - lower), true, 0.0};
    }
    case Kind::Complement: {
      const VolumeValue in = n.parts.front().measure(opts);
      return {std::max(0.0, s.total_measure() - in.value), in.exact, in.std_error};
    }
    default:
      break;
  }
  if (s.d == 1) {
    double len = 0.0;
    for (const auto& [a, b] : arcs()) len += b - a;
    return {len * s.R, true, 0.0};
  }
  if (n.kind == Kind::Union) {
    bool disjoint_caps = std::all_of(n.parts.begin(), n.parts.end(),
                                     [](const SphereRegion& p) { return p.kind() == Kind::Cap; });
    for (std::size_t i = 0; disjoint_caps && i < n.parts.size(); ++i) {
      for (std::size_t j = i + 1; j < n.parts.size(); ++j) {
        const CapSpec& a = n.parts[i].cap_spec();
        const CapSpec& b = n.parts[j].cap_spec();
        if (geodesic_distance(s, a.center, b.center) < a.radius + b.radius) disjoint_caps = false;
      }
    }
    if (disjoint_caps) {
      double m = 0.0;
      for (const auto& p : n.parts) m += p.measure(opts).value;
      return {m, true, 0.0};
    }
  }
  if (n.kind == Kind::Lifted && n.planar->kind() == ShapeKind::Ball &&
      n.planar->center().norm() == 0.0) {
    const double r = n.planar->radius();
    if (r >= s.R) return {0.5 * s.total_measure(), true, 0.0};
    return {lifted_ball_measure(s, r), true, 0.0};
  }
  // Uniform points on the sphere.
  RngStream rng(opts.seed, 1);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < opts.mc_samples; ++k) {
    if (contains(sample_uniform_sphere(s, rng))) ++hits;
  }
  const double N = static_cast<double>(opts.mc_samples);
  const double p = static_cast<double>(hits) / N;
  const double total = s.total_measure();
  return {total * p, false, total * std::sqrt(std::max(p * (1.0 - p), 1.0 / N) / N)};
}

std::string SphereRegion::describe() const {
  const Node& n = *node_;
  std::ostringstream os;
  switch (n.kind) {
    case Kind::Empty:
      os << "empty";
      break;
    case Kind::Cap:
      os << "cap(r=" << n.cap.radius << ")";
      break;
    case Kind::Band:
      os << "band(" << n.lo << "," << n.hi << ")";
      break;
    case Kind::Complement:
      os << "not(" << n.parts.front().describe() << ")";
      break;
    case Kind::Union:
      os << "union(";
      for (std::size_t i = 0; i < n.parts.size(); ++i) os << (i ? ";" : "") << n.parts[i].describe();
      os << ")";
      break;
    case Kind::Lifted:
      os << "lift(" << n.planar->describe() << ")";
      break;
  }
  return os.str();
}

Point sample_uniform_region(const SphereRegion& r, RngStream& rng) {
  const SphereSpec& s = r.sphere();
  if (r.kind() == SphereRegion::Kind::Cap) return sample_uniform_cap(s, r.cap_spec(), rng);
  for (std::size_t attempt = 0; attempt < 100'000'000; ++attempt) {
    const Point x = sample_uniform_sphere(s, rng);
    if (r.contains(x)) return x;
  }
  throw std::runtime_error("sample_uniform_region: region has (numerically) zero measure");
}

CapSpec rearrange(const SphereRegion& region, const Point& pole, const VolumeOptions& opts) {
  const SphereSpec& s = region.sphere();
  s.check_point(pole);
  if (region.kind() == SphereRegion::Kind::Cap &&
      geodesic_distance(s, region.cap_spec().center, pole) <= 1e-12 * s.R) {
    return region.cap_spec();
  }
  const double mu = region.measure(opts).value;
  return {s.normalize(pole), cap_radius_for_measure(s, mu)};
}

// ---------------------------------------------------------------- survival

ProbabilityEstimate survival_probability(const SphereSpec& s,
                                         const std::vector<SphereRegion>& obstacles, double eps,
                                         std::size_t replicates, std::uint64_t seed,
                                         unsigned workers) {
  if (obstacles.empty()) throw std::invalid_argument("survival_probability: need obstacles for k = 0..n");
  if (replicates == 0) throw InsufficientReplicates("survival_probability: replicates must be > 0");
  const auto alive = parallel_map(replicates, workers, [&](std::size_t r) {
    RngStream rng(seed, r);
    Point x = sample_uniform_sphere(s, rng);
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      if (k > 0) x = sample_uniform_cap(s, {x, eps}, rng);
      if (obstacles[k].contains(x)) return 0.0;
    }
    return 1.0;
  });
  const SampleSummary sum = summarize(alive);
  return {sum.mean, sum.stderr_of_mean(), sum.n};
}

namespace {

std::vector<double> cell_indicator(const SphereRegion& r, std::size_t M) {
  const SphereSpec& s = r.sphere();
  const double h = kTwoPi / static_cast<double>(M);
  std::vector<double> a(M);
  for (std::size_t i = 0; i < M; ++i) {
    a[i] = r.contains(circle_point((static_cast<double>(i) + 0.5) * h, s)) ? 1.0 : 0.0;
  }
  return a;
}

void require_circle_grid(const SphereSpec& s, std::size_t M) {
  if (s.d != 1) throw DimensionError("circle quadrature requires d = 1");
  if (M < 8 || (M & (M - 1)) != 0) throw std::invalid_argument("quadrature resolution must be a power of two >= 8");
}

}  // namespace

double circle_survival_quadrature(const SphereSpec& s, const std::vector<SphereRegion>& obstacles,
                                  double eps, std::size_t M) {
  require_circle_grid(s, M);
  if (obstacles.empty()) throw std::invalid_argument("circle_survival_quadrature: need obstacles");
  const double h = kTwoPi / static_cast<double>(M);
  // Offsets q with q h R < eps (cell-center distance).
  const auto half = static_cast<std::size_t>(std::max(0.0, std::ceil(eps / (h * s.R) - 1e-9) - 1.0));
  const bool global = 2 * half + 1 >= M;
  const double width = global ? static_cast<double>(M) : static_cast<double>(2 * half + 1);

  std::vector<double> p = cell_indicator(obstacles[0], M);
  for (auto& v : p) v = (1.0 - v) / static_cast<double>(M);
  std::vector<double> prefix(M + 1), next(M);
  for (std::size_t k = 1; k < obstacles.size(); ++k) {
    const std::vector<double> blocked = cell_indicator(obstacles[k], M);
    prefix[0] = 0.0;
    for (std::size_t i = 0; i < M; ++i) prefix[i + 1] = prefix[i] + p[i];
    const double total = prefix[M];
    for (std::size_t j = 0; j < M; ++j) {
      double mass;
      if (global) {
        mass = total;
      } else {
        // Circular window [j - half, j + half].
        const auto lo = static_cast<long>(j) - static_cast<long>(half);
        const auto hi = static_cast<long>(j) + static_cast<long>(half);
        const auto m = static_cast<long>(M);
        auto range = [&](long a, long b) { return prefix[static_cast<std::size_t>(b + 1)] - prefix[static_cast<std::size_t>(a)]; };
        if (lo < 0) {
          mass = range(0, hi) + range(lo + m, m - 1);
        } else if (hi >= m) {
          mass = range(lo, m - 1) + range(0, hi - m);
        } else {
          mass = range(lo, hi);
        }
      }
      next[j] = blocked[j] > 0.0 ? 0.0 : mass / width;
    }
    p.swap(next);
  }
  double out = 0.0;
  for (double v : p) out += v;
  return out;
}

// ---------------------------------------------------------------- kernels

DistanceKernel DistanceKernel::indicator(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("indicator kernel needs eps > 0");
  return {Kind::Indicator, eps};
}

DistanceKernel DistanceKernel::exponential(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("exp kernel needs scale > 0 (otherwise not nonincreasing)");
  return {Kind::Exponential, scale};
}

DistanceKernel DistanceKernel::power(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("power kernel needs p > 0 (otherwise not nonincreasing)");
  return {Kind::Power, p};
}

DistanceKernel DistanceKernel::parse(const std::string& spec) {
  if (spec == "one") return one();
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("kernel spec '" + spec + "' needs name:value");
  const std::string name = spec.substr(0, colon);
  double v = 0.0;
  try {
    v = std::stod(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("kernel spec '" + spec + "': bad number");
  }
  if (name == "indicator") return indicator(v);
  if (name == "exp") return exponential(v);
  if (name == "power") return power(v);
  throw std::invalid_argument("unknown kernel '" + name + "' (expected indicator, exp, power, one)");
}

double DistanceKernel::operator()(double rho) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::Indicator:
      return rho < param ? 1.0 : 0.0;
    case Kind::Exponential:
      return std::exp(-rho / param);
    case Kind::Power:
      return std::pow(1.0 + rho, -param);
  }
  return 1.0;
}

std::string DistanceKernel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::One:
      return "one";
    case Kind::Indicator:
      os << "indicator:" << param;
      break;
    case Kind::Exponential:
      os << "exp:" << param;
      break;
    case Kind::Power:
      os << "power:" << param;
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------- Theorem-type check

namespace {

using KernelMatrix = std::vector<std::vector<DistanceKernel>>;

KernelMatrix kernel_matrix(std::size_t n, const std::vector<KernelEntry>& kernels) {
  KernelMatrix k(n, std::vector<DistanceKernel>(n));
  for (const auto& e : kernels) {
    if (e.i >= n || e.j >= n || e.i == e.j) throw std::invalid_argument("kernel entry indices out of range");
    k[e.i][e.j] = e.kernel;
    k[e.j][e.i] = e.kernel;
  }
  return k;
}

// Kernel tabulated on circular cell offsets: table[q] = psi(R h min(q, M-q)).
std::vector<double> offset_table(const DistanceKernel& k, const SphereSpec& s, std::size_t M) {
  const double h = kTwoPi / static_cast<double>(M);
  std::vector<double> t(M);
  for (std::size_t q = 0; q < M; ++q) t[q] = k(s.R * h * static_cast<double>(std::min(q, M - q)));
  return t;
}

std::mutex g_fftw_plan_mutex;

// sum over x1..xn of prod a_i(x_i) prod psi_ij(x_i - x_j), unweighted.
double circle_integral(const std::vector<std::vector<double>>& a, const KernelMatrix& km,
                       const SphereSpec& s, std::size_t M) {
  const std::size_t n = a.size();
  std::vector<std::vector<std::vector<double>>> tab(n, std::vector<std::vector<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) tab[i][j] = offset_table(km[i][j], s, M);
    }
  }
  auto diff = [M](std::size_t x, std::size_t y) { return (x + M - y) % M; };
  std::vector<std::vector<std::size_t>> support(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t x = 0; x < M; ++x) {
      if (a[i][x] != 0.0) support[i].push_back(x);
    }
    if (support[i].empty()) return 0.0;
  }
  if (n == 1) return static_cast<double>(support[0].size());
  if (n == 2) {
    double sum = 0.0;
    for (auto x : support[0]) {
      for (auto y : support[1]) sum += tab[0][1][diff(x, y)];
    }
    return sum;
  }
  if (n == 3) {
    // For each x0: sum_x1 a1 psi01(x0-x1) * (psi12 * g)(x1), g(x2) = a2 psi02(x0-x2).
    const std::size_t F = M / 2 + 1;
    std::vector<double> buf(M);
    std::vector<std::complex<double>> spec(F), kspec(F);
    fftw_plan fwd, bwd;
    {
      std::lock_guard lock(g_fftw_plan_mutex);
      fwd = fftw_plan_dft_r2c_1d(static_cast<int>(M), buf.data(), reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_1d(static_cast<int>(M), reinterpret_cast<fftw_complex*>(spec.data()), buf.data(), FFTW_ESTIMATE);
    }
    buf = tab[1][2];
    fftw_execute_dft_r2c(fwd, buf.data(), reinterpret_cast<fftw_complex*>(kspec.data()));
    double sum = 0.0;
    for (auto x0 : support[0]) {
      std::fill(buf.begin(), buf.end(), 0.0);
      for (auto x2 : support[2]) buf[x2] = tab[0][2][diff(x0, x2)];
      fftw_execute_dft_r2c(fwd, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()));
      for (std::size_t f = 0; f < F; ++f) spec[f] *= kspec[f];
      fftw_execute_dft_c2r(bwd, reinterpret_cast<fftw_complex*>(spec.data()), buf.data());
      double inner = 0.0;
      for (auto x1 : support[1]) inner += tab[0][1][diff(x0, x1)] * buf[x1];
      sum += inner / static_cast<double>(M);
    }
    {
      std::lock_guard lock(g_fftw_plan_mutex);
      fftw_destroy_plan(fwd);
      fftw_destroy_plan(bwd);
    }
    return sum;
  }
  if (n == 4) {
    double sum = 0.0;
    for (auto x0 : support[0]) {
      for (auto x1 : support[1]) {
        const double w01 = tab[0][1][diff(x0, x1)];
        if (w01 == 0.0) continue;
        for (auto x2 : support[2]) {
          const double w = w01 * tab[0][2][diff(x0, x2)] * tab[1][2][diff(x1, x2)];
          if (w == 0.0) continue;
          double inner = 0.0;
          for (auto x3 : support[3]) {
            inner += tab[0][3][diff(x0, x3)] * tab[1][3][diff(x1, x3)] * tab[2][3][diff(x2, x3)];
          }
          sum += w * inner;
        }
      }
    }
    return sum;
  }
  throw std::invalid_argument("circle quadrature supports n <= 4 sets");
}

}  // namespace

RearrangementCheck rearrangement_quadrature(const SphereSpec& s,
                                            const std::vector<SphereRegion>& sets,
                                            const std::vector<KernelEntry>& kernels,
                                            const Point& pole, std::size_t M) {
  require_circle_grid(s, M);
  const std::size_t n = sets.size();
  if (n == 0 || n > 4) throw std::invalid_argument("rearrangement_quadrature: need 1..4 sets");
  const KernelMatrix km = kernel_matrix(n, kernels);
  std::vector<std::vector<double>> a, b;
  for (const auto& r : sets) {
    a.push_back(cell_indicator(r, M));
    b.push_back(cell_indicator(SphereRegion::cap(s, rearrange(r, pole)), M));
  }
  const double w = std::pow(s.R * kTwoPi / static_cast<double>(M), static_cast<double>(n));
  RearrangementCheck out;
  out.lhs = w * circle_integral(a, km, s, M);
  out.rhs = w * circle_integral(b, km, s, M);
  out.margin = out.rhs - out.lhs;
  return out;
}

RearrangementCheck rearrangement_monte_carlo(const SphereSpec& s,
                                             const std::vector<SphereRegion>& sets,
                                             const std::vector<KernelEntry>& kernels,
                                             const Point& pole, std::size_t samples,
                                             RngStream& rng) {
  const std::size_t n = sets.size();
  if (n == 0 || n > 6) throw std::invalid_argument("rearrangement_monte_carlo: need 1..6 sets");
  if (samples < 2) throw InsufficientReplicates("rearrangement_monte_carlo: need >= 2 samples");
  const KernelMatrix km = kernel_matrix(n, kernels);
  std::vector<SphereRegion> stars;
  for (const auto& r : sets) stars.push_back(SphereRegion::cap(s, rearrange(r, pole)));

  auto side = [&](const std::vector<SphereRegion>& regions, RngStream& g) -> std::pair<double, double> {
    double mass = 1.0;
    for (const auto& r : regions) mass *= r.measure().value;
    if (mass == 0.0) return {0.0, 0.0};
    RunningStats st;
    std::vector<Point> x(n);
    for (std::size_t k = 0; k < samples; ++k) {
      for (std::size_t i = 0; i < n; ++i) x[i] = sample_uniform_region(regions[i], g);
      double prod = 1.0;
      for (std::size_t i = 0; i < n && prod != 0.0; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (km[i][j].kind == DistanceKernel::Kind::One) continue;
          prod *= km[i][j](geodesic_distance(s, x[i], x[j]));
        }
      }
      st.push(prod);
    }
    const SampleSummary sum = st.summary();
    return {mass * sum.mean, mass * sum.stderr_of_mean()};
  };
  RngStream gl = rng.child(1), gr = rng.child(2);
  const auto [lhs, se_l] = side(sets, gl);
  const auto [rhs, se_r] = side(stars, gr);
  rng = rng.child(3);
  return {lhs, rhs, rhs - lhs, std::sqrt(se_l * se_l + se_r * se_r)};
}

// ---------------------------------------------------------------- projection

double lifted_ball_measure(const SphereSpec& s, double r) {
  if (!(r >= 0.0 && r < s.R)) throw std::invalid_argument("lifted ball radius must be in [0, R)");
  if (r == 0.0) return 0.0;
  return unit_ball_volume(s.d) * std::pow(r, s.d) + lifted_ball_measure_gap(s, r);
}

double lifted_ball_measure_gap(const SphereSpec& s, double r) {
  if (!(r >= 0.0 && r < s.R)) throw std::invalid_argument("lifted ball radius must be in [0, R)");
  if (r == 0.0) return 0.0;
  const double R = s.R;
  const int d = s.d;
  // 1/cos(alpha) - 1 = rho^2 / (sqrt(R^2 - rho^2) (R + sqrt(R^2 - rho^2))), cancellation-free.
  auto f = [R, d](double rho) {
    const double c = std::sqrt((R - rho) * (R + rho));
    return std::pow(rho, d - 1) * rho * rho / (c * (R + c));
  };
  return unit_sphere_area(d - 1) * integrate(f, 0.0, r, 1e-12);
}

Lemma41Result lemma41_check(const SphereSpec& s, double K, double r, double delta, RngStream& rng,
                            std::size_t centers, std::size_t points_per_center) {
  if (!(K >= 0.0 && r > 0.0 && delta >= 0.0)) throw std::invalid_argument("lemma41_check: need K >= 0, r > 0, delta >= 0");
  if (!(K + r + delta < s.R)) throw std::invalid_argument("lemma41_check: need K + r + delta < R");
  Lemma41Result out;
  const int d = s.d;
  for (std::size_t c = 0; c < centers; ++c) {
    const Point x = K > 0.0 ? sample_uniform_ball(d, K, rng) : Point(d);
    const Point xs = lift(x, s);
    for (std::size_t k = 0; k < points_per_center; ++k) {
      const Point u = uniform_direction(d, rng);
      const double jitter = 1e-3 * rng.uniform_open();
      ++out.points_tested;
      if (k % 2 == 0) {
        // Just inside B(x, r - delta): must be the projection of a cap point.
        const double rad = (r - delta) * (1.0 - jitter);
        if (rad <= 0.0) continue;
        const Point y = x + rad * u;
        if (!(y.squared_norm() < s.R * s.R) || !(geodesic_distance(s, xs, lift(y, s)) < r)) ++out.inner_violations;
      } else {
        // Just outside B(x, r + delta): no cap point may project here.
        const Point y = x + (r + delta) * (1.0 + jitter) * u;
        if (y.squared_norm() < s.R * s.R) {
          Point lower = lift(y, s);
          Point upper = lower;
          upper[d] = -upper[d];
          if (geodesic_distance(s, xs, lower) < r || geodesic_distance(s, xs, upper) < r) ++out.outer_violations;
        }
      }
    }
  }
  out.inclusion_holds = out.inner_violations == 0 && out.outer_violations == 0;
  out.measure_gap = lifted_ball_measure_gap(s, r);
  return out;
}

}  // namespace wsl
