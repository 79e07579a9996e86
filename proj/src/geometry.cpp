#include "wsl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "wsl/rng.hpp"

namespace wsl {

namespace {

struct DyadicHash {
  std::size_t operator()(const DyadicIndex& k) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto v : k) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

// Absolute tolerance of the ray-search depth estimate for unions.
constexpr double kDepthTolerance = 1e-9;

Point corner_of(const Point& lo, const Point& hi, unsigned mask) {
  Point c = lo;
  for (int i = 0; i < lo.dim(); ++i) {
    if (mask & (1u << i)) c[i] = hi[i];
  }
  return c;
}

double box_depth(const Point& lo, const Point& hi, const Point& z) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < z.dim(); ++i) m = std::min({m, z[i] - lo[i], hi[i] - z[i]});
  return std::max(0.0, m);
}

double box_distance(const Point& lo, const Point& hi, const Point& z) {
  double s = 0.0;
  for (int i = 0; i < z.dim(); ++i) {
    const double e = std::max({lo[i] - z[i], 0.0, z[i] - hi[i]});
    s += e * e;
  }
  return std::sqrt(s);
}

bool box_contains(const Point& lo, const Point& hi, const Point& z) {
  for (int i = 0; i < z.dim(); ++i) {
    if (!(z[i] > lo[i] && z[i] < hi[i])) return false;
  }
  return true;
}

// Direction set for the union depth search.
std::vector<Point> probe_directions(int d) {
  std::vector<Point> dirs;
  if (d == 1) {
    dirs.push_back(Point{1.0});
    dirs.push_back(Point{-1.0});
  } else if (d == 2) {
    constexpr int kCount = 64;
    for (int k = 0; k < kCount; ++k) {
      const double a = 2.0 * std::numbers::pi * k / kCount;
      dirs.push_back(Point{std::cos(a), std::sin(a)});
    }
  } else if (d == 3) {
    constexpr int kCount = 128;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < kCount; ++k) {
      const double y = 1.0 - 2.0 * (k + 0.5) / kCount;
      const double r = std::sqrt(1.0 - y * y);
      dirs.push_back(Point{r * std::cos(golden * k), y, r * std::sin(golden * k)});
    }
  } else {
    for (int i = 0; i < d; ++i) {
      for (double s : {1.0, -1.0}) {
        Point e(d);
        e[i] = s;
        dirs.push_back(e);
      }
      for (int j = i + 1; j < d; ++j) {
        for (double si : {1.0, -1.0}) {
          for (double sj : {1.0, -1.0}) {
            Point e(d);
            e[i] = si / std::numbers::sqrt2;
            e[j] = sj / std::numbers::sqrt2;
            dirs.push_back(e);
          }
        }
      }
    }
  }
  return dirs;
}

// Distance along direction u from an interior point z to the first point
// outside s. Sphere-traces with a certified inner radius, then bisects.
double ray_exit(const Shape& s, const Point& z, const Point& u,
                const std::function<double(const Point&)>& inner_radius, double t_max) {
  double t_in = 0.0;
  double t = 0.0;
  for (int it = 0; it < 200000; ++it) {
    const Point p = z + t * u;
    if (!s.contains(p)) break;
    t_in = t;
    t += std::max(inner_radius(p), kDepthTolerance);
    if (t > t_max) return t_max;
  }
  double a = t_in;
  double b = t;
  while (b - a > kDepthTolerance) {
    const double m = 0.5 * (a + b);
    if (s.contains(z + m * u)) {
      a = m;
    } else {
      b = m;
    }
  }
  return b;
}

}  // namespace

double Bounds::volume() const {
  if (empty) return 0.0;
  double v = 1.0;
  for (int i = 0; i < lo.dim(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

struct Shape::Node {
  ShapeKind kind = ShapeKind::Empty;
  int dim = 0;
  Point a;         // ball center, box lo, translate offset
  Point b;         // box hi
  double r = 0.0;  // ball radius, erosion/enlargement margin
  std::vector<Shape> parts;  // union parts; parts[0] is the inner shape otherwise
  int depth = 0;
  std::vector<DyadicIndex> cubes;
  std::unordered_set<DyadicIndex, DyadicHash> cube_set;
};

// ---------------------------------------------------------------- factories

Shape Shape::empty(int dim) {
  require_dimension(dim);
  auto n = std::make_shared<Node>();
  n->kind = ShapeKind::Empty;
  n->dim = dim;
  return Shape(std::move(n));
}

Shape Shape::ball(const Point& center, double radius) {
  require_dimension(center.dim());
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("ball radius must be finite and >= 0");
  }
  auto n = std::make_shared<Node>();
  n->kind = ShapeKind::Ball;
  n->dim = center.dim();
  n->a = center;
  n->r = radius;
  return Shape(std::move(n));
}

Shape Shape::box(const Point& lo, const Point& hi) {
  lo.check_same(hi);
  require_dimension(lo.dim());
  for (int i = 0; i < lo.dim(); ++i) {
    if (!(lo[i] < hi[i])) throw std::invalid_argument("box requires min < max coordinatewise");
  }
  auto n = std::make_shared<Node>();
  n->kind = ShapeKind::Box;
  n->dim = lo.dim();
  n->a = lo;
  n->b = hi;
  return Shape(std::move(n));
}

Shape Shape::union_of(std::vector<Shape> parts) {
  if (parts.empty()) throw std::invalid_argument("union of zero shapes has no dimension");
  const int dim = parts.front().dim();
  std::vector<Shape> flat;
  for (auto& p : parts) {
    if (p.dim() != dim) throw DimensionError("union parts have mixed dimensions");
    if (p.kind() == ShapeKind::Union) {
      for (const auto& q : p.parts()) flat.push_back(q);
    } else if (!p.is_empty()) {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return empty(dim);
  if (flat.size() == 1) return flat.front();
  auto n = std::make_shared<Node>();
  n->kind = ShapeKind::Union;
  n->dim = dim;
  n->parts = std::move(flat);
  return Shape(std::move(n));
}

Shape Shape::translated(const Shape& inner, const Point& offset) {
  if (offset.dim() != inner.dim()) throw DimensionError("translate offset dimension mismatch");
  switch (inner.kind()) {
    case ShapeKind::Empty:
      return inner;
    case ShapeKind::Ball:
      return ball(inner.center() + offset, inner.radius());
    case ShapeKind::Box:
      return box(inner.lo() + offset, inner.hi() + offset);
    case ShapeKind::Union: {
      std::vector<Shape> moved;
      for (const auto& p : inner.parts()) moved.push_back(translated(p, offset));
      return union_of(std::move(moved));
    }
    case ShapeKind::Translate:
      return translated(inner.inner(), inner.offset() + offset);
    default:
      break;
  }
  auto n = std::make_shared<Node>();
  n->kind = ShapeKind::Translate;
  n->dim = inner.dim();
  n->a = offset;
  n->parts = {inner};
  return Shape(std::move(n));
}

Shape Shape::dyadic(int dim, int depth, std::vector<DyadicIndex> cubes) {
  require_dimension(dim);
  if (depth < 0 || depth > 40) throw std::invalid_argument("dyadic depth must be in 0..40");
  auto n = std::make_shared<Node>();
  n->kind = ShapeKind::Dyadic;
  n->dim = dim;
  n->depth = depth;
  for (auto& c : cubes) {
    for (int i = dim; i < kMaxDim; ++i) c[static_cast<std::size_t>(i)] = 0;
    if (!n->cube_set.insert(c).second) throw std::invalid_argument("dyadic cubes must be distinct");
  }
  std::sort(cubes.begin(), cubes.end());
  n->cubes = std::move(cubes);
  if (n->cubes.empty()) return empty(dim);
  return Shape(std::move(n));
}

// ---------------------------------------------------------------- accessors

int Shape::dim() const { return node().dim; }
ShapeKind Shape::kind() const { return node().kind; }

bool Shape::is_empty() const {
  return kind() == ShapeKind::Empty || (kind() == ShapeKind::Ball && node().r == 0.0);
}

namespace {
[[noreturn]] void wrong_kind(const char* what) {
  throw std::logic_error(std::string("shape accessor on wrong kind: ") + what);
}
}  // namespace

const Point& Shape::center() const {
  if (kind() != ShapeKind::Ball) wrong_kind("center");
  return node().a;
}
double Shape::radius() const {
  if (kind() != ShapeKind::Ball) wrong_kind("radius");
  return node().r;
}
const Point& Shape::lo() const {
  if (kind() != ShapeKind::Box) wrong_kind("lo");
  return node().a;
}
const Point& Shape::hi() const {
  if (kind() != ShapeKind::Box) wrong_kind("hi");
  return node().b;
}
const std::vector<Shape>& Shape::parts() const {
  if (kind() != ShapeKind::Union) wrong_kind("parts");
  return node().parts;
}
const Shape& Shape::inner() const {
  const auto k = kind();
  if (k != ShapeKind::Translate && k != ShapeKind::Eroded && k != ShapeKind::Enlarged) {
    wrong_kind("inner");
  }
  return node().parts.front();
}
const Point& Shape::offset() const {
  if (kind() != ShapeKind::Translate) wrong_kind("offset");
  return node().a;
}
double Shape::margin() const {
  if (kind() != ShapeKind::Eroded && kind() != ShapeKind::Enlarged) wrong_kind("margin");
  return node().r;
}
int Shape::dyadic_depth() const {
  if (kind() != ShapeKind::Dyadic) wrong_kind("dyadic_depth");
  return node().depth;
}
const std::vector<DyadicIndex>& Shape::cubes() const {
  if (kind() != ShapeKind::Dyadic) wrong_kind("cubes");
  return node().cubes;
}

// ---------------------------------------------------------------- membership

namespace {

DyadicIndex cell_of(const Point& z, int depth) {
  DyadicIndex k{};
  const double scale = std::ldexp(1.0, depth);
  for (int i = 0; i < z.dim(); ++i) {
    k[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(z[i] * scale));
  }
  return k;
}

Point cube_lo(const DyadicIndex& k, int dim, int depth) {
  Point p(dim);
  for (int i = 0; i < dim; ++i) p[i] = std::ldexp(static_cast<double>(k[static_cast<std::size_t>(i)]), -depth);
  return p;
}

Point cube_hi(const DyadicIndex& k, int dim, int depth) {
  Point p(dim);
  for (int i = 0; i < dim; ++i) {
    p[i] = std::ldexp(static_cast<double>(k[static_cast<std::size_t>(i)] + 1), -depth);
  }
  return p;
}

}  // namespace

bool Shape::contains(const Point& z) const {
  const Node& n = node();
  switch (n.kind) {
    case ShapeKind::Empty:
      return false;
    case ShapeKind::Ball:
      return squared_distance(z, n.a) < n.r * n.r;
    case ShapeKind::Box:
      return box_contains(n.a, n.b, z);
    case ShapeKind::Union:
      for (const auto& p : n.parts) {
        if (p.contains(z)) return true;
      }
      return false;
    case ShapeKind::Translate:
      return n.parts.front().contains(z - n.a);
    case ShapeKind::Dyadic: {
      const DyadicIndex k = cell_of(z, n.depth);
      if (!n.cube_set.contains(k)) return false;
      return box_contains(cube_lo(k, n.dim, n.depth), cube_hi(k, n.dim, n.depth), z);
    }
    case ShapeKind::Eroded: {
      const Shape& in = n.parts.front();
      return in.contains(z) && in.depth(z) > n.r;
    }
    case ShapeKind::Enlarged: {
      const Shape& in = n.parts.front();
      return in.contains(z) || in.distance(z) < n.r;
    }
  }
  return false;
}

double Shape::depth(const Point& z) const {
  const Node& n = node();
  switch (n.kind) {
    case ShapeKind::Empty:
      return 0.0;
    case ShapeKind::Ball:
      return std::max(0.0, n.r - wsl::distance(z, n.a));
    case ShapeKind::Box:
      return box_contains(n.a, n.b, z) ? box_depth(n.a, n.b, z) : 0.0;
    case ShapeKind::Translate:
      return n.parts.front().depth(z - n.a);
    case ShapeKind::Eroded: {
      if (!contains(z)) return 0.0;
      return std::max(0.0, n.parts.front().depth(z) - n.r);
    }
    case ShapeKind::Enlarged: {
      const Shape& in = n.parts.front();
      if (in.contains(z)) return in.depth(z) + n.r;
      return std::max(0.0, n.r - in.distance(z));
    }
    case ShapeKind::Union:
    case ShapeKind::Dyadic:
      break;
  }

  // Unions: the depth of z is bounded below by the depth inside any single
  // part. The estimate is the shortest exit distance over a probe direction
  // set plus each part's nearest-boundary direction, resolved by bisection to
  // kDepthTolerance. It is exact whenever the nearest complement point lies
  // along one of those directions.
  if (!contains(z)) return 0.0;
  std::function<double(const Point&)> certified;
  std::vector<Point> dirs = probe_directions(n.dim);
  double lower = 0.0;
  if (n.kind == ShapeKind::Union) {
    certified = [&n](const Point& p) {
      double m = 0.0;
      for (const auto& q : n.parts) m = std::max(m, q.depth(p));
      return m;
    };
    for (const auto& q : n.parts) {
      lower = std::max(lower, q.depth(z));
      if (q.kind() == ShapeKind::Ball && q.contains(z)) {
        Point u = z - q.center();
        const double len = u.norm();
        if (len > 0.0) dirs.push_back(u * (1.0 / len));
      } else if (q.kind() == ShapeKind::Box && q.contains(z)) {
        int best = 0;
        double sign = 1.0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n.dim; ++i) {
          if (z[i] - q.lo()[i] < best_gap) best_gap = z[i] - q.lo()[i], best = i, sign = -1.0;
          if (q.hi()[i] - z[i] < best_gap) best_gap = q.hi()[i] - z[i], best = i, sign = 1.0;
        }
        Point u(n.dim);
        u[best] = sign;
        dirs.push_back(u);
      }
    }
  } else {
    certified = [&n](const Point& p) {
      const DyadicIndex k = cell_of(p, n.depth);
      if (!n.cube_set.contains(k)) return 0.0;
      return box_depth(cube_lo(k, n.dim, n.depth), cube_hi(k, n.dim, n.depth), p);
    };
    lower = certified(z);
  }
  const BoundingBall bb = bounding_ball();
  const double t_max = 2.0 * bb.radius + distance(z) + 1.0;
  double best = t_max;
  for (const auto& u : dirs) best = std::min(best, ray_exit(*this, z, u, certified, best));
  return std::max(lower, best);
}

double Shape::distance(const Point& z) const {
  const Node& n = node();
  switch (n.kind) {
    case ShapeKind::Empty:
      return std::numeric_limits<double>::infinity();
    case ShapeKind::Ball:
      return std::max(0.0, wsl::distance(z, n.a) - n.r);
    case ShapeKind::Box:
      return box_distance(n.a, n.b, z);
    case ShapeKind::Union: {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& p : n.parts) m = std::min(m, p.distance(z));
      return m;
    }
    case ShapeKind::Translate:
      return n.parts.front().distance(z - n.a);
    case ShapeKind::Dyadic: {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& k : n.cubes) {
        m = std::min(m, box_distance(cube_lo(k, n.dim, n.depth), cube_hi(k, n.dim, n.depth), z));
      }
      return m;
    }
    case ShapeKind::Eroded: {
      if (contains(z)) return 0.0;
      const Shape& in = n.parts.front();
      if (in.contains(z)) return std::max(0.0, n.r - in.depth(z));
      return in.distance(z) + n.r;
    }
    case ShapeKind::Enlarged:
      return std::max(0.0, n.parts.front().distance(z) - n.r);
  }
  return 0.0;
}

bool Shape::contains_box(const Point& lo, const Point& hi) const {
  return contains_box_impl(lo, hi, 4);
}

bool Shape::contains_box_impl(const Point& lo, const Point& hi, int refine) const {
  const Node& n = node();
  const int d = n.dim;
  switch (n.kind) {
    case ShapeKind::Empty:
      return false;
    case ShapeKind::Ball: {
      // Convex: the open box is inside the open ball iff every corner is in
      // the closed ball.
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double e = std::max(std::abs(lo[i] - n.a[i]), std::abs(hi[i] - n.a[i]));
        s += e * e;
      }
      return s <= n.r * n.r;
    }
    case ShapeKind::Box:
      for (int i = 0; i < d; ++i) {
        if (lo[i] < n.a[i] || hi[i] > n.b[i]) return false;
      }
      return true;
    case ShapeKind::Translate:
      return n.parts.front().contains_box_impl(lo - n.a, hi - n.a, refine);
    case ShapeKind::Dyadic: {
      const double scale = std::ldexp(1.0, n.depth);
      DyadicIndex first{}, last{};
      std::uint64_t count = 1;
      for (int i = 0; i < d; ++i) {
        first[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(lo[i] * scale));
        last[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::ceil(hi[i] * scale)) - 1;
        last[static_cast<std::size_t>(i)] = std::max(last[static_cast<std::size_t>(i)], first[static_cast<std::size_t>(i)]);
        count *= static_cast<std::uint64_t>(last[static_cast<std::size_t>(i)] - first[static_cast<std::size_t>(i)] + 1);
        if (count > (1u << 22)) return false;
      }
      DyadicIndex k = first;
      while (true) {
        if (!n.cube_set.contains(k)) return false;
        int i = 0;
        for (; i < d; ++i) {
          auto& ki = k[static_cast<std::size_t>(i)];
          if (ki < last[static_cast<std::size_t>(i)]) {
            ++ki;
            break;
          }
          ki = first[static_cast<std::size_t>(i)];
        }
        if (i == d) return true;
      }
    }
    case ShapeKind::Eroded: {
      Point lo2 = lo, hi2 = hi;
      for (int i = 0; i < d; ++i) lo2[i] -= n.r, hi2[i] += n.r;
      return n.parts.front().contains_box_impl(lo2, hi2, refine);
    }
    case ShapeKind::Enlarged: {
      const Shape& in = n.parts.front();
      if (in.contains_box_impl(lo, hi, refine)) return true;
      if (in.kind() == ShapeKind::Box || in.kind() == ShapeKind::Ball) {
        for (unsigned m = 0; m < (1u << d); ++m) {
          if (in.distance(corner_of(lo, hi, m)) > n.r) return false;
        }
        return true;
      }
      return false;
    }
    case ShapeKind::Union: {
      for (const auto& p : n.parts) {
        if (p.contains_box_impl(lo, hi, refine)) return true;
      }
      if (refine == 0) return false;
      // Split into 2^d halves; every half must be certified.
      const Point mid = 0.5 * (lo + hi);
      for (unsigned m = 0; m < (1u << d); ++m) {
        Point l(d), h(d);
        for (int i = 0; i < d; ++i) {
          const bool upper = (m >> i) & 1u;
          l[i] = upper ? mid[i] : lo[i];
          h[i] = upper ? hi[i] : mid[i];
        }
        if (!contains_box_impl(l, h, refine - 1)) return false;
      }
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------- bounds

Bounds Shape::bounds() const {
  const Node& n = node();
  const int d = n.dim;
  switch (n.kind) {
    case ShapeKind::Empty:
      return {Point(d), Point(d), true};
    case ShapeKind::Ball: {
      if (n.r == 0.0) return {n.a, n.a, true};
      Point lo = n.a, hi = n.a;
      for (int i = 0; i < d; ++i) lo[i] -= n.r, hi[i] += n.r;
      return {lo, hi, false};
    }
    case ShapeKind::Box:
      return {n.a, n.b, false};
    case ShapeKind::Union: {
      Bounds out{Point(d), Point(d), true};
      for (const auto& p : n.parts) {
        const Bounds b = p.bounds();
        if (b.empty) continue;
        if (out.empty) {
          out = b;
          continue;
        }
        for (int i = 0; i < d; ++i) {
          out.lo[i] = std::min(out.lo[i], b.lo[i]);
          out.hi[i] = std::max(out.hi[i], b.hi[i]);
        }
      }
      return out;
    }
    case ShapeKind::Translate: {
      Bounds b = n.parts.front().bounds();
      b.lo += n.a;
      b.hi += n.a;
      return b;
    }
    case ShapeKind::Dyadic: {
      Point lo = cube_lo(n.cubes.front(), d, n.depth);
      Point hi = cube_hi(n.cubes.front(), d, n.depth);
      for (const auto& k : n.cubes) {
        const Point l = cube_lo(k, d, n.depth), h = cube_hi(k, d, n.depth);
        for (int i = 0; i < d; ++i) lo[i] = std::min(lo[i], l[i]), hi[i] = std::max(hi[i], h[i]);
      }
      return {lo, hi, false};
    }
    case ShapeKind::Eroded: {
      Bounds b = n.parts.front().bounds();
      if (b.empty) return b;
      for (int i = 0; i < d; ++i) {
        b.lo[i] += n.r;
        b.hi[i] -= n.r;
        if (!(b.lo[i] < b.hi[i])) b.empty = true;
      }
      return b;
    }
    case ShapeKind::Enlarged: {
      Bounds b = n.parts.front().bounds();
      if (b.empty) return b;
      for (int i = 0; i < d; ++i) b.lo[i] -= n.r, b.hi[i] += n.r;
      return b;
    }
  }
  return {Point(d), Point(d), true};
}

BoundingBall Shape::bounding_ball() const {
  const Node& n = node();
  const int d = n.dim;
  switch (n.kind) {
    case ShapeKind::Empty:
      return {Point(d), 0.0};
    case ShapeKind::Ball:
      return {n.a, n.r};
    case ShapeKind::Translate: {
      BoundingBall b = n.parts.front().bounding_ball();
      b.center += n.a;
      return b;
    }
    case ShapeKind::Eroded: {
      BoundingBall b = n.parts.front().bounding_ball();
      b.radius = std::max(0.0, b.radius - n.r);
      return b;
    }
    case ShapeKind::Enlarged: {
      BoundingBall b = n.parts.front().bounding_ball();
      b.radius += n.r;
      return b;
    }
    case ShapeKind::Union: {
      const Bounds bx = bounds();
      const Point mid = 0.5 * (bx.lo + bx.hi);
      double r = 0.0;
      for (const auto& p : n.parts) {
        const BoundingBall pb = p.bounding_ball();
        r = std::max(r, wsl::distance(pb.center, mid) + pb.radius);
      }
      return {mid, r};
    }
    case ShapeKind::Box:
    case ShapeKind::Dyadic: {
      const Bounds bx = bounds();
      const Point mid = 0.5 * (bx.lo + bx.hi);
      return {mid, 0.5 * wsl::distance(bx.lo, bx.hi)};
    }
  }
  return {Point(d), 0.0};
}

double Shape::bounding_radius() const {
  const BoundingBall b = bounding_ball();
  return b.center.norm() + b.radius;
}

Shape Shape::reflected() const {
  const Node& n = node();
  switch (n.kind) {
    case ShapeKind::Empty:
      return *this;
    case ShapeKind::Ball:
      return ball(-n.a, n.r);
    case ShapeKind::Box:
      return box(-n.b, -n.a);
    case ShapeKind::Union: {
      std::vector<Shape> out;
      for (const auto& p : n.parts) out.push_back(p.reflected());
      return union_of(std::move(out));
    }
    case ShapeKind::Translate:
      return translated(n.parts.front().reflected(), -n.a);
    case ShapeKind::Dyadic: {
      std::vector<DyadicIndex> out;
      out.reserve(n.cubes.size());
      for (auto k : n.cubes) {
        for (int i = 0; i < n.dim; ++i) k[static_cast<std::size_t>(i)] = -k[static_cast<std::size_t>(i)] - 1;
        out.push_back(k);
      }
      return dyadic(n.dim, n.depth, std::move(out));
    }
    case ShapeKind::Eroded:
      return erode(n.parts.front().reflected(), n.r);
    case ShapeKind::Enlarged:
      return enlarge(n.parts.front().reflected(), n.r);
  }
  return *this;
}

std::string Shape::describe() const {
  const Node& n = node();
  std::ostringstream os;
  auto pt = [&os](const Point& p) {
    os << '[';
    for (int i = 0; i < p.dim(); ++i) os << (i ? "," : "") << p[i];
    os << ']';
  };
  switch (n.kind) {
    case ShapeKind::Empty:
      os << "empty";
      break;
    case ShapeKind::Ball:
      os << "ball(";
      pt(n.a);
      os << ";" << n.r << ")";
      break;
    case ShapeKind::Box:
      os << "box(";
      pt(n.a);
      os << ";";
      pt(n.b);
      os << ")";
      break;
    case ShapeKind::Union:
      os << "union(";
      for (std::size_t i = 0; i < n.parts.size(); ++i) os << (i ? ";" : "") << n.parts[i].describe();
      os << ")";
      break;
    case ShapeKind::Translate:
      os << "translate(" << n.parts.front().describe() << ";";
      pt(n.a);
      os << ")";
      break;
    case ShapeKind::Dyadic:
      os << "dyadic(depth=" << n.depth << ";cubes=" << n.cubes.size() << ")";
      break;
    case ShapeKind::Eroded:
      os << "erode(" << n.parts.front().describe() << ";" << n.r << ")";
      break;
    case ShapeKind::Enlarged:
      os << "enlarge(" << n.parts.front().describe() << ";" << n.r << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------- erosion

Shape erode(const Shape& s, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("erode: delta must be >= 0");
  if (delta == 0.0 || s.is_empty()) return s;
  switch (s.kind()) {
    case ShapeKind::Ball:
      if (s.radius() <= delta) return Shape::empty(s.dim());
      return Shape::ball(s.center(), s.radius() - delta);
    case ShapeKind::Box: {
      Point lo = s.lo(), hi = s.hi();
      for (int i = 0; i < s.dim(); ++i) {
        lo[i] += delta;
        hi[i] -= delta;
        if (!(lo[i] < hi[i])) return Shape::empty(s.dim());
      }
      return Shape::box(lo, hi);
    }
    case ShapeKind::Translate:
      return Shape::translated(erode(s.inner(), delta), s.offset());
    case ShapeKind::Eroded:
      return erode(s.inner(), s.margin() + delta);
    default:
      break;
  }
  auto n = std::make_shared<Shape::Node>();
  n->kind = ShapeKind::Eroded;
  n->dim = s.dim();
  n->r = delta;
  n->parts = {s};
  Shape out{std::move(n)};
  if (out.bounds().empty) return Shape::empty(s.dim());
  return out;
}

Shape enlarge(const Shape& s, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("enlarge: delta must be >= 0");
  if (delta == 0.0 || s.kind() == ShapeKind::Empty) return s;
  switch (s.kind()) {
    case ShapeKind::Ball:
      return Shape::ball(s.center(), s.radius() + delta);
    case ShapeKind::Box:
      if (s.dim() == 1) return Shape::box(Point{s.lo()[0] - delta}, Point{s.hi()[0] + delta});
      break;
    case ShapeKind::Union: {
      // (A u B) + ball = (A + ball) u (B + ball)
      std::vector<Shape> out;
      for (const auto& p : s.parts()) out.push_back(enlarge(p, delta));
      return Shape::union_of(std::move(out));
    }
    case ShapeKind::Translate:
      return Shape::translated(enlarge(s.inner(), delta), s.offset());
    case ShapeKind::Enlarged:
      return enlarge(s.inner(), s.margin() + delta);
    default:
      break;
  }
  auto n = std::make_shared<Shape::Node>();
  n->kind = ShapeKind::Enlarged;
  n->dim = s.dim();
  n->r = delta;
  n->parts = {s};
  return Shape(std::move(n));
}

Shape dyadic_decompose(const Shape& s, int depth) {
  if (depth < 0) throw std::invalid_argument("dyadic_decompose: depth must be >= 0");
  const int d = s.dim();
  const Bounds b = s.bounds();
  if (b.empty) return Shape::empty(d);
  const double scale = std::ldexp(1.0, depth);
  DyadicIndex first{}, last{};
  double cells = 1.0;
  for (int i = 0; i < d; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    first[ii] = static_cast<std::int64_t>(std::floor(b.lo[i] * scale));
    last[ii] = static_cast<std::int64_t>(std::ceil(b.hi[i] * scale)) - 1;
    cells *= static_cast<double>(last[ii] - first[ii] + 1);
  }
  if (cells > 6.7e7) throw std::invalid_argument("dyadic_decompose: too many candidate cells");
  std::vector<DyadicIndex> kept;
  DyadicIndex k = first;
  while (true) {
    if (s.contains_box(cube_lo(k, d, depth), cube_hi(k, d, depth))) kept.push_back(k);
    int i = 0;
    for (; i < d; ++i) {
      auto& ki = k[static_cast<std::size_t>(i)];
      if (ki < last[static_cast<std::size_t>(i)]) {
        ++ki;
        break;
      }
      ki = first[static_cast<std::size_t>(i)];
    }
    if (i == d) break;
  }
  return Shape::dyadic(d, depth, std::move(kept));
}

// ---------------------------------------------------------------- volume

std::vector<std::pair<double, double>> intervals_1d(const Shape& s) {
  if (s.dim() != 1) throw DimensionError("intervals_1d requires d = 1");
  std::vector<std::pair<double, double>> raw;
  switch (s.kind()) {
    case ShapeKind::Empty:
      return {};
    case ShapeKind::Ball:
      if (s.radius() == 0.0) return {};
      return {{s.center()[0] - s.radius(), s.center()[0] + s.radius()}};
    case ShapeKind::Box:
      return {{s.lo()[0], s.hi()[0]}};
    case ShapeKind::Union:
      for (const auto& p : s.parts()) {
        for (const auto& iv : intervals_1d(p)) raw.push_back(iv);
      }
      break;
    case ShapeKind::Translate:
      for (auto iv : intervals_1d(s.inner())) raw.emplace_back(iv.first + s.offset()[0], iv.second + s.offset()[0]);
      break;
    case ShapeKind::Dyadic:
      for (const auto& k : s.cubes()) {
        raw.emplace_back(std::ldexp(static_cast<double>(k[0]), -s.dyadic_depth()),
                         std::ldexp(static_cast<double>(k[0] + 1), -s.dyadic_depth()));
      }
      break;
    case ShapeKind::Eroded:
      for (auto iv : intervals_1d(s.inner())) {
        if (iv.second - iv.first > 2.0 * s.margin()) raw.emplace_back(iv.first + s.margin(), iv.second - s.margin());
      }
      break;
    case ShapeKind::Enlarged:
      for (auto iv : intervals_1d(s.inner())) raw.emplace_back(iv.first - s.margin(), iv.second + s.margin());
      break;
  }
  std::sort(raw.begin(), raw.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : raw) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

double union_length(std::vector<std::pair<double, double>> intervals) {
  std::sort(intervals.begin(), intervals.end());
  double total = 0.0;
  double cur_lo = 0.0, cur_hi = 0.0;
  bool open = false;
  for (const auto& [a, b] : intervals) {
    if (!(b > a)) continue;
    if (open && a <= cur_hi) {
      cur_hi = std::max(cur_hi, b);
    } else {
      if (open) total += cur_hi - cur_lo;
      cur_lo = a;
      cur_hi = b;
      open = true;
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

namespace {

// Volume of the part of a radius-r ball beyond a hyperplane at signed
// distance a from its center, a in [-r, r].
double ball_cap_volume(int d, double r, double a) {
  a = std::clamp(a, -r, r);
  const double phi = std::acos(a / r);
  const double lower = d == 1 ? 1.0 : unit_ball_volume(d - 1);
  return lower * std::pow(r, d) * sin_power_integral(d, phi);
}

// Steiner formula for a box of side lengths L enlarged by delta.
double rounded_box_volume(const Point& lo, const Point& hi, double delta) {
  const int d = lo.dim();
  double v = 0.0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    double prod = 1.0;
    int k = 0;
    for (int i = 0; i < d; ++i) {
      if (mask & (1u << i)) {
        prod *= hi[i] - lo[i];
        ++k;
      }
    }
    const int rest = d - k;
    v += prod * (rest == 0 ? 1.0 : unit_ball_volume(rest) * std::pow(delta, rest));
  }
  return v;
}

std::optional<double> intersection_volume(const std::vector<const Shape*>& set) {
  const int d = set.front()->dim();
  std::vector<const Shape*> balls, boxes;
  for (const auto* s : set) (s->kind() == ShapeKind::Ball ? balls : boxes).push_back(s);

  // Box part: intersect all boxes.
  Point lo(d), hi(d);
  bool have_box = false;
  for (const auto* b : boxes) {
    if (!have_box) {
      lo = b->lo();
      hi = b->hi();
      have_box = true;
    } else {
      for (int i = 0; i < d; ++i) lo[i] = std::max(lo[i], b->lo()[i]), hi[i] = std::min(hi[i], b->hi()[i]);
    }
  }
  if (have_box) {
    for (int i = 0; i < d; ++i) {
      if (!(lo[i] < hi[i])) return 0.0;
    }
  }
  // Any disjoint pair forces zero.
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (have_box && box_distance(lo, hi, balls[i]->center()) >= balls[i]->radius()) return 0.0;
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      if (distance(balls[i]->center(), balls[j]->center()) >= balls[i]->radius() + balls[j]->radius()) return 0.0;
    }
  }
  if (balls.empty()) {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= hi[i] - lo[i];
    return v;
  }
  if (!have_box && balls.size() == 1) return unit_ball_volume(d) * std::pow(balls[0]->radius(), d);
  if (!have_box && balls.size() == 2) {
    return ball_intersection_volume(d, balls[0]->radius(), balls[1]->radius(),
                                    distance(balls[0]->center(), balls[1]->center()));
  }
  if (have_box && balls.size() == 1) {
    const Shape& ball = *balls[0];
    if (ball.contains_box(lo, hi)) {
      double v = 1.0;
      for (int i = 0; i < d; ++i) v *= hi[i] - lo[i];
      return v;
    }
    const Bounds bb = ball.bounds();
    bool inside = true;
    for (int i = 0; i < d; ++i) inside = inside && bb.lo[i] >= lo[i] && bb.hi[i] <= hi[i];
    if (inside) return unit_ball_volume(d) * std::pow(ball.radius(), d);
  }
  return std::nullopt;
}

std::optional<double> inclusion_exclusion(const std::vector<Shape>& parts) {
  const std::size_t m = parts.size();
  double total = 0.0;
  std::vector<const Shape*> set;
  for (std::uint64_t mask = 1; mask < (1ULL << m); ++mask) {
    set.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1ULL << i)) set.push_back(&parts[i]);
    }
    const auto v = intersection_volume(set);
    if (!v) return std::nullopt;
    total += (set.size() % 2 == 1 ? 1.0 : -1.0) * *v;
  }
  return total;
}

VolumeValue monte_carlo_volume(const Shape& s, const VolumeOptions& opts) {
  const Bounds b = s.bounds();
  if (b.empty) return {0.0, true, 0.0};
  const double box_volume = b.volume();
  RngStream rng(opts.seed, 0);
  const int d = s.dim();
  std::size_t hits = 0;
  Point z(d);
  for (std::size_t k = 0; k < opts.mc_samples; ++k) {
    for (int i = 0; i < d; ++i) z[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * rng.uniform();
    if (s.contains(z)) ++hits;
  }
  const double n = static_cast<double>(opts.mc_samples);
  const double p = static_cast<double>(hits) / n;
  // Floor at one-sample resolution so an estimate never reports zero error.
  const double se = box_volume * std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
  return {box_volume * p, false, se};
}

}  // namespace

double ball_intersection_volume(int d, double r1, double r2, double dist) {
  if (dist >= r1 + r2) return 0.0;
  if (dist <= std::abs(r1 - r2)) return unit_ball_volume(d) * std::pow(std::min(r1, r2), d);
  const double a1 = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist);
  const double a2 = dist - a1;
  return ball_cap_volume(d, r1, a1) + ball_cap_volume(d, r2, a2);
}

VolumeValue volume(const Shape& s, const VolumeOptions& opts) {
  const int d = s.dim();
  if (s.is_empty()) return {0.0, true, 0.0};
  if (d == 1) {
    double len = 0.0;
    for (const auto& [a, b] : intervals_1d(s)) len += b - a;
    return {len, true, 0.0};
  }
  switch (s.kind()) {
    case ShapeKind::Ball:
      return {unit_ball_volume(d) * std::pow(s.radius(), d), true, 0.0};
    case ShapeKind::Box:
      return {s.bounds().volume(), true, 0.0};
    case ShapeKind::Dyadic:
      return {std::ldexp(static_cast<double>(s.cubes().size()), -d * s.dyadic_depth()), true, 0.0};
    case ShapeKind::Translate:
      return volume(s.inner(), opts);
    case ShapeKind::Enlarged:
      if (s.inner().kind() == ShapeKind::Box) {
        return {rounded_box_volume(s.inner().lo(), s.inner().hi(), s.margin()), true, 0.0};
      }
      break;
    case ShapeKind::Union: {
      const auto& parts = s.parts();
      const bool primitive = std::all_of(parts.begin(), parts.end(), [](const Shape& p) {
        return p.kind() == ShapeKind::Ball || p.kind() == ShapeKind::Box;
      });
      if (primitive && parts.size() <= opts.max_inclusion_exclusion) {
        if (auto v = inclusion_exclusion(parts)) return {*v, true, 0.0};
      }
      break;
    }
    default:
      break;
  }
  return monte_carlo_volume(s, opts);
}

double equivalent_radius(const Shape& s, const VolumeOptions& opts) {
  if (s.kind() == ShapeKind::Ball) return s.radius();
  if (s.is_empty()) return 0.0;
  const double v = volume(s, opts).value;
  if (v <= 0.0) return 0.0;
  return std::pow(v / unit_ball_volume(s.dim()), 1.0 / s.dim());
}

}  // namespace wsl
