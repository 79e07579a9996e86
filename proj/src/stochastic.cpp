#include "wsl/stochastic.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wsl {

DyadicGrid::DyadicGrid(double t_, int n_) : t(t_), n(n_) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("grid horizon t must be > 0");
  if (n < 0 || n > 30) throw std::invalid_argument("grid depth n must be in 0..30");
}

Point sample_uniform_ball(int d, double eps, RngStream& rng) {
  require_dimension(d);
  if (!(eps > 0.0)) throw std::invalid_argument("sample_uniform_ball: eps must be > 0");
  if (d == 1) {
    while (true) {
      const double x = eps * rng.uniform();
      if (x < eps) return Point{rng.uniform() < 0.5 ? -x : x};
    }
  }
  Point g(d);
  while (true) {
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      g[i] = rng.normal();
      n2 += g[i] * g[i];
    }
    if (n2 == 0.0) continue;
    const double radius = eps * std::pow(rng.uniform(), 1.0 / d);
    g *= radius / std::sqrt(n2);
    // pow() can round U^{1/d} up to exactly 1 for U within an ulp of 1.
    if (g.squared_norm() < eps * eps) return g;
  }
}

Path ball_walk(int d, double eps, const Point& start, std::size_t steps, RngStream& rng) {
  if (start.dim() != d) throw DimensionError("ball_walk: start dimension mismatch");
  Path p;
  p.times.reserve(steps + 1);
  p.positions.reserve(steps + 1);
  p.times.push_back(0.0);
  p.positions.push_back(start);
  for (std::size_t k = 1; k <= steps; ++k) {
    p.times.push_back(static_cast<double>(k));
    p.positions.push_back(p.positions.back() + sample_uniform_ball(d, eps, rng));
  }
  return p;
}

Path brownian_grid(int d, const DyadicGrid& grid, RngStream& rng) {
  require_dimension(d);
  const std::size_t m = grid.points();
  const double sd = std::sqrt(grid.step());
  Path p;
  p.times.reserve(m);
  p.positions.reserve(m);
  p.times.push_back(0.0);
  p.positions.emplace_back(d);
  Point x(d);
  for (std::size_t k = 1; k < m; ++k) {
    for (int i = 0; i < d; ++i) x[i] += sd * rng.normal();
    p.times.push_back(grid.time(k));
    p.positions.push_back(x);
  }
  return p;
}

Path restrict_to_grid(const Path& fine, int fine_n, int coarse_n) {
  if (coarse_n < 0 || coarse_n > fine_n) throw std::invalid_argument("restrict_to_grid: need 0 <= coarse_n <= fine_n");
  const std::size_t stride = std::size_t{1} << (fine_n - coarse_n);
  if (fine.size() != (std::size_t{1} << fine_n) + 1) {
    throw std::invalid_argument("restrict_to_grid: path length does not match fine grid");
  }
  Path out;
  for (std::size_t k = 0; k < fine.size(); k += stride) {
    out.times.push_back(fine.times[k]);
    out.positions.push_back(fine.positions[k]);
  }
  return out;
}

Drift Drift::zero(int d) {
  require_dimension(d);
  Drift f;
  f.kind_ = Kind::Zero;
  f.dim_ = d;
  f.a_ = Point(d);
  return f;
}

Drift Drift::constant(const Point& c) {
  Drift f;
  f.kind_ = Kind::Constant;
  f.dim_ = c.dim();
  f.a_ = c;
  return f;
}

Drift Drift::linear(const Point& velocity) {
  Drift f;
  f.kind_ = Kind::Linear;
  f.dim_ = velocity.dim();
  f.a_ = velocity;
  return f;
}

Drift Drift::jump(double at, const Point& before, const Point& after) {
  before.check_same(after);
  Drift f;
  f.kind_ = Kind::Jump;
  f.dim_ = before.dim();
  f.a_ = before;
  f.b_ = after;
  f.at_ = at;
  return f;
}

Drift Drift::custom(int d, std::function<Point(double)> fn, std::string label) {
  require_dimension(d);
  if (!fn) throw std::invalid_argument("Drift::custom: empty function");
  Drift f;
  f.kind_ = Kind::Custom;
  f.dim_ = d;
  f.fn_ = std::move(fn);
  f.label_ = std::move(label);
  return f;
}

Point Drift::operator()(double s) const {
  switch (kind_) {
    case Kind::Zero:
      return Point(dim_);
    case Kind::Constant:
      return a_;
    case Kind::Linear:
      return s * a_;
    case Kind::Jump:
      return s < at_ ? a_ : b_;
    case Kind::Custom: {
      Point p = fn_(s);
      if (p.dim() != dim_) throw DimensionError("drift function returned wrong dimension");
      return p;
    }
  }
  return Point(dim_);
}

std::string Drift::describe() const {
  std::ostringstream os;
  auto pt = [&os](const Point& p) {
    os << '[';
    for (int i = 0; i < p.dim(); ++i) os << (i ? " " : "") << p[i];
    os << ']';
  };
  switch (kind_) {
    case Kind::Zero:
      os << "zero";
      break;
    case Kind::Constant:
      os << "constant";
      pt(a_);
      break;
    case Kind::Linear:
      os << "linear";
      pt(a_);
      break;
    case Kind::Jump:
      os << "jump@" << at_;
      pt(a_);
      pt(b_);
      break;
    case Kind::Custom:
      os << label_;
      break;
  }
  return os.str();
}

Path add_drift(const Path& p, const Drift& f) {
  if (!p.empty() && p.dim() != f.dim()) throw DimensionError("add_drift: drift and path dimensions differ");
  Path out = p;
  if (f.is_zero()) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out.positions[i] += f(out.times[i]);
  return out;
}

Path donsker_walk(int d, std::uint64_t N, const DyadicGrid& grid, RngStream& rng) {
  require_dimension(d);
  if (N < 1) throw std::invalid_argument("donsker_walk: N must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(N) / (d + 2.0));
  Path p;
  Point s(d);
  std::uint64_t taken = 0;
  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double l = grid.time(k);
    const auto target = static_cast<std::uint64_t>(std::floor(static_cast<double>(N) * l));
    while (taken < target) {
      s += sample_uniform_ball(d, 1.0, rng);
      ++taken;
    }
    p.times.push_back(l);
    p.positions.push_back(scale * s);
  }
  return p;
}

void write_path_csv(std::ostream& os, const Path& p) {
  const int d = p.dim();
  const auto old = os.precision(10);
  os << 't';
  for (int i = 1; i <= d; ++i) os << ",x" << i;
  os << '\n';
  for (std::size_t k = 0; k < p.size(); ++k) {
    os << p.times[k];
    for (int i = 0; i < d; ++i) os << ',' << p.positions[k][i];
    os << '\n';
  }
  os.precision(old);
}

}  // namespace wsl
