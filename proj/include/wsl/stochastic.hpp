#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsl/point.hpp"
#include "wsl/rng.hpp"

namespace wsl {

/// D_{n,t} = {k t / 2^n : k = 0..2^n}.
struct DyadicGrid {
  double t = 1.0;
  int n = 0;

  DyadicGrid() = default;
  DyadicGrid(double t_, int n_);

  [[nodiscard]] std::size_t points() const { return (std::size_t{1} << n) + 1; }
  [[nodiscard]] double step() const { return t / static_cast<double>(std::size_t{1} << n); }
  [[nodiscard]] double time(std::size_t k) const { return static_cast<double>(k) * step(); }
};

struct Path {
  std::vector<double> times;
  std::vector<Point> positions;

  [[nodiscard]] std::size_t size() const { return positions.size(); }
  [[nodiscard]] bool empty() const { return positions.empty(); }
  [[nodiscard]] int dim() const { return positions.empty() ? 0 : positions.front().dim(); }
};

/// Uniform point of the open ball B(0, eps); the norm is always < eps.
Point sample_uniform_ball(int d, double eps, RngStream& rng);

/// z(0) = start, z(k+1) = z(k) + U_k with U_k uniform on B(0, eps).
Path ball_walk(int d, double eps, const Point& start, std::size_t steps, RngStream& rng);

/// Standard Brownian motion from 0 sampled on the grid: each increment is
/// N(0, t/2^n) per coordinate.
Path brownian_grid(int d, const DyadicGrid& grid, RngStream& rng);

/// Keep every 2^(fine_n - coarse_n)-th point of a path on D_{fine_n,t}.
Path restrict_to_grid(const Path& fine, int fine_n, int coarse_n);

/// Deterministic drift f: time -> R^d. Need not be continuous.
class Drift {
 public:
  enum class Kind { Zero, Constant, Linear, Jump, Custom };

  static Drift zero(int d);
  static Drift constant(const Point& c);
  /// f(s) = v s
  static Drift linear(const Point& velocity);
  /// f(s) = before for s < at, after for s >= at
  static Drift jump(double at, const Point& before, const Point& after);
  static Drift custom(int d, std::function<Point(double)> f, std::string label = "custom");

  Point operator()(double s) const;
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] bool is_zero() const { return kind_ == Kind::Zero; }
  [[nodiscard]] std::string describe() const;

 private:
  Kind kind_ = Kind::Zero;
  int dim_ = 1;
  Point a_, b_;
  double at_ = 0.0;
  std::function<Point(double)> fn_;
  std::string label_;
};

Path add_drift(const Path& p, const Drift& f);

/// S_{floor(N l)} / sqrt(N / (d + 2)) at the grid times l, where S is the
/// unit-ball walk from 0. 1/(d+2) is the per-coordinate variance of a
/// uniform point of B(0,1).
Path donsker_walk(int d, std::uint64_t N, const DyadicGrid& grid, RngStream& rng);

/// CSV with header t,x1..xd.
void write_path_csv(std::ostream& os, const Path& p);

}  // namespace wsl
