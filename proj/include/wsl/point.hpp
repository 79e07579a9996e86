#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace wsl {

// Largest ambient dimension a Point can carry. Sphere points live in R^{d+1},
// so sphere experiments are limited to d <= kMaxDim - 1.
inline constexpr int kMaxDim = 8;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_dimension(int d, int max_dim = kMaxDim) {
  if (d < 1 || d > max_dim) {
    throw DimensionError("invalid dimension " + std::to_string(d) + " (expected 1.." +
                         std::to_string(max_dim) + ")");
  }
}

/// Fixed-capacity point in R^d with inline storage, so inner Monte Carlo
/// loops never allocate.
class Point {
 public:
  Point() = default;

  explicit Point(int dim) : dim_(dim) { require_dimension(dim); }

  Point(std::initializer_list<double> coords) : dim_(static_cast<int>(coords.size())) {
    require_dimension(dim_);
    std::size_t i = 0;
    for (double c : coords) c_[i++] = c;
  }

  static Point from_span(std::span<const double> coords) {
    Point p(static_cast<int>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) p.c_[i] = coords[i];
    return p;
  }

  static Point zero(int dim) { return Point(dim); }

  static Point filled(int dim, double value) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p.c_[i] = value;
    return p;
  }

  [[nodiscard]] int dim() const { return dim_; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

  [[nodiscard]] std::span<const double> coords() const {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }

  [[nodiscard]] double squared_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return s;
  }
  [[nodiscard]] double norm() const { return std::sqrt(squared_norm()); }

  [[nodiscard]] double dot(const Point& o) const {
    check_same(o);
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }

  Point& operator+=(const Point& o) {
    check_same(o);
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    check_same(o);
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend Point operator-(Point a) { return a *= -1.0; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[i] != b.c_[i]) return false;
    }
    return true;
  }

  void check_same(const Point& o) const {
    if (o.dim_ != dim_) {
      throw DimensionError("dimension mismatch: " + std::to_string(dim_) + " vs " +
                           std::to_string(o.dim_));
    }
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double distance(const Point& a, const Point& b) {
  a.check_same(b);
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

inline double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace wsl
