#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wsl/numerics.hpp"
#include "wsl/point.hpp"

namespace wsl {

struct Bounds {
  Point lo;
  Point hi;
  bool empty = false;

  [[nodiscard]] double volume() const;
};

struct BoundingBall {
  Point center;
  double radius = 0.0;
};

/// Volume with an exact/estimated tag. std_error == 0 iff exact.
struct VolumeValue {
  double value = 0.0;
  bool exact = true;
  double std_error = 0.0;
};

struct VolumeOptions {
  std::size_t mc_samples = 1'000'000;
  /// Unions with more parts than this skip inclusion-exclusion.
  std::size_t max_inclusion_exclusion = 10;
  std::uint64_t seed = 0x5eedULL;
};

enum class ShapeKind { Empty, Ball, Box, Union, Translate, Dyadic, Eroded, Enlarged };

using DyadicIndex = std::array<std::int64_t, kMaxDim>;

/// Bounded open subset of R^d built from constructive primitives.
///
/// Immutable; copies share structure. Membership uses strict inequalities.
/// Ball/Box translates are folded into the primitive, and translates of
/// unions distribute over the parts, so a Translate node only ever wraps a
/// dyadic union or a predicate-backed (eroded/enlarged) shape.
class Shape {
 public:
  static Shape empty(int dim);
  /// radius == 0 is allowed and denotes the empty degenerate ball.
  static Shape ball(const Point& center, double radius);
  static Shape box(const Point& lo, const Point& hi);
  static Shape union_of(std::vector<Shape> parts);
  static Shape translated(const Shape& inner, const Point& offset);
  static Shape dyadic(int dim, int depth, std::vector<DyadicIndex> cubes);

  [[nodiscard]] int dim() const;
  [[nodiscard]] ShapeKind kind() const;
  [[nodiscard]] bool is_empty() const;

  [[nodiscard]] bool contains(const Point& z) const;

  /// dist(z, complement) for z inside, 0 outside. Exact for primitives and
  /// their translates; for unions this is a ray search (see geometry.cpp).
  [[nodiscard]] double depth(const Point& z) const;

  /// dist(z, shape) for z outside, 0 inside. Exact for primitives and unions;
  /// a lower bound for eroded shapes with non-convex interiors.
  [[nodiscard]] double distance(const Point& z) const;

  /// Conservative test that the open box (lo, hi) lies inside the shape:
  /// true is always correct, false may be a miss for composite shapes.
  [[nodiscard]] bool contains_box(const Point& lo, const Point& hi) const;

  [[nodiscard]] Bounds bounds() const;
  [[nodiscard]] BoundingBall bounding_ball() const;
  /// Radius of a ball about the origin that contains the shape.
  [[nodiscard]] double bounding_radius() const;

  /// Point reflection through the origin, s -> -s.
  [[nodiscard]] Shape reflected() const;

  // Variant payload accessors; calling one on the wrong kind throws.
  [[nodiscard]] const Point& center() const;
  [[nodiscard]] double radius() const;
  [[nodiscard]] const Point& lo() const;
  [[nodiscard]] const Point& hi() const;
  [[nodiscard]] const std::vector<Shape>& parts() const;
  [[nodiscard]] const Shape& inner() const;
  [[nodiscard]] const Point& offset() const;
  [[nodiscard]] double margin() const;
  [[nodiscard]] int dyadic_depth() const;
  [[nodiscard]] const std::vector<DyadicIndex>& cubes() const;

  [[nodiscard]] std::string describe() const;

  friend Shape erode(const Shape& s, double delta);
  friend Shape enlarge(const Shape& s, double delta);

 private:
  struct Node;
  explicit Shape(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  [[nodiscard]] const Node& node() const { return *node_; }
  bool contains_box_impl(const Point& lo, const Point& hi, int refine) const;

  std::shared_ptr<const Node> node_;
};

VolumeValue volume(const Shape& s, const VolumeOptions& opts = {});

/// r with vol(B(0, r)) = vol(s). A Ball returns its own radius unchanged.
double equivalent_radius(const Shape& s, const VolumeOptions& opts = {});

/// {z in s : dist(z, s^c) > delta}.
Shape erode(const Shape& s, double delta);

/// Minkowski sum with the open delta-ball.
Shape enlarge(const Shape& s, double delta);

/// Union of all dyadic cubes of side 2^-depth contained in s.
Shape dyadic_decompose(const Shape& s, int depth);

/// Exact merged open intervals of a d = 1 shape.
std::vector<std::pair<double, double>> intervals_1d(const Shape& s);

/// Length of a union of open intervals (any order, overlaps allowed).
double union_length(std::vector<std::pair<double, double>> intervals);

/// Volume of the intersection of two balls in R^d.
double ball_intersection_volume(int d, double r1, double r2, double center_distance);

}  // namespace wsl
