#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wsl/geometry.hpp"
#include "wsl/rng.hpp"
#include "wsl/stats.hpp"
#include "wsl/stochastic.hpp"

namespace wsl {

/// Piecewise-constant shape schedule. Pieces are keyed either by step index
/// (walks) or by time (Brownian schedules D_s); each piece holds from its
/// key until the next one.
class ShapeSchedule {
 public:
  enum class Key { Index, Time };
  struct Piece {
    double from = 0.0;
    Shape shape;
  };

  static ShapeSchedule constant(const Shape& s);
  static ShapeSchedule by_index(std::vector<Piece> pieces);
  static ShapeSchedule by_time(std::vector<Piece> pieces);

  [[nodiscard]] Key key() const { return key_; }
  [[nodiscard]] int dim() const { return pieces_.front().shape.dim(); }
  [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }
  /// Shape for step k at time s (the key picks which one is used).
  [[nodiscard]] const Shape& at(std::size_t k, double s) const;
  /// Index of the piece active at key value x.
  [[nodiscard]] std::size_t piece_index(double x) const;
  [[nodiscard]] ShapeSchedule reflected() const;
  /// Same keys, each shape replaced by Ball(0, equivalent_radius).
  [[nodiscard]] ShapeSchedule equivalent_balls(const VolumeOptions& opts = {}) const;

 private:
  ShapeSchedule(Key key, std::vector<Piece> pieces);
  Key key_ = Key::Index;
  std::vector<Piece> pieces_;
};

/// Realized sausage: union over k of path_k + shapes_k.
struct SausageSpec {
  Path path;
  std::vector<Shape> shapes;

  static SausageSpec make(const Path& p, const ShapeSchedule& schedule);
  static SausageSpec make(const Path& p, const Shape& constant_shape);
  void validate() const;
};

enum class SausageMethod {
  Interval,  // exact, d = 1 only
  Hitting,   // uniform points in a bounding ball
  Coverage,  // pick a piece by volume, weight by 1 / coverage count
  Voxel,     // cell-center counting with a boundary-cell bracket
};

std::string to_string(SausageMethod m);
SausageMethod parse_sausage_method(const std::string& s);

struct SausageOptions {
  SausageMethod method = SausageMethod::Hitting;
  std::size_t samples = 1 << 14;
  std::size_t max_voxel_cells = 10'000'000;
  double voxel_pitch = 0.0;  // 0 picks the finest pitch within max_voxel_cells
};

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  SausageMethod method = SausageMethod::Hitting;
  /// Voxel only: (boundary-straddling cells) * h^d.
  double discretization_bound = 0.0;
};

/// Membership index over the translated pieces of one sausage.
class SausageIndex {
 public:
  explicit SausageIndex(const SausageSpec& spec);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] bool empty() const { return pieces_.empty(); }
  [[nodiscard]] bool contains(const Point& x) const;
  [[nodiscard]] std::size_t coverage(const Point& x) const;
  [[nodiscard]] const std::vector<Shape>& pieces() const { return pieces_; }
  [[nodiscard]] Bounds bounds() const { return bounds_; }
  [[nodiscard]] BoundingBall bounding_ball() const;

 private:
  struct Impl;
  int dim_ = 1;
  std::vector<Shape> pieces_;
  Bounds bounds_;
  std::shared_ptr<const Impl> impl_;
};

VolumeEstimate sausage_volume(const SausageSpec& spec, const SausageOptions& opts, RngStream& rng);

/// Volumes of two sausages on common random numbers (same points for
/// Hitting, same grid for Voxel). Coverage is not paired and falls back to
/// Hitting.
std::pair<VolumeEstimate, VolumeEstimate> sausage_volume_pair(const SausageSpec& a,
                                                              const SausageSpec& b,
                                                              const SausageOptions& opts,
                                                              RngStream& rng);

using PathGenerator = std::function<Path(RngStream&)>;

struct ReplicateSettings {
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t min_replicates = 100;
  double level = 0.99;
};

/// Mean over independent paths; replicate r draws from stream r. The
/// standard error is the empirical one of the per-path estimates, so it
/// includes the inner Monte Carlo variance.
VolumeEstimate expected_sausage_volume(const PathGenerator& gen, const ShapeSchedule& schedule,
                                       const ReplicateSettings& rep, const SausageOptions& opts);

struct PairedComparison {
  ComparisonResult test;          // on (first - second)
  VolumeEstimate first;
  VolumeEstimate second;
  std::vector<double> diffs;      // per replicate, in replicate order
};

/// One path per replicate drives the D-sausage and the sausage of centered
/// balls with the equivalent radii.
PairedComparison compare_isoperimetric(const PathGenerator& gen, const ShapeSchedule& schedule,
                                       const ReplicateSettings& rep, const SausageOptions& opts);

/// Brownian grid sausage of B(xi + f, r) versus B(xi, r) on a common path.
PairedComparison drift_comparison(const Drift& f, double r, const DyadicGrid& grid,
                                  const ReplicateSettings& rep, const SausageOptions& opts);

struct DualityResult {
  double lhs = 0.0;  // direct survival MC
  double lhs_se = 0.0;
  double rhs = 0.0;  // 1 - E[vol(reflected sausage)] / vol(start ball)
  double rhs_se = 0.0;
  double gap = 0.0;
  double combined_se = 0.0;
};

/// Survival of a walk started uniformly on B(0, L + c n eps) among the
/// obstacles U_0..U_n (schedule by index), estimated directly and through
/// the volume duality with reflected obstacles. Requires every U_k inside
/// B(0, L) and c >= 1.
DualityResult survival_duality_check(const ShapeSchedule& obstacles, std::size_t n, double L,
                                     double c, double eps, const ReplicateSettings& rep,
                                     const SausageOptions& opts);

struct DiscretizedSausage {
  double delta = 0.0;                // (t/2^n)^{1/3}
  std::vector<Shape> Z;              // per grid time
  std::vector<double> r_star;        // per grid time
  SausageSpec z_spec;                // xi(l) + Z_l
  SausageSpec ball_spec;             // B(xi(l), r*_l)
  bool omega = true;                 // grid increments within the modulus bound
};

/// Builds Z_l and r*_l for a grid path from a time-keyed schedule D_s.
DiscretizedSausage discretize_brownian_sausage(const Path& grid_path, const DyadicGrid& grid,
                                               const ShapeSchedule& schedule,
                                               const VolumeOptions& vopts = {});

struct DiscretizedEstimate {
  VolumeEstimate z_volume;
  VolumeEstimate ball_volume;
  ComparisonResult test;  // paired, on z_volume - ball_volume
  double delta = 0.0;
  double omega_violation_rate = 0.0;
};

/// E[vol(U xi(l) + Z_l)] and E[vol(U B(xi(l), r*_l))] over Brownian grid paths.
DiscretizedEstimate discretized_brownian_sausage(const DyadicGrid& grid,
                                                 const ShapeSchedule& schedule,
                                                 const ReplicateSettings& rep,
                                                 const SausageOptions& opts);

/// Uniform point of a shape (direct for balls and boxes, rejection from the
/// bounding box otherwise).
Point sample_in_shape(const Shape& s, RngStream& rng);

}  // namespace wsl
