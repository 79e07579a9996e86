#include "wsl/sausage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "wsl/parallel.hpp"

namespace wsl {

// ---------------------------------------------------------------- schedules

ShapeSchedule::ShapeSchedule(Key key, std::vector<Piece> pieces) : key_(key), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("shape schedule needs at least one piece");
  std::stable_sort(pieces_.begin(), pieces_.end(), [](const Piece& a, const Piece& b) { return a.from < b.from; });
  if (pieces_.front().from > 0.0) throw std::invalid_argument("shape schedule must start at 0");
  const int d = pieces_.front().shape.dim();
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].shape.dim() != d) throw DimensionError("shape schedule mixes dimensions");
    if (i > 0 && pieces_[i].from == pieces_[i - 1].from) throw std::invalid_argument("shape schedule has duplicate keys");
  }
}

ShapeSchedule ShapeSchedule::constant(const Shape& s) { return {Key::Index, {{0.0, s}}}; }
ShapeSchedule ShapeSchedule::by_index(std::vector<Piece> pieces) { return {Key::Index, std::move(pieces)}; }
ShapeSchedule ShapeSchedule::by_time(std::vector<Piece> pieces) { return {Key::Time, std::move(pieces)}; }

std::size_t ShapeSchedule::piece_index(double x) const {
  const auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                                   [](double v, const Piece& p) { return v < p.from; });
  return it == pieces_.begin() ? 0 : static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

const Shape& ShapeSchedule::at(std::size_t k, double s) const {
  return pieces_[piece_index(key_ == Key::Index ? static_cast<double>(k) : s)].shape;
}

ShapeSchedule ShapeSchedule::reflected() const {
  std::vector<Piece> out;
  for (const auto& p : pieces_) out.push_back({p.from, p.shape.reflected()});
  return {key_, std::move(out)};
}

ShapeSchedule ShapeSchedule::equivalent_balls(const VolumeOptions& opts) const {
  std::vector<Piece> out;
  for (const auto& p : pieces_) {
    out.push_back({p.from, Shape::ball(Point(p.shape.dim()), equivalent_radius(p.shape, opts))});
  }
  return {key_, std::move(out)};
}

SausageSpec SausageSpec::make(const Path& p, const ShapeSchedule& schedule) {
  SausageSpec s;
  s.path = p;
  s.shapes.reserve(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) s.shapes.push_back(schedule.at(k, p.times[k]));
  return s;
}

SausageSpec SausageSpec::make(const Path& p, const Shape& constant_shape) {
  SausageSpec s;
  s.path = p;
  s.shapes.assign(p.size(), constant_shape);
  return s;
}

void SausageSpec::validate() const {
  if (shapes.size() != path.size()) throw std::invalid_argument("sausage: one shape per path point required");
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    if (shapes[k].dim() != path.positions[k].dim()) throw DimensionError("sausage: shape/path dimension mismatch");
  }
}

std::string to_string(SausageMethod m) {
  switch (m) {
    case SausageMethod::Interval:
      return "interval";
    case SausageMethod::Hitting:
      return "hitting";
    case SausageMethod::Coverage:
      return "coverage";
    case SausageMethod::Voxel:
      return "voxel";
  }
  return "?";
}

SausageMethod parse_sausage_method(const std::string& s) {
  if (s == "interval") return SausageMethod::Interval;
  if (s == "hitting") return SausageMethod::Hitting;
  if (s == "coverage") return SausageMethod::Coverage;
  if (s == "voxel") return SausageMethod::Voxel;
  throw std::invalid_argument("unknown volume method '" + s + "' (expected interval, hitting, coverage, voxel)");
}

Point sample_in_shape(const Shape& s, RngStream& rng) {
  const int d = s.dim();
  if (s.kind() == ShapeKind::Ball && s.radius() > 0.0) return s.center() + sample_uniform_ball(d, s.radius(), rng);
  const Bounds b = s.bounds();
  if (b.empty) throw std::invalid_argument("sample_in_shape: empty shape");
  Point x(d);
  for (std::size_t it = 0; it < 100'000'000; ++it) {
    for (int i = 0; i < d; ++i) x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * rng.uniform();
    if (s.contains(x)) return x;
  }
  throw std::runtime_error("sample_in_shape: rejection sampling did not terminate");
}

// ---------------------------------------------------------------- index

namespace {

struct CellHash {
  std::size_t operator()(const DyadicIndex& k) const noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto v : k) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

struct SausageIndex::Impl {
  double cell = 1.0;
  std::unordered_map<DyadicIndex, std::vector<std::uint32_t>, CellHash> grid;

  DyadicIndex key(const Point& x) const {
    DyadicIndex k{};
    for (int i = 0; i < x.dim(); ++i) k[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(x[i] / cell));
    return k;
  }
};

SausageIndex::SausageIndex(const SausageSpec& spec) {
  spec.validate();
  dim_ = spec.path.dim();
  auto impl = std::make_shared<Impl>();
  std::vector<Bounds> bs;
  double cell = 0.0;
  for (std::size_t k = 0; k < spec.path.size(); ++k) {
    Shape piece = Shape::translated(spec.shapes[k], spec.path.positions[k]);
    Bounds b = piece.bounds();
    if (b.empty) continue;
    for (int i = 0; i < dim_; ++i) cell = std::max(cell, b.hi[i] - b.lo[i]);
    if (pieces_.empty()) {
      bounds_ = b;
    } else {
      for (int i = 0; i < dim_; ++i) {
        bounds_.lo[i] = std::min(bounds_.lo[i], b.lo[i]);
        bounds_.hi[i] = std::max(bounds_.hi[i], b.hi[i]);
      }
    }
    pieces_.push_back(std::move(piece));
    bs.push_back(b);
  }
  if (pieces_.empty()) {
    bounds_ = {Point(std::max(dim_, 1)), Point(std::max(dim_, 1)), true};
    impl_ = impl;
    return;
  }
  impl->cell = cell > 0.0 ? cell : 1.0;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const DyadicIndex lo = impl->key(bs[k].lo), hi = impl->key(bs[k].hi);
    DyadicIndex c = lo;
    while (true) {
      impl->grid[c].push_back(static_cast<std::uint32_t>(k));
      int i = 0;
      for (; i < dim_; ++i) {
        auto& ci = c[static_cast<std::size_t>(i)];
        if (ci < hi[static_cast<std::size_t>(i)]) {
          ++ci;
          break;
        }
        ci = lo[static_cast<std::size_t>(i)];
      }
      if (i == dim_) break;
    }
  }
  impl_ = impl;
}

bool SausageIndex::contains(const Point& x) const {
  if (pieces_.empty()) return false;
  const auto it = impl_->grid.find(impl_->key(x));
  if (it == impl_->grid.end()) return false;
  for (auto k : it->second) {
    if (pieces_[k].contains(x)) return true;
  }
  return false;
}

std::size_t SausageIndex::coverage(const Point& x) const {
  if (pieces_.empty()) return 0;
  const auto it = impl_->grid.find(impl_->key(x));
  if (it == impl_->grid.end()) return 0;
  std::size_t c = 0;
  for (auto k : it->second) c += pieces_[k].contains(x) ? 1 : 0;
  return c;
}

BoundingBall SausageIndex::bounding_ball() const {
  if (pieces_.empty()) return {Point(std::max(dim_, 1)), 0.0};
  const Point mid = 0.5 * (bounds_.lo + bounds_.hi);
  double r = 0.0;
  for (const auto& p : pieces_) {
    const BoundingBall b = p.bounding_ball();
    r = std::max(r, distance(b.center, mid) + b.radius);
  }
  return {mid, r + 1e-9};
}

// ---------------------------------------------------------------- estimators

namespace {

double interval_volume(const SausageIndex& idx) {
  std::vector<std::pair<double, double>> all;
  for (const auto& p : idx.pieces()) {
    for (const auto& iv : intervals_1d(p)) all.push_back(iv);
  }
  return union_length(std::move(all));
}

BoundingBall merge_balls(const SausageIndex& a, const SausageIndex& b) {
  if (a.empty()) return b.bounding_ball();
  if (b.empty()) return a.bounding_ball();
  Bounds bx = a.bounds();
  const Bounds bb = b.bounds();
  for (int i = 0; i < a.dim(); ++i) bx.lo[i] = std::min(bx.lo[i], bb.lo[i]), bx.hi[i] = std::max(bx.hi[i], bb.hi[i]);
  const Point mid = 0.5 * (bx.lo + bx.hi);
  double r = 0.0;
  for (const auto* idx : {&a, &b}) {
    for (const auto& p : idx->pieces()) {
      const BoundingBall pb = p.bounding_ball();
      r = std::max(r, distance(pb.center, mid) + pb.radius);
    }
  }
  return {mid, r + 1e-9};
}

// Hitting estimates of several sausages on the same uniform points.
std::vector<VolumeEstimate> hitting(const std::vector<const SausageIndex*>& idx, const BoundingBall& ball,
                                   std::size_t samples, RngStream& rng) {
  const int d = idx.front()->dim();
  std::vector<VolumeEstimate> out(idx.size());
  if (ball.radius <= 0.0 || samples == 0) {
    for (auto& e : out) e.method = SausageMethod::Hitting;
    return out;
  }
  const double vol = unit_ball_volume(d) * std::pow(ball.radius, d);
  std::vector<std::size_t> hits(idx.size(), 0);
  for (std::size_t s = 0; s < samples; ++s) {
    const Point x = ball.center + sample_uniform_ball(d, ball.radius, rng);
    for (std::size_t j = 0; j < idx.size(); ++j) hits[j] += idx[j]->contains(x) ? 1 : 0;
  }
  const double n = static_cast<double>(samples);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double p = static_cast<double>(hits[j]) / n;
    out[j].value = vol * p;
    out[j].std_error = vol * std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
    out[j].samples = samples;
    out[j].method = SausageMethod::Hitting;
  }
  return out;
}

VolumeEstimate coverage(const SausageIndex& idx, std::size_t samples, RngStream& rng) {
  VolumeEstimate e;
  e.method = SausageMethod::Coverage;
  e.samples = samples;
  if (idx.empty() || samples == 0) return e;
  std::vector<double> cum;
  double total = 0.0;
  for (const auto& p : idx.pieces()) {
    const VolumeValue v = volume(p);
    if (!v.exact) throw std::invalid_argument("coverage estimator needs exact piece volumes");
    total += v.value;
    cum.push_back(total);
  }
  if (total <= 0.0) return e;
  RunningStats st;
  for (std::size_t s = 0; s < samples; ++s) {
    const double u = rng.uniform() * total;
    auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    k = std::min(k, cum.size() - 1);
    const Point x = sample_in_shape(idx.pieces()[k], rng);
    const std::size_t c = std::max<std::size_t>(1, idx.coverage(x));
    st.push(1.0 / static_cast<double>(c));
  }
  const SampleSummary sum = st.summary();
  e.value = total * sum.mean;
  e.std_error = total * sum.stderr_of_mean();
  if (e.std_error == 0.0) e.std_error = total / static_cast<double>(samples);
  return e;
}

std::vector<VolumeEstimate> voxel(const std::vector<const SausageIndex*>& idx, Bounds box,
                                  const SausageOptions& opts) {
  const int d = idx.front()->dim();
  std::vector<VolumeEstimate> out(idx.size());
  for (auto& e : out) e.method = SausageMethod::Voxel;
  if (box.empty) return out;
  double h = opts.voxel_pitch;
  if (h <= 0.0) h = std::pow(box.volume() / static_cast<double>(opts.max_voxel_cells), 1.0 / d);
  std::array<std::size_t, kMaxDim> nx{};
  double cells = 1.0;
  for (int i = 0; i < d; ++i) {
    nx[static_cast<std::size_t>(i)] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((box.hi[i] - box.lo[i]) / h)));
    cells *= static_cast<double>(nx[static_cast<std::size_t>(i)]);
  }
  if (cells > 4.0 * static_cast<double>(opts.max_voxel_cells)) throw std::invalid_argument("voxel grid exceeds the cell budget");
  // Vertex memberships, computed lazily.
  std::array<std::size_t, kMaxDim> vstride{};
  std::size_t nverts = 1;
  for (int i = 0; i < d; ++i) {
    vstride[static_cast<std::size_t>(i)] = nverts;
    nverts *= nx[static_cast<std::size_t>(i)] + 1;
  }
  const double hd = std::pow(h, d);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    std::vector<std::int8_t> vert(nverts, -1);
    auto vertex_in = [&](const std::array<std::size_t, kMaxDim>& v) {
      std::size_t lin = 0;
      for (int i = 0; i < d; ++i) lin += v[static_cast<std::size_t>(i)] * vstride[static_cast<std::size_t>(i)];
      if (vert[lin] < 0) {
        Point x(d);
        for (int i = 0; i < d; ++i) x[i] = box.lo[i] + h * static_cast<double>(v[static_cast<std::size_t>(i)]);
        vert[lin] = idx[j]->contains(x) ? 1 : 0;
      }
      return vert[lin] == 1;
    };
    std::size_t inside = 0, straddle = 0;
    std::array<std::size_t, kMaxDim> c{};
    Point x(d);
    const auto total_cells = static_cast<std::size_t>(cells);
    for (std::size_t n = 0; n < total_cells; ++n) {
      for (int i = 0; i < d; ++i) x[i] = box.lo[i] + h * (static_cast<double>(c[static_cast<std::size_t>(i)]) + 0.5);
      const bool in = idx[j]->contains(x);
      inside += in ? 1 : 0;
      bool mixed = false;
      for (unsigned m = 0; m < (1u << d) && !mixed; ++m) {
        std::array<std::size_t, kMaxDim> v = c;
        for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] += (m >> i) & 1u;
        mixed = vertex_in(v) != in;
      }
      straddle += mixed ? 1 : 0;
      for (int i = 0; i < d; ++i) {
        auto& ci = c[static_cast<std::size_t>(i)];
        if (++ci < nx[static_cast<std::size_t>(i)]) break;
        ci = 0;
      }
    }
    out[j].value = static_cast<double>(inside) * hd;
    out[j].discretization_bound = static_cast<double>(straddle) * hd;
    out[j].samples = total_cells;
  }
  return out;
}

Bounds merged_bounds(const SausageIndex& a, const SausageIndex& b) {
  if (a.empty()) return b.bounds();
  if (b.empty()) return a.bounds();
  Bounds bx = a.bounds();
  for (int i = 0; i < a.dim(); ++i) {
    bx.lo[i] = std::min(bx.lo[i], b.bounds().lo[i]);
    bx.hi[i] = std::max(bx.hi[i], b.bounds().hi[i]);
  }
  return bx;
}

}  // namespace

namespace {

// A sausage with at most one piece is that piece; use its exact volume.
std::optional<VolumeEstimate> single_piece_volume(const SausageIndex& idx, SausageMethod m) {
  if (idx.pieces().size() > 1) return std::nullopt;
  if (idx.empty()) return VolumeEstimate{0.0, 0.0, 0, m, 0.0};
  const VolumeValue v = volume(idx.pieces().front());
  if (!v.exact) return std::nullopt;
  return VolumeEstimate{v.value, 0.0, 0, m, 0.0};
}

}  // namespace

VolumeEstimate sausage_volume(const SausageSpec& spec, const SausageOptions& opts, RngStream& rng) {
  if (spec.path.empty()) return {0.0, 0.0, 0, opts.method, 0.0};
  const SausageIndex idx(spec);
  if (opts.method == SausageMethod::Interval && idx.dim() != 1) throw DimensionError("interval method requires d = 1");
  if (auto v = single_piece_volume(idx, opts.method)) return *v;
  switch (opts.method) {
    case SausageMethod::Interval:
      if (idx.dim() != 1) throw DimensionError("interval method requires d = 1");
      return {interval_volume(idx), 0.0, 0, SausageMethod::Interval, 0.0};
    case SausageMethod::Hitting:
      return hitting({&idx}, idx.bounding_ball(), opts.samples, rng).front();
    case SausageMethod::Coverage:
      return coverage(idx, opts.samples, rng);
    case SausageMethod::Voxel:
      return voxel({&idx}, idx.bounds(), opts).front();
  }
  return {};
}

std::pair<VolumeEstimate, VolumeEstimate> sausage_volume_pair(const SausageSpec& a,
                                                              const SausageSpec& b,
                                                              const SausageOptions& opts,
                                                              RngStream& rng) {
  if (a.path.empty() || b.path.empty()) {
    return {sausage_volume(a, opts, rng), sausage_volume(b, opts, rng)};
  }
  const SausageIndex ia(a), ib(b);
  if (ia.dim() != ib.dim()) throw DimensionError("paired sausages differ in dimension");
  {
    auto va = single_piece_volume(ia, opts.method), vb = single_piece_volume(ib, opts.method);
    if (va && vb) return {*va, *vb};
  }
  switch (opts.method) {
    case SausageMethod::Interval:
      if (ia.dim() != 1) throw DimensionError("interval method requires d = 1");
      return {{interval_volume(ia), 0.0, 0, SausageMethod::Interval, 0.0},
              {interval_volume(ib), 0.0, 0, SausageMethod::Interval, 0.0}};
    case SausageMethod::Voxel: {
      auto v = voxel({&ia, &ib}, merged_bounds(ia, ib), opts);
      return {v[0], v[1]};
    }
    case SausageMethod::Hitting:
    case SausageMethod::Coverage: {
      auto v = hitting({&ia, &ib}, merge_balls(ia, ib), opts.samples, rng);
      return {v[0], v[1]};
    }
  }
  return {};
}

// ---------------------------------------------------------------- experiments

namespace {

VolumeEstimate aggregate(const std::vector<double>& values, std::size_t inner_samples, SausageMethod m) {
  const SampleSummary s = summarize(values);
  return {s.mean, s.stderr_of_mean(), inner_samples, m, 0.0};
}

}  // namespace

VolumeEstimate expected_sausage_volume(const PathGenerator& gen, const ShapeSchedule& schedule,
                                       const ReplicateSettings& rep, const SausageOptions& opts) {
  require_replicates(rep.replicates, rep.min_replicates);
  const auto est = parallel_map(rep.replicates, rep.workers, [&](std::size_t r) {
    const RngStream base(rep.seed, r);
    RngStream path_rng = base.child(0), mc_rng = base.child(1);
    const Path p = gen(path_rng);
    return sausage_volume(SausageSpec::make(p, schedule), opts, mc_rng);
  });
  std::vector<double> v;
  std::size_t samples = 0;
  for (const auto& e : est) {
    v.push_back(e.value);
    samples += e.samples;
  }
  return aggregate(v, samples, opts.method);
}

namespace {

PairedComparison paired(const std::function<std::pair<SausageSpec, SausageSpec>(RngStream&)>& make,
                        const ReplicateSettings& rep, const SausageOptions& opts) {
  require_replicates(rep.replicates, rep.min_replicates);
  const auto est = parallel_map(rep.replicates, rep.workers, [&](std::size_t r) {
    const RngStream base(rep.seed, r);
    RngStream path_rng = base.child(0), mc_rng = base.child(1);
    const auto specs = make(path_rng);
    return sausage_volume_pair(specs.first, specs.second, opts, mc_rng);
  });
  PairedComparison out;
  std::vector<double> a, b;
  std::size_t samples = 0;
  for (const auto& [x, y] : est) {
    a.push_back(x.value);
    b.push_back(y.value);
    out.diffs.push_back(x.value - y.value);
    samples += x.samples;
  }
  out.first = aggregate(a, samples, est.front().first.method);
  out.second = aggregate(b, samples, est.front().second.method);
  out.test = paired_one_sided_test(out.diffs, rep.level, rep.min_replicates);
  return out;
}

}  // namespace

PairedComparison compare_isoperimetric(const PathGenerator& gen, const ShapeSchedule& schedule,
                                       const ReplicateSettings& rep, const SausageOptions& opts) {
  const ShapeSchedule balls = schedule.equivalent_balls();
  return paired(
      [&](RngStream& rng) {
        const Path p = gen(rng);
        return std::make_pair(SausageSpec::make(p, schedule), SausageSpec::make(p, balls));
      },
      rep, opts);
}

PairedComparison drift_comparison(const Drift& f, double r, const DyadicGrid& grid,
                                  const ReplicateSettings& rep, const SausageOptions& opts) {
  if (!(r > 0.0)) throw std::invalid_argument("drift_comparison: r must be > 0");
  const int d = f.dim();
  const Shape ball = Shape::ball(Point(d), r);
  return paired(
      [&](RngStream& rng) {
        const Path p = brownian_grid(d, grid, rng);
        return std::make_pair(SausageSpec::make(add_drift(p, f), ball), SausageSpec::make(p, ball));
      },
      rep, opts);
}

namespace {

// Radius of an origin ball guaranteed to contain the shape.
double containing_radius(const Shape& s) {
  switch (s.kind()) {
    case ShapeKind::Empty:
      return 0.0;
    case ShapeKind::Ball:
      return s.center().norm() + s.radius();
    case ShapeKind::Union: {
      double r = 0.0;
      for (const auto& p : s.parts()) r = std::max(r, containing_radius(p));
      return r;
    }
    default: {
      const Bounds b = s.bounds();
      if (b.empty) return 0.0;
      double r2 = 0.0;
      for (int i = 0; i < s.dim(); ++i) {
        const double m = std::max(std::abs(b.lo[i]), std::abs(b.hi[i]));
        r2 += m * m;
      }
      return std::sqrt(r2);
    }
  }
}

}  // namespace

DualityResult survival_duality_check(const ShapeSchedule& obstacles, std::size_t n, double L,
                                     double c, double eps, const ReplicateSettings& rep,
                                     const SausageOptions& opts) {
  if (obstacles.key() != ShapeSchedule::Key::Index) throw std::invalid_argument("duality needs an index-keyed schedule");
  if (!(L > 0.0 && eps > 0.0)) throw std::invalid_argument("duality needs L > 0 and eps > 0");
  if (!(c >= 1.0)) throw std::invalid_argument("duality needs c >= 1 so every reflected sausage stays in the start ball");
  for (const auto& p : obstacles.pieces()) {
    if (containing_radius(p.shape) > L) throw std::invalid_argument("duality: obstacles must lie inside B(0, L)");
  }
  require_replicates(rep.replicates, rep.min_replicates);
  const int d = obstacles.dim();
  const double rho0 = L + c * static_cast<double>(n) * eps;
  const double v0 = unit_ball_volume(d) * std::pow(rho0, d);
  const ShapeSchedule reflected = obstacles.reflected();

  const auto samples = parallel_map(rep.replicates, rep.workers, [&](std::size_t r) {
    const RngStream base(rep.seed, r);
    RngStream direct = base.child(0);
    Point z = sample_uniform_ball(d, rho0, direct);
    double alive = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (k > 0) z += sample_uniform_ball(d, eps, direct);
      if (obstacles.at(k, static_cast<double>(k)).contains(z)) {
        alive = 0.0;
        break;
      }
    }
    RngStream walk = base.child(1), mc = base.child(2);
    const Path p = ball_walk(d, eps, Point(d), n, walk);
    const double vol = sausage_volume(SausageSpec::make(p, reflected), opts, mc).value;
    return std::make_pair(alive, vol);
  });
  std::vector<double> a, v;
  for (const auto& [x, y] : samples) {
    a.push_back(x);
    v.push_back(y);
  }
  const SampleSummary sa = summarize(a), sv = summarize(v);
  DualityResult out;
  out.lhs = sa.mean;
  out.lhs_se = sa.stderr_of_mean();
  out.rhs = 1.0 - sv.mean / v0;
  out.rhs_se = sv.stderr_of_mean() / v0;
  out.gap = out.lhs - out.rhs;
  out.combined_se = std::sqrt(out.lhs_se * out.lhs_se + out.rhs_se * out.rhs_se);
  return out;
}

DiscretizedSausage discretize_brownian_sausage(const Path& grid_path, const DyadicGrid& grid,
                                               const ShapeSchedule& schedule,
                                               const VolumeOptions& vopts) {
  if (grid_path.size() != grid.points()) throw std::invalid_argument("path does not match the grid");
  const int d = schedule.dim();
  if (grid_path.dim() != d) throw DimensionError("path/schedule dimension mismatch");
  const double h = grid.step();
  DiscretizedSausage out;
  out.delta = std::cbrt(h);

  // Per piece: the eroded shape D_{s,n} and its equivalent radius r_{s,n}.
  const auto& pieces = schedule.pieces();
  std::vector<Shape> eroded;
  std::vector<double> radius;
  for (const auto& p : pieces) {
    eroded.push_back(erode(p.shape, out.delta));
    radius.push_back(equivalent_radius(eroded.back(), vopts));
  }
  const bool by_time = schedule.key() == ShapeSchedule::Key::Time;
  out.z_spec.path = grid_path;
  out.ball_spec.path = grid_path;
  for (std::size_t l = 0; l < grid_path.size(); ++l) {
    const double a = by_time ? grid.time(l) : static_cast<double>(l);
    const double b = by_time ? a + h : a + 1.0;
    std::vector<Shape> active;
    double sup = 0.0;
    for (std::size_t j = schedule.piece_index(a); j < pieces.size() && pieces[j].from < b; ++j) {
      active.push_back(eroded[j]);
      sup = std::max(sup, radius[j]);
    }
    out.Z.push_back(Shape::union_of(std::move(active)));
    out.r_star.push_back(std::max(0.0, sup - out.delta));
    out.z_spec.shapes.push_back(out.Z.back());
    out.ball_spec.shapes.push_back(Shape::ball(Point(d), out.r_star.back()));
  }
  const double bound = (std::cbrt(2.0) - 1.0) * out.delta;
  for (std::size_t l = 0; l + 1 < grid_path.size(); ++l) {
    if (distance(grid_path.positions[l + 1], grid_path.positions[l]) > bound) out.omega = false;
  }
  return out;
}

DiscretizedEstimate discretized_brownian_sausage(const DyadicGrid& grid,
                                                 const ShapeSchedule& schedule,
                                                 const ReplicateSettings& rep,
                                                 const SausageOptions& opts) {
  require_replicates(rep.replicates, rep.min_replicates);
  const int d = schedule.dim();
  struct One {
    VolumeEstimate z, ball;
    bool omega;
  };
  const auto est = parallel_map(rep.replicates, rep.workers, [&](std::size_t r) {
    const RngStream base(rep.seed, r);
    RngStream path_rng = base.child(0), mc = base.child(1);
    const Path p = brownian_grid(d, grid, path_rng);
    const DiscretizedSausage ds = discretize_brownian_sausage(p, grid, schedule);
    auto [z, b] = sausage_volume_pair(ds.z_spec, ds.ball_spec, opts, mc);
    return One{z, b, ds.omega};
  });
  std::vector<double> z, b, diffs;
  double violations = 0.0;
  std::size_t samples = 0;
  for (const auto& e : est) {
    z.push_back(e.z.value);
    b.push_back(e.ball.value);
    diffs.push_back(e.z.value - e.ball.value);
    violations += e.omega ? 0.0 : 1.0;
    samples += e.z.samples;
  }
  DiscretizedEstimate out;
  out.z_volume = aggregate(z, samples, opts.method);
  out.ball_volume = aggregate(b, samples, opts.method);
  out.test = paired_one_sided_test(diffs, rep.level, rep.min_replicates);
  out.delta = std::cbrt(grid.step());
  out.omega_violation_rate = violations / static_cast<double>(est.size());
  return out;
}

}  // namespace wsl
