#include <cmath>
#include <numbers>
#include <sstream>

#include "wsl/coupling.hpp"
#include "wsl/detection.hpp"
#include "wsl/experiments.hpp"
#include "wsl/sausage.hpp"
#include "wsl/spherewalk.hpp"

namespace wsl {

namespace {

constexpr double kPi = std::numbers::pi;

class Suite {
 public:
  Suite(std::vector<SelftestCheck>& out, std::string name) : out_(out), name_(std::move(name)) {}

  void check(const std::string& what, bool ok, const std::string& detail = {}) {
    out_.push_back({name_, what, ok, detail});
  }

  template <class Fn>
  void run(const std::string& what, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      check(what, false, std::string("exception: ") + e.what());
    }
  }

 private:
  std::vector<SelftestCheck>& out_;
  std::string name_;
};

std::string show(double a, double b) {
  std::ostringstream os;
  os.precision(10);
  os << a << " vs " << b;
  return os.str();
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

void geometry_suite(std::vector<SelftestCheck>& out) {
  Suite s(out, "geometry");
  s.run("unit ball volumes", [&] {
    s.check("unit ball volumes", close(unit_ball_volume(1), 2.0, 1e-14) && close(unit_ball_volume(2), kPi, 1e-14) &&
                                     close(unit_ball_volume(3), 4.0 * kPi / 3.0, 1e-14));
  });
  s.run("lens union", [&] {
    const Shape u = Shape::union_of({Shape::ball(Point{0.0, 0.0}, 1.0), Shape::ball(Point{1.0, 0.0}, 1.0)});
    const double oracle = 2.0 * kPi - (2.0 * kPi / 3.0 - std::sqrt(3.0) / 2.0);
    const VolumeValue exact = volume(u);
    VolumeOptions mc;
    mc.max_inclusion_exclusion = 0;
    mc.mc_samples = 200'000;
    const VolumeValue est = volume(u, mc);
    s.check("two unit discs at distance 1", close(exact.value, oracle, 1e-12) &&
                                                std::abs(est.value - oracle) <= 4.0 * est.std_error,
            show(exact.value, oracle) + ", MC " + show(est.value, oracle));
  });
  s.run("equivalent radius", [&] {
    const double r = equivalent_radius(Shape::box(Point{0.0, 0.0}, Point{1.0, 1.0}));
    s.check("unit square equivalent radius", close(r, 1.0 / std::sqrt(kPi), 1e-12), show(r, 1.0 / std::sqrt(kPi)));
  });
  s.run("dyadic", [&] {
    const Shape b = Shape::ball(Point{0.0, 0.0}, 1.0);
    double prev = 0.0;
    bool mono = true;
    for (int k = 0; k <= 5; ++k) {
      const double v = volume(dyadic_decompose(b, k)).value;
      mono = mono && v >= prev && v <= kPi;
      prev = v;
    }
    s.check("dyadic volumes nondecreasing and below pi", mono);
  });
}

void stochastic_suite(std::vector<SelftestCheck>& out, std::uint64_t seed) {
  Suite s(out, "stochastic");
  s.run("ball second moment", [&] {
    RngStream rng(seed, 1);
    const int d = 3;
    const double eps = 0.7;
    RunningStats st;
    for (int i = 0; i < 40'000; ++i) st.push(sample_uniform_ball(d, eps, rng).squared_norm());
    const auto sum = st.summary();
    const double oracle = eps * eps * d / (d + 2.0);
    s.check("E|U|^2 = eps^2 d/(d+2)", std::abs(sum.mean - oracle) <= 4.0 * sum.stderr_of_mean(),
            show(sum.mean, oracle));
  });
  s.run("brownian second moment", [&] {
    RunningStats st;
    const DyadicGrid g(2.0, 3);
    for (int i = 0; i < 20'000; ++i) {
      RngStream rng(seed, 100 + i);
      st.push(brownian_grid(2, g, rng).positions.back().squared_norm());
    }
    const auto sum = st.summary();
    s.check("E|xi(t)|^2 = d t", std::abs(sum.mean - 4.0) <= 4.0 * sum.stderr_of_mean(), show(sum.mean, 4.0));
  });
  s.run("determinism", [&] {
    RngStream a(seed, 7), b(seed, 7);
    const Path p = ball_walk(2, 0.3, Point(2), 50, a), q = ball_walk(2, 0.3, Point(2), 50, b);
    bool same = true;
    for (std::size_t k = 0; k < p.size(); ++k) same = same && p.positions[k] == q.positions[k];
    s.check("same stream, same path", same);
  });
}

void sphere_suite(std::vector<SelftestCheck>& out, std::uint64_t seed) {
  Suite s(out, "sphere");
  s.run("cap measure closed forms", [&] {
    const SphereSpec s2(1.0, 2), s1(1.0, 1);
    const double whole = cap_measure(s2, kPi), hemi = cap_measure(s2, 0.5 * kPi), arc = cap_measure(s1, 0.5 * kPi);
    s.check("whole sphere cap = 4 pi", close(whole, 4.0 * kPi, 1e-12), show(whole, 4.0 * kPi));
    s.check("hemisphere cap = 2 pi", close(hemi, 2.0 * kPi, 1e-12), show(hemi, 2.0 * kPi));
    s.check("half circle = pi", close(arc, kPi, 1e-12), show(arc, kPi));
  });
  s.run("cap measure by sampling", [&] {
    const SphereSpec s2(2.0, 2);
    const CapSpec cap{s2.north_pole(), 1.3};
    RngStream rng(seed, 2);
    const int N = 100'000;
    int hits = 0;
    for (int i = 0; i < N; ++i) hits += geodesic_distance(s2, sample_uniform_sphere(s2, rng), cap.center) < cap.radius;
    const double p = static_cast<double>(hits) / N, se = std::sqrt(p * (1.0 - p) / N);
    const double oracle = cap_measure(s2, cap.radius) / s2.total_measure();
    s.check("uniform points land in the cap with probability mu(C)/mu(S)", std::abs(p - oracle) <= 4.0 * se,
            show(p, oracle));
  });
  s.run("circle survival oracle", [&] {
    const SphereSpec c(1.0, 1);
    const auto arc = SphereRegion::cap(c, {circle_point(kPi / 4.0, c), kPi / 4.0});
    const double q = circle_survival_quadrature(c, {arc, arc}, kPi / 4.0, 4096);
    const double grid = 0.75 - 512.0 * 511.0 / (1023.0 * 4096.0);
    s.check("n = 1 arc suite matches the grid oracle", close(q, grid, 1e-12), show(q, grid));
  });
}

void coupling_suite(std::vector<SelftestCheck>& out, std::uint64_t seed) {
  Suite s(out, "coupling");
  s.run("start", [&] {
    CouplingParams p;
    const SphereSpec sp(1e4, 2);
    int coupled = 0;
    bool contract = true;
    for (int i = 0; i < 2000; ++i) {
      RngStream rng(seed, 300 + i);
      const auto st = coupled_start(p, sp, rng);
      if (st.coupled) {
        ++coupled;
        contract = contract && st.plane_pos == project(st.sphere_pos);
      }
    }
    s.check("coupled states project exactly", contract);
    s.check("start coupling succeeds at R = 1e4", coupled >= 1990, std::to_string(coupled) + "/2000");
  });
}

void sausage_suite(std::vector<SelftestCheck>& out, std::uint64_t seed, unsigned workers) {
  Suite s(out, "sausage");
  s.run("discrete oracle", [&] {
    const auto D = ShapeSchedule::by_index({{0.0, Shape::box(Point{0.0}, Point{1.0})},
                                            {1.0, Shape::box(Point{0.0}, Point{3.0})}});
    ReplicateSettings rep;
    rep.replicates = 20'000;
    rep.seed = seed;
    rep.workers = workers;
    SausageOptions opts;
    opts.method = SausageMethod::Interval;
    const auto c = compare_isoperimetric([](RngStream& rng) { return ball_walk(1, 1.0, Point(1), 1, rng); }, D, rep, opts);
    s.check("E = 3.25 for the interval schedule", std::abs(c.first.value - 3.25) <= 4.0 * c.first.std_error,
            show(c.first.value, 3.25));
    s.check("E = 3.0 for the ball schedule", std::abs(c.second.value - 3.0) <= 1e-12, show(c.second.value, 3.0));
  });
  s.run("centered balls", [&] {
    ReplicateSettings rep;
    rep.replicates = 200;
    rep.seed = seed;
    rep.workers = workers;
    SausageOptions opts;
    opts.samples = 256;
    const auto c = compare_isoperimetric([](RngStream& rng) { return ball_walk(2, 0.3, Point(2), 8, rng); },
                                         ShapeSchedule::constant(Shape::ball(Point(2), 0.4)), rep, opts);
    s.check("centered balls give identically zero differences", c.test.degenerate);
  });
  s.run("estimator agreement", [&] {
    RngStream rng(seed, 9);
    const Path p = ball_walk(2, 0.5, Point(2), 12, rng);
    const SausageSpec spec = SausageSpec::make(p, Shape::box(Point{-0.3, -0.2}, Point{0.3, 0.4}));
    SausageOptions hit, vox;
    hit.samples = 100'000;
    vox.method = SausageMethod::Voxel;
    vox.max_voxel_cells = 1'000'000;
    const auto h = sausage_volume(spec, hit, rng), v = sausage_volume(spec, vox, rng);
    s.check("voxel and hitting agree", std::abs(h.value - v.value) <= std::max(4.0 * h.std_error, v.discretization_bound),
            show(h.value, v.value));
  });
}

void detection_suite(std::vector<SelftestCheck>& out, std::uint64_t seed, unsigned workers) {
  Suite s(out, "detection");
  s.run("void probability", [&] {
    DetectionConfig cfg;
    cfg.lambda = 0.5;
    cfg.r = 0.5;
    cfg.t = 0.5;
    ReplicateSettings rep;
    rep.replicates = 4000;
    rep.seed = seed;
    rep.workers = workers;
    const auto c = detection_survival(cfg, 2, rep);
    const double vp = void_probability(cfg.lambda, 2, cfg.r);
    s.check("t = 0 survival equals the void probability",
            std::abs(c.points.front().survival - vp) <= 4.0 * c.points.front().std_error,
            show(c.points.front().survival, vp));
  });
}

void stats_suite(std::vector<SelftestCheck>& out) {
  Suite s(out, "stats");
  s.run("paired test", [&] {
    const std::vector<double> zeros(200, 0.0), ones(200, 1.0);
    const auto z = paired_one_sided_test(zeros), o = paired_one_sided_test(ones);
    s.check("all-zero differences are degenerate with p = 1", z.degenerate && z.p_value == 1.0);
    s.check("constant positive differences give p = 0", o.p_value == 0.0 && o.mean_diff == 1.0);
  });
  s.run("summaries", [&] {
    RngStream rng(3, 3);
    std::vector<double> xs;
    RunningStats st;
    for (int i = 0; i < 1000; ++i) {
      xs.push_back(1e6 + rng.normal());
      st.push(xs.back());
    }
    const auto a = st.summary(), b = summarize(xs);
    s.check("streaming and two-pass summaries agree", close(a.mean, b.mean, 1e-10) && close(a.variance, b.variance, 1e-10));
  });
}

}  // namespace

std::vector<SelftestCheck> selftest(std::uint64_t seed, unsigned workers, double cap_measure_fault) {
  std::vector<SelftestCheck> out;
  testing::set_cap_measure_fault(cap_measure_fault);
  try {
    geometry_suite(out);
    stochastic_suite(out, seed);
    sphere_suite(out, seed);
    coupling_suite(out, seed);
    sausage_suite(out, seed, workers);
    detection_suite(out, seed, workers);
    stats_suite(out);
  } catch (...) {
    testing::set_cap_measure_fault(1.0);
    throw;
  }
  testing::set_cap_measure_fault(1.0);
  return out;
}

}  // namespace wsl
