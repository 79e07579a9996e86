#include "wsl/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wsl/numerics.hpp"
#include "wsl/parallel.hpp"
#include "wsl/stats.hpp"
#include "wsl/stochastic.hpp"

namespace wsl {

namespace {

// cos(alpha(x)) for the lower-sheet lift of x.
double cos_alpha(const SphereSpec& s, const Point& x) {
  const double r2 = x.squared_norm();
  return std::sqrt(std::max(0.0, s.R * s.R - r2)) / s.R;
}

// Angle between zeta and the south pole.
double polar_from_south(const SphereSpec& s, const Point& zeta) {
  return geodesic_distance(s, zeta, s.south_pole()) / s.R;
}

void require_lower_cap(const SphereSpec& s, const Point& zeta, double eps) {
  if (polar_from_south(s, zeta) + eps / s.R >= 0.5 * std::numbers::pi) {
    throw std::domain_error(
        "coupled step: cap reaches the equator, projection is not one-to-one (increase R)");
  }
}

// Sample the plane density q while rejecting against p:
// W ~ U(0, q(Y)), accept when W > p(Y). Yields the normalized (q - p)^+.
template <class SampleQ, class DensityQ, class DensityP>
Point residual_draw(SampleQ sample_q, DensityQ q, DensityP p, RngStream& rng) {
  for (std::size_t it = 0; it < 100'000'000; ++it) {
    const Point y = sample_q();
    const double w = rng.uniform() * q(y);
    if (w >= p(y)) return y;
  }
  throw std::runtime_error("maximal coupling residual draw did not terminate");
}

}  // namespace

double start_cap_radius(const CouplingParams& p, const SphereSpec& s) {
  return s.R * std::asin(std::min(1.0, p.start_radius() / s.R));
}

void validate_coupling(const CouplingParams& p, const SphereSpec& s) {
  if (!(p.L > 0.0 && p.c > 0.0 && p.eps > 0.0)) throw std::invalid_argument("coupling needs L, c, eps > 0");
  if (!(p.start_radius() < s.R)) {
    throw std::invalid_argument("coupling needs L + c n eps < R (cap C(L) must lift into the lower hemisphere)");
  }
  if (!(start_cap_radius(p, s) > p.L + static_cast<double>(p.n) * p.eps)) {
    throw std::invalid_argument("coupling: C(L) geodesic radius must exceed L + n eps (increase c)");
  }
}

double projected_cap_density(const SphereSpec& s, const Point& center, double eps, const Point& x) {
  if (!(x.squared_norm() < s.R * s.R)) return 0.0;
  const Point y = lift(x, s);
  if (!(geodesic_distance(s, y, center) < eps)) return 0.0;
  return 1.0 / (cos_alpha(s, x) * cap_measure(s, eps));
}

CoupledState coupled_start(const CouplingParams& p, const SphereSpec& s, RngStream& rng) {
  validate_coupling(p, s);
  const int d = s.d;
  const double rho0 = p.start_radius();
  const double mu_c = cap_measure(s, start_cap_radius(p, s));
  const double vol = unit_ball_volume(d) * std::pow(rho0, d);
  auto f_sphere = [&](const Point& x) {
    return x.squared_norm() < rho0 * rho0 ? 1.0 / (cos_alpha(s, x) * mu_c) : 0.0;
  };
  auto f_plane = [&](const Point& x) { return x.squared_norm() < rho0 * rho0 ? 1.0 / vol : 0.0; };

  const CapSpec start_cap{s.south_pole(), start_cap_radius(p, s)};
  CoupledState st;
  st.sphere_pos = sample_uniform_cap(s, start_cap, rng);
  const Point x = project(st.sphere_pos);
  // Thorisson's maximal coupling: keep x for the plane with probability
  // min(1, f_plane(x) / f_sphere(x)).
  if (rng.uniform() * f_sphere(x) < f_plane(x)) {
    st.plane_pos = x;
    st.coupled = true;
    return st;
  }
  st.plane_pos = residual_draw([&] { return sample_uniform_ball(d, rho0, rng); }, f_plane, f_sphere, rng);
  st.coupled = false;
  return st;
}

CoupledState coupled_step(const CoupledState& state, double eps, const SphereSpec& s,
                          RngStream& rng) {
  const int d = s.d;
  CoupledState out;
  if (!state.coupled) {
    out.sphere_pos = sample_uniform_cap(s, {state.sphere_pos, eps}, rng);
    out.plane_pos = state.plane_pos + sample_uniform_ball(d, eps, rng);
    out.coupled = false;
    return out;
  }
  require_lower_cap(s, state.sphere_pos, eps);
  const Point xi = state.plane_pos;
  const double vol = unit_ball_volume(d) * std::pow(eps, d);
  auto f_sphere = [&](const Point& x) { return projected_cap_density(s, state.sphere_pos, eps, x); };
  auto f_plane = [&](const Point& x) { return squared_distance(x, xi) < eps * eps ? 1.0 / vol : 0.0; };

  out.sphere_pos = sample_uniform_cap(s, {state.sphere_pos, eps}, rng);
  const Point x = project(out.sphere_pos);
  if (rng.uniform() * f_sphere(x) < f_plane(x)) {
    out.plane_pos = x;
    out.coupled = true;
    return out;
  }
  out.plane_pos = residual_draw([&] { return xi + sample_uniform_ball(d, eps, rng); }, f_plane, f_sphere, rng);
  out.coupled = false;
  return out;
}

double start_overlap(const CouplingParams& p, const SphereSpec& s) {
  validate_coupling(p, s);
  const int d = s.d;
  const double R = s.R;
  const double rho0 = p.start_radius();
  const double mu_c = cap_measure(s, start_cap_radius(p, s));
  const double vol = unit_ball_volume(d) * std::pow(rho0, d);
  // f_R^0 grows with rho; it crosses 1/vol where sqrt(R^2 - rho^2) = R vol / mu_c.
  const double k = R * vol / mu_c;
  const double cross = k < R ? std::sqrt((R - k) * (R + k)) : 0.0;
  auto radial = [&](double rho) {
    const double fr = R / (std::sqrt((R - rho) * (R + rho)) * mu_c);
    return std::pow(rho, d - 1) * std::min(fr, 1.0 / vol);
  };
  const double split = std::clamp(cross, 0.0, rho0);
  const double area = unit_sphere_area(d - 1);
  return area * (integrate(radial, 0.0, split, 1e-12) + integrate(radial, split, rho0, 1e-12));
}

double step_overlap(const SphereSpec& s, const Point& zeta, double eps) {
  const int d = s.d;
  if (d > 2) throw DimensionError("step_overlap quadrature supports d <= 2");
  require_lower_cap(s, zeta, eps);
  const Point xi = project(zeta);
  const double vol = unit_ball_volume(d) * std::pow(eps, d);
  const double mu = cap_measure(s, eps);
  auto g = [&](const Point& x) {
    return std::min(projected_cap_density(s, zeta, eps, x), 1.0 / vol);
  };
  if (d == 1) {
    // pi(C(zeta, eps)) is the interval between R sin(phi -+ eps/R) in the
    // chart phi; integrate over its intersection with (xi - eps, xi + eps).
    const double phi = std::atan2(zeta[0], -zeta[1]);
    const double a = std::max(s.R * std::sin(phi - eps / s.R), xi[0] - eps);
    const double b = std::min(s.R * std::sin(phi + eps / s.R), xi[0] + eps);
    if (!(b > a)) return 0.0;
    auto f = [&](double t) { return g(Point{t}); };
    // The two densities cross at most once on each side of xi.
    const double c_cross = std::sqrt(std::max(0.0, s.R * s.R - std::pow(s.R * vol / mu, 2)));
    double total = 0.0;
    std::vector<double> cuts = {a, b};
    for (double c : {-c_cross, c_cross}) {
      if (c > a && c < b) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1], 1e-12);
    return total;
  }
  // d = 2: polar coordinates around xi. Along each ray the integrand is
  // min(f_R, f) on [0, min(eps, boundary of pi(C))], with one kink where
  // cos(alpha) = vol / mu.
  const double c_cross = std::sqrt(std::max(0.0, s.R * s.R - std::pow(s.R * vol / mu, 2)));
  auto ray_integral = [&](double t) {
    const Point u{std::cos(t), std::sin(t)};
    auto inside = [&](double rho) {
      const Point x = xi + rho * u;
      return x.squared_norm() < s.R * s.R && geodesic_distance(s, lift(x, s), zeta) < eps;
    };
    double hi = eps;
    if (!inside(hi * (1.0 - 1e-15))) {
      double lo = 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * eps; ++it) {
        const double m = 0.5 * (lo + hi);
        if (inside(m)) {
          lo = m;
        } else {
          hi = m;
        }
      }
    }
    auto f = [&](double rho) { return rho * g(xi + rho * u); };
    // Points on the ray where |x| = c_cross split the kink.
    std::vector<double> cuts = {0.0, hi};
    const double bq = xi.dot(u);
    const double disc = bq * bq - (xi.squared_norm() - c_cross * c_cross);
    if (disc > 0.0) {
      for (double r : {-bq - std::sqrt(disc), -bq + std::sqrt(disc)}) {
        if (r > 0.0 && r < hi) cuts.push_back(r);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += integrate(f, cuts[i], cuts[i + 1], 1e-11);
    return sum;
  };
  return integrate(ray_integral, 0.0, 2.0 * std::numbers::pi, 1e-10);
}

std::vector<CouplingRow> coupling_failure_curve(const CouplingParams& p, int d,
                                                const std::vector<double>& R_list,
                                                std::size_t replicates, std::uint64_t seed,
                                                unsigned workers, std::size_t min_replicates) {
  require_replicates(replicates, min_replicates);
  std::vector<CouplingRow> rows;
  for (std::size_t j = 0; j < R_list.size(); ++j) {
    const SphereSpec s(R_list[j], d);
    validate_coupling(p, s);
    const auto failed = parallel_map(replicates, workers, [&](std::size_t r) {
      RngStream rng = RngStream(seed, r).child(j);
      CoupledState st = coupled_start(p, s, rng);
      for (std::size_t k = 0; k < p.n && st.coupled; ++k) st = coupled_step(st, p.eps, s, rng);
      return st.coupled ? 0.0 : 1.0;
    });
    const SampleSummary sum = summarize(failed);
    rows.push_back({s.R, d, p, sum.mean, sum.stderr_of_mean(), sum.n});
  }
  return rows;
}

}  // namespace wsl
