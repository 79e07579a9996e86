#include "wsl/numerics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wsl/point.hpp"

namespace wsl {

double unit_ball_volume(int d) {
  if (d < 1) throw DimensionError("unit_ball_volume: dimension must be >= 1");
  const double h = 0.5 * d;
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

double unit_sphere_area(int k) {
  if (k < 0) throw DimensionError("unit_sphere_area: k must be >= 0");
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double sin_power_integral(int m, double phi) {
  if (m < 0) throw std::invalid_argument("sin_power_integral: negative power");
  if (phi <= 0.0) return 0.0;
  if (m == 0) return phi;
  if (m == 1) {
    const double s = std::sin(0.5 * phi);
    return 2.0 * s * s;
  }
  auto f = [m](double t) { return std::pow(std::sin(t), m); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, phi, 15, 1e-14);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol);
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi_square_critical(double dof, double alpha) {
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), alpha));
}

}  // namespace wsl
