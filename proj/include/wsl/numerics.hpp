#pragma once

#include <functional>

namespace wsl {

/// Volume of the unit ball in R^d: pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(int d);

/// Surface area of the unit k-sphere S^k in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2).
/// k = 0 gives 2 (the two points {-1, +1}).
double unit_sphere_area(int k);

/// Integral of sin^m over [0, phi], phi in [0, pi]. Closed forms for m <= 1,
/// adaptive Gauss-Kronrod otherwise (stable for tiny phi).
double sin_power_integral(int m, double phi);

/// Adaptive Gauss-Kronrod on [a, b] with relative tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

/// Fixed 30-point Gauss-Legendre rule on [a, b] (smooth integrands).
double gauss_legendre(const std::function<double(double)>& f, double a, double b);

double normal_cdf(double x);
double normal_quantile(double p);

/// Chi-square upper quantile: x with P(X > x) = alpha.
double chi_square_critical(double dof, double alpha);

}  // namespace wsl
