#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "vstates/specfun.hpp"

namespace vstates {

struct GsqgParams {
  double alpha = 0.5;
  std::optional<double> b;  // absent for a simply-connected patch
  int m = 2;

  void validate() const {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(!b || (*b > 0.0 && *b < 1.0), "b must lie in (0,1)");
    require(m >= 2, "m must be at least 2");
  }
  double radius() const {
    require(b.has_value(), "inner radius b is required for a doubly-connected patch");
    return *b;
  }
};

struct SpectralMatrix {
  double m11 = 0, m12 = 0, m21 = 0, m22 = 0;

  double det() const { return m11 * m22 - m12 * m21; }
  SpectralMatrix scaled(double s) const { return {s * m11, s * m12, s * m21, s * m22}; }
  std::array<double, 2> apply(const std::array<double, 2>& v) const {
    return {m11 * v[0] + m12 * v[1], m21 * v[0] + m22 * v[1]};
  }
};

struct EigenPair {
  double omega_plus = 0;
  double omega_minus = 0;
  double delta = 0;
  bool simple = false;
};

namespace detail {

struct AnnulusTerms {
  double b, alpha, theta, lam1, lamn, bma;  // bma = b^-alpha
};

inline AnnulusTerms annulus_terms(int n, const GsqgParams& p) {
  p.validate();
  const double b = p.radius();
  return {b, p.alpha, theta_n(n, p.alpha), lambda_n(1, b, p.alpha), lambda_n(n, b, p.alpha),
          std::pow(b, -p.alpha)};
}

}  // namespace detail

/// Fourier multiplier matrix of the linearized operator at the annulus.
inline SpectralMatrix multiplier_matrix(int n, const GsqgParams& p, double omega) {
  require(n >= 2, "multiplier_matrix: n must be at least 2");
  const auto t = detail::annulus_terms(n, p);
  const double b = t.b;
  return {omega - t.theta + b * b * t.lam1, -b * b * t.lamn, b * t.lamn,
          b * omega + std::pow(b, 1.0 - p.alpha) * t.theta - b * t.lam1};
}

inline double det_multiplier(int n, const GsqgParams& p, double omega) {
  return multiplier_matrix(n, p, omega).det();
}

/// Coefficients of det M_n = (b/4) (lambda^2 - 2 C_n lambda + D_n), lambda = 1 - 2 Omega.
inline std::pair<double, double> dispersion_coefficients(int n, const GsqgParams& p) {
  require(n >= 1, "dispersion_coefficients: n must be positive");
  const auto t = detail::annulus_terms(n, p);
  const double b = t.b, b2 = b * b;
  const double cn = 1.0 + (t.bma - 1.0) * t.theta - (1.0 - b2) * t.lam1;
  const double dn = -4.0 * t.bma * t.theta * t.theta +
                    2.0 * (t.bma - 1.0 + 2.0 * (1.0 + std::pow(b, 2.0 - p.alpha)) * t.lam1) * t.theta -
                    4.0 * b2 * (t.lam1 * t.lam1 - t.lamn * t.lamn) - 2.0 * (1.0 - b2) * t.lam1 + 1.0;
  return {cn, dn};
}

inline double det_multiplier_lambda_form(int n, const GsqgParams& p, double omega) {
  const auto [cn, dn] = dispersion_coefficients(n, p);
  const double lam = 1.0 - 2.0 * omega;
  return 0.25 * p.radius() * (lam * lam - 2.0 * cn * lam + dn);
}

/// Reduced discriminant of det M_n = 0 seen as a quadratic in Omega.
inline double discriminant(int n, const GsqgParams& p) {
  require(n >= 1, "discriminant: n must be positive");
  const auto t = detail::annulus_terms(n, p);
  const double b = t.b;
  const double s = (t.bma + 1.0) * t.theta - (1.0 + b * b) * t.lam1;
  return s * s - 4.0 * b * b * t.lamn * t.lamn;
}

/// Roots lambda_n^- <= lambda_n^+ of lambda^2 - 2 C_n lambda + D_n.
inline std::pair<double, double> lambda_roots(int n, const GsqgParams& p) {
  const double d = discriminant(n, p);
  require(d >= 0.0, "lambda_roots: negative discriminant");
  const double cn = dispersion_coefficients(n, p).first;
  return {cn - std::sqrt(d), cn + std::sqrt(d)};
}

inline EigenPair eigen_omegas_at(int n, const GsqgParams& p) {
  const auto t = detail::annulus_terms(n, p);
  const double b = t.b;
  const double s = (t.bma + 1.0) * t.theta - (1.0 + b * b) * t.lam1;
  const double delta = s * s - 4.0 * b * b * t.lamn * t.lamn;
  if (delta <= 0.0)
    throw DomainError("eigen_omegas: non-positive discriminant at n = " + std::to_string(n));
  const double centre = 0.5 * (1.0 - b * b) * t.lam1 + 0.5 * (1.0 - t.bma) * t.theta;
  const double half = 0.5 * std::sqrt(delta);
  return {centre + half, centre - half, delta, true};
}

/// Angular velocities at which m-fold doubly-connected states leave the annulus.
inline EigenPair eigen_omegas(const GsqgParams& p) { return eigen_omegas_at(p.m, p); }

/// Bifurcation velocity from the unit disc.
inline double omega_simply(int m, double alpha) {
  require(m >= 2, "omega_simply: m must be at least 2");
  return theta_n(m, alpha);
}

/// E_b(n) = (b^-alpha + 1) Theta_n - (1 + b^2) Lambda_1(b) - 2 b Lambda_n(b).
inline double threshold_function(int n, const GsqgParams& p) {
  const auto t = detail::annulus_terms(n, p);
  return (t.bma + 1.0) * t.theta - (1.0 + t.b * t.b) * t.lam1 - 2.0 * t.b * t.lamn;
}

/// Smallest N >= 2 with E_b(N) >= 0.
inline int symmetry_threshold(const GsqgParams& p) {
  p.radius();
  for (int n = 2; n < 1000000; ++n)
    if (threshold_function(n, p) >= 0.0) return n;
  throw ConvergenceError("symmetry_threshold: no sign change below n = 1e6");
}

/// Root of b^2 Lambda_1(b) - Lambda_1(1) + 1/2 on (0,1) by bisection.
inline double b0_solve(double alpha, double tol = 1e-13) {
  detail::check_alpha(alpha);
  require(tol > 0.0, "b0_solve: tol must be positive");
  const double l11 = lambda_n(1, 1.0, alpha);
  auto g = [&](double b) { return b * b * lambda_n(1, b, alpha) - l11 + 0.5; };
  double lo = 0.0, hi = 1.0;
  double mid = 0.5;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double v = g(mid);
    if (std::abs(v) < tol && hi - lo < 1e-12) break;
    (v < 0.0 ? lo : hi) = mid;
  }
  return mid;
}

/// Null vector of M_m at one of the eigen-velocities.
inline std::array<double, 2> kernel_generator(const GsqgParams& p, double omega) {
  const auto mm = multiplier_matrix(p.m, p, omega);
  if (std::abs(mm.det()) > 1e-8 * (1.0 + std::abs(omega)))
    throw DomainError("kernel_generator: omega is not an eigenvalue of M_m");
  const auto t = detail::annulus_terms(p.m, p);
  return {omega + t.bma * t.theta - t.lam1, -t.lamn};
}

/// Limit of Omega_m^- as m -> infinity.
inline double limiting_omega_minus(double b, double alpha) {
  require(b > 0.0 && b < 1.0, "limiting_omega_minus: b must lie in (0,1)");
  return -std::pow(b, -alpha) * lambda_n(1, 1.0, alpha) + lambda_n(1, b, alpha);
}

/// (n+1) M_{n+1}: the block acting on the conformal mode n of the linearized operator.
inline SpectralMatrix linearized_block(int n, const GsqgParams& p, double omega) {
  require(n >= 1, "linearized_block: n must be positive");
  return multiplier_matrix(n + 1, p, omega).scaled(n + 1.0);
}

/// Euler (alpha = 0) multiplier matrix, used as a limit oracle. The (2,1) entry is b^n/(2n), the
/// limit of b Lambda_n(b); with it Delta_n reduces to ((1-b^2)n/2 - 1)^2 - b^(2n) up to 1/n^2.
inline SpectralMatrix euler_matrix(int n, double b, double omega) {
  const double bn = std::pow(b, n);
  return {omega - (n - 1.0) / (2.0 * n) + 0.5 * b * b, -b * bn / (2.0 * n), bn / (2.0 * n),
          b * (omega + (n - 1.0) / (2.0 * n) - 0.5)};
}

}  // namespace vstates
