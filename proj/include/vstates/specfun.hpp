#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "vstates/errors.hpp"

namespace vstates {

namespace detail {

inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_p = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_sum(double z) {
  double s = lanczos_p[0];
  for (std::size_t k = 1; k < lanczos_p.size(); ++k) s += lanczos_p[k] / (z + double(k));
  return s;
}

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

// log(1 + e^y) without overflow
inline double softplus(double y) { return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

}  // namespace detail

/// Gamma function. Throws DomainError at the poles 0, -1, -2, ...
inline double gamma(double x) {
  if (std::isnan(x)) throw DomainError("gamma: NaN argument");
  if (detail::is_nonpositive_integer(x)) throw DomainError("gamma: pole at non-positive integer");
  if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma(1.0 - x));
  const double z = x - 1.0;
  const double t = z + detail::lanczos_g + 0.5;
  // split the power so that t^(z+1/2) does not overflow before e^-t is applied
  const double w = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * detail::lanczos_sum(z) * w * (w * std::exp(-t));
}

/// log Gamma(x) for x > 0.
inline double log_gamma(double x) {
  require(x > 0.0, "log_gamma: argument must be positive");
  if (x < 0.5) return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  const double z = x - 1.0;
  const double t = z + detail::lanczos_g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
         std::log(detail::lanczos_sum(z));
}

/// Rising factorial (x)_n.
inline double pochhammer(double x, int n) {
  require(n >= 0, "pochhammer: n must be non-negative");
  double p = 1.0;
  for (int k = 0; k < n; ++k) p *= x + k;
  return p;
}

namespace detail {

// 1/B(p, q) for p, q > 0
inline double inv_beta(double p, double q) {
  if (p + q < 160.0) return gamma(p + q) / (gamma(p) * gamma(q));
  return std::exp(log_gamma(p + q) - log_gamma(p) - log_gamma(q));
}

inline double hyp2f1_series(double a, double b, double c, double z) {
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 200000; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;
    if (std::abs(term) <= 1e-17 * std::abs(sum) && k > 2) return sum;
  }
  throw ConvergenceError("hyp2f1: power series did not converge");
}

// Euler integral with 0 < p < c, the other upper parameter q:
//   F = 1/B(p, c-p) * int_0^1 x^(p-1) (1-x)^(c-p-1) (1-zx)^(-q) dx
// evaluated by tanh-sinh quadrature in log form so the endpoint factors never under/overflow.
inline double hyp2f1_euler(double q, double p, double c, double z) {
  const double omz = 1.0 - z;
  auto log_integrand = [&](double t) {
    const double u = 0.5 * std::numbers::pi * std::sinh(t);
    const double lx = -softplus(-2.0 * u);
    const double l1mx = -softplus(2.0 * u);
    const double one_minus_zx = omz + z * std::exp(l1mx);
    return p * lx + (c - p) * l1mx - q * std::log(one_minus_zx) +
           std::log(std::numbers::pi * std::cosh(t));
  };

  // locate the support of the integrand in t
  double peak = log_integrand(0.0);
  auto reach = [&](double dir) {
    double t = 0.0, prev = peak;
    for (;;) {
      t += 0.25 * dir;
      const double v = log_integrand(t);
      peak = std::max(peak, v);
      if ((v < peak - 46.0 && v < prev) || std::abs(t) >= 40.0) return t;
      prev = v;
    }
  };
  const double tlo = reach(-1.0);
  const double thi = reach(1.0);

  double h = 0.25;
  double sum = 0.0;
  for (double t = tlo; t <= thi + 1e-12; t += h) sum += std::exp(log_integrand(t) - peak);
  double est = h * sum;
  for (int level = 0; level < 14; ++level) {
    h *= 0.5;
    double odd = 0.0;
    for (double t = tlo + h; t < thi; t += 2.0 * h) odd += std::exp(log_integrand(t) - peak);
    sum += odd;
    const double next = h * sum;
    const double diff = std::abs(next - est);
    est = next;
    if (level >= 2 && diff <= 1e-15 * std::abs(est)) break;
  }
  return inv_beta(p, c - p) * est * std::exp(peak);
}

}  // namespace detail

/// Gauss hypergeometric function F(a,b;c;z) for real z in [0,1].
inline double hyp2f1(double a, double b, double c, double z) {
  require(z >= 0.0 && z <= 1.0, "hyp2f1: z must lie in [0,1]");
  if (detail::is_nonpositive_integer(c)) throw DomainError("hyp2f1: c is a non-positive integer");
  if (z == 0.0) return 1.0;
  const bool poly = detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b);
  if (z == 1.0) {
    if (poly && c - a - b <= 0.0) return detail::hyp2f1_series(a, b, c, z);
    if (c - a - b <= 0.0) throw DomainError("hyp2f1: divergent at z = 1 (c - a - b <= 0)");
    if (detail::is_nonpositive_integer(c - a) || detail::is_nonpositive_integer(c - b)) return 0.0;
    if (std::max({std::abs(c), std::abs(c - a), std::abs(c - b)}) < 160.0)
      return gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b));
    require(c - a > 0.0 && c - b > 0.0, "hyp2f1: parameters out of range at z = 1");
    return std::exp(log_gamma(c) + log_gamma(c - a - b) - log_gamma(c - a) - log_gamma(c - b));
  }
  if (z <= 0.5 || poly) return detail::hyp2f1_series(a, b, c, z);
  // pick the Euler parameter that keeps both endpoint exponents well away from -1
  const double gap_b = (b > 0.0 && c > b) ? std::min(b, c - b) : -1.0;
  const double gap_a = (a > 0.0 && c > a) ? std::min(a, c - a) : -1.0;
  if (gap_b <= 0.0 && gap_a <= 0.0) return detail::hyp2f1_series(a, b, c, z);
  if (gap_b >= gap_a) return detail::hyp2f1_euler(a, b, c, z);
  return detail::hyp2f1_euler(b, a, c, z);
}

/// Power series of J_n(x); accurate while x stays moderate.
inline double bessel_j_series(int n, double x) {
  require(n >= 0, "bessel_j: order must be non-negative");
  const double hx = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= hx / k;
  double sum = term;
  const double q = hx * hx;
  for (int k = 0; k < 1000; ++k) {
    term *= -q / ((k + 1.0) * (n + k + 1.0));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum) && k > hx) break;
  }
  return sum;
}

/// Bessel function of the first kind, integer order.
inline double bessel_j(int n, double x) {
  require(n >= 0 && x >= 0.0, "bessel_j: need n >= 0 and x >= 0");
  if (x <= 8.0) return bessel_j_series(n, x);
  return boost::math::cyl_bessel_j(n, x);
}

/// C_alpha = Gamma(alpha/2) / (2^(1-alpha) Gamma(1-alpha/2)).
inline double c_alpha(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  return gamma(0.5 * alpha) / (std::pow(2.0, 1.0 - alpha) * gamma(1.0 - 0.5 * alpha));
}

namespace detail {

// Gamma(1-alpha) / (2^(1-alpha) Gamma(1-alpha/2)^2)
inline double theta_prefactor(double alpha) {
  const double g = gamma(1.0 - 0.5 * alpha);
  return gamma(1.0 - alpha) / (std::pow(2.0, 1.0 - alpha) * g * g);
}

// Gamma(n+alpha/2) / Gamma(n+1-alpha/2) by upward products from n = 1
inline double gamma_shift_ratio(int n, double alpha) {
  const double h = 0.5 * alpha;
  double r = gamma(1.0 + h) / gamma(2.0 - h);
  for (int k = 1; k < n; ++k) r *= (k + h) / (k + 1.0 - h);
  return r;
}

// (alpha/2)_n / n!
inline double poch_over_factorial(double x, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= (x + k) / (k + 1.0);
  return r;
}

inline void check_alpha(double alpha) { require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)"); }

}  // namespace detail

/// Lambda_n(b), closed form through 2F1; b = 1 uses the Gauss value.
inline double lambda_n(int n, double b, double alpha) {
  detail::check_alpha(alpha);
  require(n >= 1, "lambda_n: n must be positive");
  require(b > 0.0 && b <= 1.0, "lambda_n: b must lie in (0,1]");
  if (b == 1.0) return detail::theta_prefactor(alpha) * detail::gamma_shift_ratio(n, alpha);
  const double h = 0.5 * alpha;
  return c_alpha(alpha) * detail::poch_over_factorial(h, n) * std::pow(b, n - 1) *
         hyp2f1(h, n + h, n + 1.0, b * b);
}

/// Theta_n = Lambda_1(1) - Lambda_n(1).
inline double theta_n(int n, double alpha) {
  detail::check_alpha(alpha);
  require(n >= 1, "theta_n: n must be positive");
  const double h = 0.5 * alpha;
  double prod = 1.0;
  for (int k = 1; k < n; ++k) prod *= (k + h) / (k + 1.0 - h);
  const double r1 = gamma(1.0 + h) / gamma(2.0 - h);
  return detail::theta_prefactor(alpha) * r1 * (1.0 - prod);
}

// ---------------------------------------------------------------------------
// limit formulas at the excluded endpoints alpha = 0 and alpha = 1

inline double theta_limit_euler(int n) { return (n - 1.0) / (2.0 * n); }
inline double lambda_limit_euler(int n, double b) { return std::pow(b, n - 1) / (2.0 * n); }

inline double theta_limit_sqg(int n) {
  double s = 0.0;
  for (int k = 1; k < n; ++k) s += 1.0 / (2.0 * k + 1.0);
  return 2.0 / std::numbers::pi * s;
}

// alpha = 1: (1/b) int J_n(bt) J_n(t) dt, here through its hypergeometric form
inline double lambda_limit_sqg(int n, double b) {
  return detail::poch_over_factorial(0.5, n) * std::pow(b, n - 1) * hyp2f1(0.5, n + 0.5, n + 1.0, b * b);
}

// ---------------------------------------------------------------------------
// quadrature oracles (slow; meant for tests)

struct QuadratureOptions {
  double upper_cutoff = 0.0;  // truncation T where the taper starts; 0 picks a default from (n, b)
  int panels = 16;            // Gauss-Legendre panels per fast oscillation period
  double rel_tol = 1e-7;
};

inline QuadratureOptions default_quadrature(int n, double b) {
  QuadratureOptions q;
  q.upper_cutoff = std::max(100.0, 10.0 * (n + 2) / b);
  return q;
}

namespace detail {

inline constexpr std::array<double, 6> gl6_x = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                                0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
inline constexpr std::array<double, 6> gl6_w = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                                0.4679139345726910, 0.3607615730481386, 0.1713244923791704};

template <class F>
double gauss_panels(F&& f, double lo, double hi, double width) {
  const int count = std::max(1, int(std::ceil((hi - lo) / width)));
  const double w = (hi - lo) / count;
  double s = 0.0;
  for (int p = 0; p < count; ++p) {
    const double mid = lo + (p + 0.5) * w;
    double ps = 0.0;
    for (std::size_t k = 0; k < gl6_x.size(); ++k) ps += gl6_w[k] * f(mid + 0.5 * w * gl6_x[k]);
    s += 0.5 * w * ps;
  }
  return s;
}

// C-infinity step from 1 (s <= 0) down to 0 (s >= 1)
inline double smooth_taper(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double g0 = std::exp(-1.0 / s);
  const double g1 = std::exp(-1.0 / (1.0 - s));
  return g1 / (g0 + g1);
}

}  // namespace detail

/// (1/b) int_0^inf J_n(bt) J_n(t) t^(alpha-1) dt.
/// The integrand is cut off by a smooth taper over 30 slow beat periods P starting at T, which
/// averages the oscillatory tail away; tapers starting at T and at T + P must agree. Both share
/// one set of samples on panels aligned with P.
/// alpha = 1 is accepted here so the oracle can also probe the alpha -> 1 limit.
inline double lambda_quadrature_oracle(int n, double b, double alpha, QuadratureOptions opts) {
  require(n >= 0, "lambda_quadrature_oracle: n must be non-negative");
  require(b > 0.0 && b < 1.0, "lambda_quadrature_oracle: b must lie in (0,1)");
  require(alpha > 0.0 && alpha <= 1.0, "lambda_quadrature_oracle: alpha must lie in (0,1]");
  if (opts.upper_cutoff == 0.0) opts.upper_cutoff = default_quadrature(n, b).upper_cutoff;
  require(opts.upper_cutoff > 0.0 && opts.panels >= 16 && opts.rel_tol > 0.0 && opts.rel_tol < 1.0,
          "lambda_quadrature_oracle: invalid QuadratureOptions");

  const double T = opts.upper_cutoff;
  const double P = 2.0 * std::numbers::pi / (1.0 - b);
  const double L = std::max(30.0 * P, 600.0);
  const double width = 2.0 * std::numbers::pi / ((1.0 + b) * opts.panels);
  auto f = [&](double t) { return bessel_j(n, b * t) * bessel_j(n, t) * std::pow(t, alpha - 1.0); };

  // geometric grading on (0,1] absorbs the t^(2n+alpha-1) behaviour at the origin
  double head = 0.0;
  for (int j = 0; j < 60; ++j) head += detail::gauss_panels(f, std::ldexp(1.0, -j - 1), std::ldexp(1.0, -j), 1.0);
  head += detail::gauss_panels(f, 1.0, T, width);

  const int per_period = int(std::ceil(P / width));
  const double w = P / per_period;
  const int total = per_period + int(std::ceil(L / w));
  double gap = 0.0, tail_first = 0.0, tail_second = 0.0;
  for (int k = 0; k < total; ++k) {
    const double mid = T + (k + 0.5) * w;
    for (std::size_t q = 0; q < detail::gl6_x.size(); ++q) {
      const double t = mid + 0.5 * w * detail::gl6_x[q];
      const double fw = 0.5 * w * detail::gl6_w[q] * f(t);
      tail_first += fw * detail::smooth_taper((t - T) / L);
      if (k < per_period)
        gap += fw;
      else
        tail_second += fw * detail::smooth_taper((t - T - P) / L);
    }
  }
  const double first = head + tail_first;
  const double second = head + gap + tail_second;
  if (std::abs(first - second) > opts.rel_tol * std::abs(second))
    throw ConvergenceError("lambda_quadrature_oracle: tail estimates disagree beyond rel_tol");
  return second / b;
}

enum class AnnulusKind { I, J, K, L, M };

/// Coefficient of the leading power of w in the closed-form annulus integrals.
/// I, J, L carry w^n, w^(n+2), w^(n+2); K, M carry conj(w)^n.
inline std::complex<double> annulus_integral_closed(AnnulusKind kind, int n, double b, double alpha, double a,
                                                    double c) {
  detail::check_alpha(alpha);
  require(b > 0.0 && b < 1.0, "annulus_integral_closed: b must lie in (0,1)");
  require(n >= 0, "annulus_integral_closed: n must be non-negative");
  const double h = 0.5 * alpha;
  const double z = b * b;
  const double bn = std::pow(b, n);
  using detail::poch_over_factorial;
  double v = 0.0;
  switch (kind) {
    case AnnulusKind::I:
      v = bn * poch_over_factorial(h, n) * hyp2f1(h, n + h, n + 1.0, z);
      break;
    case AnnulusKind::J:
      v = b * (a * (1.0 + h) * hyp2f1(h, 2.0 + h, 2.0, z) -
               c * bn * poch_over_factorial(1.0 + h, n + 1) * hyp2f1(h, n + 2.0 + h, n + 2.0, z));
      break;
    case AnnulusKind::K:
      require(n >= 1, "annulus_integral_closed: kind K needs n >= 1");
      v = a * b * h * hyp2f1(h + 1.0, h + 1.0, 2.0, z) -
          c * std::pow(b, n - 1) * poch_over_factorial(1.0 + h, n - 1) * hyp2f1(h, n + h, n, z);
      break;
    case AnnulusKind::L:
      v = -z * (a * 0.5 * h * (h + 1.0) * hyp2f1(1.0 + h, 2.0 + h, 3.0, z) -
                c * bn * poch_over_factorial(h, n + 2) * hyp2f1(1.0 + h, n + 2.0 + h, n + 3.0, z));
      break;
    case AnnulusKind::M:
      v = -(a * hyp2f1(h, h + 1.0, 1.0, z) - c * bn * poch_over_factorial(h, n) * hyp2f1(h + 1.0, n + h, n + 1.0, z));
      break;
  }
  return {v, 0.0};
}

/// Direct trapezoid evaluation of the mean-value contour integral over |tau| = 1 at w = 1.
inline std::complex<double> annulus_integral_oracle(AnnulusKind kind, int n, double b, double alpha, double a,
                                                    double c, int nodes) {
  require(nodes >= 512, "annulus_integral_oracle: need at least 512 nodes");
  using cd = std::complex<double>;
  cd acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double t = 2.0 * std::numbers::pi * j / nodes;
    const cd tau = std::polar(1.0, t);
    const cd tb = std::conj(tau);
    const cd taun = std::pow(tau, n);
    cd f;
    switch (kind) {
      case AnnulusKind::I:
        f = std::pow(tau, n - 1) / std::pow(std::abs(1.0 - b * tau), alpha);
        break;
      case AnnulusKind::J:
        f = (1.0 - b * tau) * (a - c * taun) / std::pow(std::abs(1.0 - b * tau), alpha + 2.0);
        break;
      case AnnulusKind::K:
        f = (1.0 - b * tb) * (a - c * std::conj(taun)) / std::pow(std::abs(1.0 - b * tau), alpha + 2.0);
        break;
      case AnnulusKind::L:
        f = (b - tau) * (a - c * taun) / std::pow(std::abs(b - tau), alpha + 2.0);
        break;
      case AnnulusKind::M:
        f = (b - tb) * (a - c * std::conj(taun)) / std::pow(std::abs(b - tau), alpha + 2.0);
        break;
    }
    acc += f * tau;
  }
  return acc / double(nodes);
}

}  // namespace vstates
