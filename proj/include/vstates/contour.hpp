#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vstates/errors.hpp"
#include "vstates/parallel.hpp"
#include "vstates/specfun.hpp"

namespace vstates {

using cplx = std::complex<double>;

struct Discretization {
  int r = 6;
  int m = 2;

  Discretization() = default;
  Discretization(int r_, int m_) : r(r_), m(m_) { validate(); }

  void validate() const {
    require(r >= 2 && r <= 20, "Discretization: r must lie in [2,20]");
    require(m >= 2, "Discretization: m must be at least 2");
  }
  int nodes() const { return m << r; }
  int modes() const { return (1 << (r - 1)) - 1; }
  double theta(int i) const { return 2.0 * std::numbers::pi * i / nodes(); }
};

struct SimplyState {
  double alpha = 0.5;
  int m = 2;
  double omega = 0.0;
  double radius = 1.0;
  std::vector<double> coeffs;
};

struct DoublyState {
  double alpha = 0.5;
  double b = 0.5;
  int m = 2;
  double omega = 0.0;
  std::vector<double> outer;
  std::vector<double> inner;
};

struct ResidualVector {
  std::vector<double> sines;

  double max_abs() const {
    double v = 0.0;
    for (double s : sines) v = std::max(v, std::abs(s));
    return v;
  }
};

/// Self-interaction rule for the desingularized integral.
///  product:        trigonometric product integration against |2 sin(s/2)|^-alpha (default)
///  trapezoid_skip: plain trapezoid with the diagonal node dropped
enum class SelfQuadrature { product, trapezoid_skip };

struct BoundaryPoint {
  cplx z;
  cplx dz;
};

/// z(theta) = e^{i theta}[rho + sum a_k cos(m k theta)] and its theta-derivative.
inline BoundaryPoint boundary_eval(double rho, const std::vector<double>& a, int m, double theta) {
  double R = rho, dR = 0.0;
  for (std::size_t k = 1; k <= a.size(); ++k) {
    const double w = double(m) * double(k);
    R += a[k - 1] * std::cos(w * theta);
    dR -= a[k - 1] * w * std::sin(w * theta);
  }
  const cplx e = std::polar(1.0, theta);
  return {e * R, e * cplx(dR, R)};
}

inline BoundaryPoint boundary_eval(const SimplyState& s, double theta) {
  return boundary_eval(s.radius, s.coeffs, s.m, theta);
}

/// which = 0 for the outer boundary, 1 for the inner one.
inline BoundaryPoint boundary_eval(const DoublyState& s, int which, double theta) {
  return which == 0 ? boundary_eval(1.0, s.outer, s.m, theta) : boundary_eval(s.b, s.inner, s.m, theta);
}

namespace detail {

struct TrigTable {
  std::vector<double> c, s;
  explicit TrigTable(int n) : c(n), s(n) {
    for (int q = 0; q < n; ++q) {
      const double t = 2.0 * std::numbers::pi * q / n;
      c[q] = std::cos(t);
      s[q] = std::sin(t);
    }
  }
};

inline std::shared_ptr<const TrigTable> trig_table(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const TrigTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const TrigTable>(n);
  return slot;
}

struct Samples {
  std::vector<cplx> z, dz;
  std::vector<double> R;
};

inline Samples sample_curve(double rho, const std::vector<double>& a, int m, int n) {
  const auto tab = trig_table(n);
  Samples out;
  out.z.resize(n);
  out.dz.resize(n);
  out.R.resize(n);
  for (int i = 0; i < n; ++i) {
    double R = rho, dR = 0.0;
    for (std::size_t k = 1; k <= a.size(); ++k) {
      const int q = int((std::int64_t(m) * std::int64_t(k) * i) % n);
      R += a[k - 1] * tab->c[q];
      dR -= a[k - 1] * double(m) * double(k) * tab->s[q];
    }
    const cplx e(tab->c[i], tab->s[i]);
    out.z[i] = e * R;
    out.dz[i] = e * cplx(dR, R);
    out.R[i] = R;
  }
  return out;
}

inline void check_curve(const Samples& s, const char* what) {
  const int n = int(s.z.size());
  for (int i = 0; i < n; ++i) {
    if (!(s.R[i] > 0.0) || !std::isfinite(s.R[i]))
      throw GeometryError(std::string(what) + ": radius vanishes or changes sign on the grid");
    if (std::abs(s.z[(i + 1) % n] - s.z[i]) < 1e-8)
      throw GeometryError(std::string(what) + ": adjacent nodes closer than 1e-8");
  }
}

// Weights wt[d] (d = 1..N-1) such that
//   (1/2pi) int g(phi) dphi ~ sum_{j != i} wt[j-i] g(phi_j)
// for g(phi) = (z'(phi) - z'(theta_i)) / |z(phi) - z(theta_i)|^alpha, which vanishes at phi = theta_i.
inline std::vector<double> self_weights_uncached(int n, double alpha, SelfQuadrature rule) {
  std::vector<double> wt(n, 1.0 / n);
  wt[0] = 0.0;
  if (rule == SelfQuadrature::trapezoid_skip) return wt;
  // Fourier coefficients of |2 sin(s/2)|^-alpha
  const int half = n / 2;
  std::vector<double> ck(half + 1);
  const double g = gamma(1.0 - 0.5 * alpha);
  ck[0] = gamma(1.0 - alpha) / (g * g);
  for (int k = 0; k < half; ++k) ck[k + 1] = ck[k] * (k + 0.5 * alpha) / (k + 1.0 - 0.5 * alpha);
  const auto tab = trig_table(n);
  for (int d = 1; d < n; ++d) {
    double s = ck[0] + ck[half] * ((d % 2) ? -1.0 : 1.0);
    for (int k = 1; k < half; ++k) s += 2.0 * ck[k] * tab->c[int((std::int64_t(k) * d) % n)];
    const double chord = std::abs(2.0 * std::sin(std::numbers::pi * d / n));
    wt[d] = s / n * std::pow(chord, alpha);
  }
  return wt;
}

inline std::shared_ptr<const std::vector<double>> self_weights(int n, double alpha, SelfQuadrature rule) {
  static std::mutex mu;
  static std::map<std::tuple<int, std::uint64_t, int>, std::shared_ptr<const std::vector<double>>> cache;
  std::uint64_t bits;
  std::memcpy(&bits, &alpha, sizeof bits);
  const auto key = std::make_tuple(n, bits, int(rule));
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto w = std::make_shared<const std::vector<double>>(self_weights_uncached(n, alpha, rule));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, w).first->second;
}

// mean over the curve of (dz_j - dz_i) |z_j - z_i|^-alpha
inline cplx self_mean(const Samples& c, int i, double alpha, const std::vector<double>& wt) {
  const int n = int(c.z.size());
  cplx acc = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const int d = j >= i ? j - i : j - i + n;
    const double r2 = std::norm(c.z[j] - c.z[i]);
    acc += wt[d] * (c.dz[j] - c.dz[i]) * std::pow(r2, -0.5 * alpha);
  }
  return acc;
}

// (1/N) sum_j dz_j |z_j - p|^-alpha over a distinct curve
inline cplx cross_mean(const Samples& c, cplx p, double alpha) {
  const int n = int(c.z.size());
  cplx acc = 0.0;
  for (int j = 0; j < n; ++j) acc += c.dz[j] * std::pow(std::norm(c.z[j] - p), -0.5 * alpha);
  return acc / double(n);
}

// Rebuild all N samples of an m-fold, odd residual function from indices 0..N/(2m).
inline std::vector<double> unfold(const std::vector<double>& base, int m, int n) {
  const int period = n / m;
  std::vector<double> full(n);
  for (int j = 0; j < n; ++j) {
    const int q = j % period;
    full[j] = (2 * q <= period) ? base[q] : -base[period - q];
  }
  return full;
}

}  // namespace detail

/// b_k = (2/N) sum_j f_j sin(m k theta_j), k = 1..M.
inline ResidualVector sine_project(const std::vector<double>& samples, int m, int modes) {
  const int n = int(samples.size());
  require(n > 0 && n % m == 0, "sine_project: sample count must be a positive multiple of m");
  const auto tab = detail::trig_table(n);
  ResidualVector out;
  out.sines.assign(modes, 0.0);
  for (int k = 1; k <= modes; ++k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += samples[j] * tab->s[int((std::int64_t(m) * k * j) % n)];
    out.sines[k - 1] = 2.0 * s / n;
  }
  return out;
}

/// max over the grid of |sum_k b_k sin(m k theta)|, the Newton stopping functional.
inline double sine_sup_norm(const ResidualVector& res, const Discretization& disc) {
  const int n = disc.nodes();
  const auto tab = detail::trig_table(n);
  double best = 0.0;
  for (int i = 0; i <= n / (2 * disc.m); ++i) {
    double s = 0.0;
    for (std::size_t k = 1; k <= res.sines.size(); ++k)
      s += res.sines[k - 1] * tab->s[int((std::int64_t(disc.m) * k * i) % n)];
    best = std::max(best, std::abs(s));
  }
  return best;
}

inline double sine_sup_norm(const std::pair<ResidualVector, ResidualVector>& res, const Discretization& disc) {
  return std::max(sine_sup_norm(res.first, disc), sine_sup_norm(res.second, disc));
}

/// Residual samples of the simply-connected equation at the listed grid nodes.
inline std::vector<double> residual_samples_simply(const SimplyState& st, const Discretization& disc,
                                                   const std::vector<int>& targets,
                                                   SelfQuadrature rule = SelfQuadrature::product) {
  const int n = disc.nodes();
  const auto c = detail::sample_curve(st.radius, st.coeffs, st.m, n);
  detail::check_curve(c, "residual_simply");
  const double ca = c_alpha(st.alpha);
  const auto wt = detail::self_weights(n, st.alpha, rule);
  std::vector<double> out(targets.size());
  parallel_for(int(targets.size()), [&](int t) {
    const int i = targets[t];
    const cplx integral = detail::self_mean(c, i, st.alpha, *wt);
    out[t] = std::real((st.omega * c.z[i] + cplx(0.0, ca) * integral) * std::conj(c.dz[i]));
  });
  return out;
}

inline std::vector<int> fundamental_targets(const Discretization& disc) {
  std::vector<int> t(disc.nodes() / (2 * disc.m) + 1);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = int(i);
  return t;
}

inline std::vector<int> all_targets(const Discretization& disc) {
  std::vector<int> t(disc.nodes());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = int(i);
  return t;
}

/// Sine coefficients of the simply-connected V-state equation error.
inline ResidualVector residual_simply(const SimplyState& st, const Discretization& disc,
                                      SelfQuadrature rule = SelfQuadrature::product) {
  require(st.m == disc.m, "residual_simply: state and discretization disagree on m");
  require(int(st.coeffs.size()) <= disc.modes(), "residual_simply: more coefficients than modes");
  const auto base = residual_samples_simply(st, disc, fundamental_targets(disc), rule);
  return sine_project(detail::unfold(base, disc.m, disc.nodes()), disc.m, disc.modes());
}

/// Minimum distance between a node of the outer boundary and a node of the inner one.
inline double min_boundary_gap(const DoublyState& st, const Discretization& disc) {
  const int n = disc.nodes();
  const auto c1 = detail::sample_curve(1.0, st.outer, st.m, n);
  const auto c2 = detail::sample_curve(st.b, st.inner, st.m, n);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) best = std::min(best, std::abs(c1.z[i] - c2.z[j]));
  return best;
}

/// Residual samples of the doubly-connected equations at the listed nodes of both boundaries.
inline std::pair<std::vector<double>, std::vector<double>> residual_samples_doubly(
    const DoublyState& st, const Discretization& disc, const std::vector<int>& targets,
    SelfQuadrature rule = SelfQuadrature::product) {
  const int n = disc.nodes();
  const auto c1 = detail::sample_curve(1.0, st.outer, st.m, n);
  const auto c2 = detail::sample_curve(st.b, st.inner, st.m, n);
  detail::check_curve(c1, "residual_doubly (outer)");
  detail::check_curve(c2, "residual_doubly (inner)");
  for (int i = 0; i < n; ++i)
    if (!(c2.R[i] < c1.R[i])) throw GeometryError("residual_doubly: boundaries intersect");
  const double ca = c_alpha(st.alpha);
  const auto wt = detail::self_weights(n, st.alpha, rule);
  const int nt = int(targets.size());
  std::vector<double> f1(nt), f2(nt);
  const cplx ic(0.0, ca);
  parallel_for(2 * nt, [&](int t) {
    if (t < nt) {
      const int i = targets[t];
      const cplx self = detail::self_mean(c1, i, st.alpha, *wt);
      const cplx cross = detail::cross_mean(c2, c1.z[i], st.alpha);
      f1[t] = std::real((st.omega * c1.z[i] + ic * self - ic * cross) * std::conj(c1.dz[i]));
    } else {
      const int i = targets[t - nt];
      const cplx cross = detail::cross_mean(c1, c2.z[i], st.alpha);
      const cplx self = detail::self_mean(c2, i, st.alpha, *wt);
      f2[t - nt] = std::real((st.omega * c2.z[i] + ic * cross - ic * self) * std::conj(c2.dz[i]));
    }
  });
  return {f1, f2};
}

/// Sine coefficients of the outer and inner equation errors.
inline std::pair<ResidualVector, ResidualVector> residual_doubly(const DoublyState& st,
                                                                 const Discretization& disc,
                                                                 SelfQuadrature rule = SelfQuadrature::product) {
  require(st.m == disc.m, "residual_doubly: state and discretization disagree on m");
  require(int(st.outer.size()) <= disc.modes() && int(st.inner.size()) <= disc.modes(),
          "residual_doubly: more coefficients than modes");
  require(st.b > 0.0 && st.b < 1.0, "residual_doubly: b must lie in (0,1)");
  const auto [f1, f2] = residual_samples_doubly(st, disc, fundamental_targets(disc), rule);
  const int n = disc.nodes();
  return {sine_project(detail::unfold(f1, disc.m, n), disc.m, disc.modes()),
          sine_project(detail::unfold(f2, disc.m, n), disc.m, disc.modes())};
}

}  // namespace vstates
