#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vstates/contour.hpp"
#include "vstates/parallel.hpp"
#include "vstates/spectrum.hpp"

namespace vstates {

struct NewtonConfig {
  double h = 1e-9;
  double tol = 1e-11;
  int max_iter = 50;
  double damping = 1.0;
  SelfQuadrature quadrature = SelfQuadrature::product;

  void validate() const {
    require(h > 0.0, "NewtonConfig: h must be positive");
    require(tol > 0.0, "NewtonConfig: tol must be positive");
    require(max_iter > 0, "NewtonConfig: max_iter must be positive");
    require(damping > 0.0 && damping <= 1.0, "NewtonConfig: damping must lie in (0,1]");
  }
};

enum class Classification { trivial, nontrivial };

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  Classification classification = Classification::trivial;
};

inline constexpr double trivial_threshold = 1e-8;

using Vec = std::vector<double>;

/// Coefficient-space view of the simply-connected problem at fixed (alpha, m, rho).
struct SimplyProblem {
  using State = SimplyState;

  double alpha = 0.5;
  int m = 2;
  double radius = 1.0;
  Discretization disc;
  SelfQuadrature quadrature = SelfQuadrature::product;

  SimplyProblem(double alpha_, const Discretization& d, SelfQuadrature q = SelfQuadrature::product,
                double rho = 1.0)
      : alpha(alpha_), m(d.m), radius(rho), disc(d), quadrature(q) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(rho > 0.0, "radius must be positive");
  }

  int dim() const { return disc.modes(); }

  State make(double omega, const Vec& x) const { return {alpha, m, omega, radius, x}; }
  static Vec coords(const State& s) { return s.coeffs; }

  Vec residual(double omega, const Vec& x) const {
    return residual_simply(make(omega, x), disc, quadrature).sines;
  }
  double sup_norm(const Vec& res) const { return sine_sup_norm(ResidualVector{res}, disc); }

  // (Omega, a_1) for arclength bookkeeping
  static std::vector<double> arc_coords(const State& s) { return {s.omega, s.coeffs.empty() ? 0.0 : s.coeffs[0]}; }

  // rotation by pi/m maps a_k to (-1)^k a_k and is a symmetry of the discrete equations
  static void normalize(State& s) {
    if (!s.coeffs.empty() && s.coeffs[0] < 0.0)
      for (std::size_t k = 0; k < s.coeffs.size(); k += 2) s.coeffs[k] = -s.coeffs[k];
  }

  Vec seed(double omega, double size) const {
    (void)omega;
    Vec x(dim(), 0.0);
    x[0] = size;
    return x;
  }
};

/// Coefficient-space view of the doubly-connected problem; x = (outer..., inner...).
struct DoublyProblem {
  using State = DoublyState;

  double alpha = 0.5;
  double b = 0.5;
  int m = 2;
  Discretization disc;
  SelfQuadrature quadrature = SelfQuadrature::product;

  DoublyProblem(double alpha_, double b_, const Discretization& d, SelfQuadrature q = SelfQuadrature::product)
      : alpha(alpha_), b(b_), m(d.m), disc(d), quadrature(q) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(b > 0.0 && b < 1.0, "b must lie in (0,1)");
  }

  int dim() const { return 2 * disc.modes(); }

  State make(double omega, const Vec& x) const {
    const int M = disc.modes();
    return {alpha, b, m, omega, Vec(x.begin(), x.begin() + M), Vec(x.begin() + M, x.end())};
  }
  static Vec coords(const State& s) {
    Vec x = s.outer;
    x.insert(x.end(), s.inner.begin(), s.inner.end());
    return x;
  }

  Vec residual(double omega, const Vec& x) const {
    auto [r1, r2] = residual_doubly(make(omega, x), disc, quadrature);
    r1.sines.insert(r1.sines.end(), r2.sines.begin(), r2.sines.end());
    return r1.sines;
  }
  double sup_norm(const Vec& res) const {
    const int M = disc.modes();
    ResidualVector a{Vec(res.begin(), res.begin() + M)}, c{Vec(res.begin() + M, res.end())};
    return std::max(sine_sup_norm(a, disc), sine_sup_norm(c, disc));
  }

  static std::vector<double> arc_coords(const State& s) {
    return {s.omega, s.outer.empty() ? 0.0 : s.outer[0], s.inner.empty() ? 0.0 : s.inner[0]};
  }

  // Rotation by pi/m flips the sign of every odd mode on both boundaries at once.
  // Choose the orientation with a_{1,1} >= 0, or a_{2,1} <= 0 when the inner boundary dominates.
  static void normalize(State& s) {
    const double a11 = s.outer.empty() ? 0.0 : s.outer[0];
    const double a21 = s.inner.empty() ? 0.0 : s.inner[0];
    const double key = std::abs(a11) >= std::abs(a21) ? a11 : -a21;
    if (key < 0.0) {
      for (std::size_t k = 0; k < s.outer.size(); k += 2) s.outer[k] = -s.outer[k];
      for (std::size_t k = 0; k < s.inner.size(); k += 2) s.inner[k] = -s.inner[k];
    }
  }

  // perturbation along the null direction of the 2x2 multiplier at this omega
  Vec seed(double omega, double size) const {
    GsqgParams p{alpha, b, m};
    const auto mm = multiplier_matrix(m, p, omega);
    Eigen::Matrix2d A;
    A << mm.m11, mm.m12, mm.m21, mm.m22;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(A, Eigen::ComputeFullV);
    Eigen::Vector2d v = svd.matrixV().col(1);
    v /= v.cwiseAbs().maxCoeff();
    Vec x(dim(), 0.0);
    x[0] = size * v[0];
    x[disc.modes()] = size * v[1];
    return x;
  }
};

/// Forward-difference Jacobian; column j = (F(x + h e_j) - F(x)) / h. Columns run in parallel.
template <class F>
Eigen::MatrixXd fd_jacobian(F&& residual_map, const Vec& x, double h, const Vec* fx = nullptr) {
  require(h > 0.0, "fd_jacobian: h must be positive");
  const Vec base = fx ? *fx : residual_map(x);
  const int rows = int(base.size());
  const int cols = int(x.size());
  Eigen::MatrixXd J(rows, cols);
  parallel_for(cols, [&](int j) {
    Vec xp = x;
    xp[j] += h;
    const Vec fp = residual_map(xp);
    for (int i = 0; i < rows; ++i) J(i, j) = (fp[i] - base[i]) / h;
  });
  return J;
}

template <class State>
struct SolveResult {
  State state;
  SolveReport report;
};

inline bool is_trivial(const Vec& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::abs(v) < trivial_threshold; });
}

/// Newton iteration x <- x - damping * J(x)^{-1} F(x) at fixed Omega, with per-iteration Jacobians.
/// Throws ConvergenceError on max-iter or a singular Jacobian, GeometryError on invalid curves.
template <class Problem>
SolveResult<typename Problem::State> newton_solve(const Problem& pb, double omega, Vec x, const NewtonConfig& cfg) {
  cfg.validate();
  x.resize(pb.dim(), 0.0);
  auto F = [&](const Vec& y) { return pb.residual(omega, y); };
  int it = 0;
  for (;;) {
    Vec fx = F(x);
    const double res = pb.sup_norm(fx);
    if (!std::isfinite(res)) throw ConvergenceError("newton_solve: residual is not finite");
    if (res < cfg.tol) {
      auto state = pb.make(omega, x);
      Problem::normalize(state);
      // certificate: fresh evaluation on the normalized state
      const Vec xs = Problem::coords(state);
      const double cert = pb.sup_norm(pb.residual(omega, xs));
      if (cert < cfg.tol) {
        SolveReport rep{true, it, cert, is_trivial(xs) ? Classification::trivial : Classification::nontrivial};
        return {std::move(state), rep};
      }
      x = xs;
      fx = F(x);
    }
    if (it >= cfg.max_iter)
      throw ConvergenceError("newton_solve: no convergence after " + std::to_string(cfg.max_iter) +
                             " iterations (residual " + std::to_string(res) + ")");
    const Eigen::MatrixXd J = fd_jacobian(F, x, cfg.h, &fx);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) throw ConvergenceError("newton_solve: Jacobian condition estimate above 1e14");
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(fx.data(), Eigen::Index(fx.size()));
    const Eigen::VectorXd dx = lu.solve(rhs);
    for (int k = 0; k < pb.dim(); ++k) x[k] -= cfg.damping * dx[k];
    ++it;
  }
}

/// Seed ladder: a_1 = seed, 10 seed, ... up to 1e-1, until a nontrivial root is found.
/// Returns the last outcome (possibly trivial) when no rung yields a nontrivial root.
template <class Problem>
SolveResult<typename Problem::State> solve_nontrivial(const Problem& pb, double omega, const NewtonConfig& cfg,
                                                      double seed = 1e-3) {
  require(seed > 0.0, "solve_nontrivial: seed must be positive");
  std::optional<SolveResult<typename Problem::State>> last;
  std::string last_error;
  for (double s = seed; s <= 0.1 * (1.0 + 1e-12); s *= 10.0) {
    try {
      auto out = newton_solve(pb, omega, pb.seed(omega, s), cfg);
      if (out.report.classification == Classification::nontrivial) return out;
      last = std::move(out);
    } catch (const ConvergenceError& e) {
      last_error = e.what();
    } catch (const GeometryError& e) {
      last_error = e.what();
    }
  }
  if (last) return *last;
  throw ConvergenceError("solve_nontrivial: every seed failed (" + last_error + ")");
}

template <class State>
struct BranchPoint {
  double lambda = 0.0;
  double omega = 0.0;
  State state;
  SolveReport report;
  bool past_fold = false;
};

template <class State>
struct Branch {
  std::vector<BranchPoint<State>> points;
  bool stopped_on_failure = false;
  double last_good_omega = 0.0;
  double failed_omega = 0.0;
  std::string failure;
};

namespace detail {
inline double arc_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}
}  // namespace detail

template <class Problem>
void append_point(Branch<typename Problem::State>& br, SolveResult<typename Problem::State> res) {
  BranchPoint<typename Problem::State> pt;
  pt.omega = res.state.omega;
  pt.lambda = br.points.empty() ? 0.0
                                : br.points.back().lambda + detail::arc_distance(Problem::arc_coords(br.points.back().state),
                                                                                 Problem::arc_coords(res.state));
  pt.state = std::move(res.state);
  pt.report = res.report;
  br.points.push_back(std::move(pt));
  br.last_good_omega = br.points.back().omega;
}

/// Natural-parameter sweep: each state warm-starts the next one. The first state comes from
/// `start` when given, else from the seed ladder. A warm start that falls onto the trivial root
/// (square-root growth near a pitchfork) is retried once with the seed ladder. Stops at omega_stop
/// or on the first failure (Newton failure, geometry failure or collapse onto the trivial root).
template <class Problem>
Branch<typename Problem::State> sweep_branch(const Problem& pb, double omega_start, double omega_step,
                                             double omega_stop, const NewtonConfig& cfg, double seed = 1e-3,
                                             const typename Problem::State* start = nullptr) {
  require(omega_step != 0.0, "sweep_branch: omega_step must be non-zero");
  require((omega_stop - omega_start) * omega_step >= 0.0, "sweep_branch: step points away from omega_stop");
  Branch<typename Problem::State> br;
  br.last_good_omega = omega_start;
  const int count = int(std::floor(std::abs(omega_stop - omega_start) / std::abs(omega_step) + 1e-9)) + 1;
  Vec warm;
  for (int k = 0; k < count; ++k) {
    const double omega = omega_start + k * omega_step;
    try {
      SolveResult<typename Problem::State> res;
      if (k == 0 && !start) {
        res = solve_nontrivial(pb, omega, cfg, seed);
      } else {
        res = newton_solve(pb, omega, k == 0 ? Problem::coords(*start) : warm, cfg);
        if (res.report.classification == Classification::trivial) res = solve_nontrivial(pb, omega, cfg, seed);
      }
      if (res.report.classification == Classification::trivial) {
        br.stopped_on_failure = true;
        br.failed_omega = omega;
        br.failure = "collapsed onto the trivial root";
        return br;
      }
      warm = Problem::coords(res.state);
      append_point<Problem>(br, std::move(res));
    } catch (const ConvergenceError& e) {
      br.stopped_on_failure = true;
      br.failed_omega = omega;
      br.failure = e.what();
      return br;
    } catch (const GeometryError& e) {
      br.stopped_on_failure = true;
      br.failed_omega = omega;
      br.failure = e.what();
      return br;
    }
  }
  return br;
}

}  // namespace vstates
