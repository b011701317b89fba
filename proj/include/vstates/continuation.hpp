#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "vstates/solver.hpp"

namespace vstates {

/// Cumulative Euclidean arclength over the given (Omega, a_1[, a_{2,1}]) tuples, starting at 0.
inline std::vector<double> arclength_tag(const std::vector<std::vector<double>>& coords) {
  std::vector<double> lam(coords.size(), 0.0);
  for (std::size_t k = 1; k < coords.size(); ++k) {
    require(coords[k].size() == coords[k - 1].size(), "arclength_tag: inconsistent coordinate sizes");
    const double d = detail::arc_distance(coords[k - 1], coords[k]);
    require(d > 0.0, "arclength_tag: coincident points");
    lam[k] = lam[k - 1] + d;
  }
  return lam;
}

template <class State>
std::vector<double> arclength_tag(const std::vector<State>& states) {
  std::vector<std::vector<double>> c;
  for (const auto& s : states) {
    if constexpr (std::is_same_v<State, SimplyState>)
      c.push_back(SimplyProblem::arc_coords(s));
    else
      c.push_back(DoublyProblem::arc_coords(s));
  }
  return arclength_tag(c);
}

/// Degree-four Lagrange basis at lam over five nodes.
inline std::array<double, 5> lagrange_weights(const std::array<double, 5>& nodes, double lam) {
  std::array<double, 5> w{};
  for (int i = 0; i < 5; ++i) {
    double v = 1.0;
    for (int j = 0; j < 5; ++j)
      if (j != i) v *= (lam - nodes[j]) / (nodes[i] - nodes[j]);
    w[i] = v;
  }
  return w;
}

struct Prediction {
  double omega = 0.0;
  Vec coeffs;
};

/// Interpolates Omega and every coefficient through five (lambda, omega, coeffs) samples.
inline Prediction lagrange_predict(const std::array<double, 5>& lambdas, const std::array<double, 5>& omegas,
                                   const std::array<Vec, 5>& coeffs, double lam) {
  for (int i = 1; i < 5; ++i) require(lambdas[i] > lambdas[i - 1], "lagrange_predict: lambdas must increase");
  const auto w = lagrange_weights(lambdas, lam);
  Prediction p;
  p.coeffs.assign(coeffs[0].size(), 0.0);
  for (int i = 0; i < 5; ++i) {
    // exact reproduction at a node
    if (lam == lambdas[i]) return {omegas[i], coeffs[i]};
    require(coeffs[i].size() == p.coeffs.size(), "lagrange_predict: inconsistent coefficient sizes");
  }
  for (int i = 0; i < 5; ++i) {
    p.omega += w[i] * omegas[i];
    for (std::size_t k = 0; k < p.coeffs.size(); ++k) p.coeffs[k] += w[i] * coeffs[i][k];
  }
  return p;
}

template <class State>
struct FoldLocation {
  double omega_c = 0.0;  // last Omega with an accepted state
  double omega_fail = 0.0;
  State state;
};

/// Bisection between a converged state and a failing Omega. A midpoint is accepted only if Newton
/// from the good state converges to a nontrivial state there and solving back at the good Omega
/// from that state recovers the good state (guards against jumping onto another sheet).
template <class Problem>
FoldLocation<typename Problem::State> locate_fold(const Problem& pb, const typename Problem::State& good,
                                                  double omega_fail, const NewtonConfig& cfg, double tol = 1e-5) {
  require(tol > 0.0, "locate_fold: tol must be positive");
  FoldLocation<typename Problem::State> out{good.omega, omega_fail, good};
  auto within = [](const Vec& a, const Vec& b) {
    double d = 0.0, s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      d = std::max(d, std::abs(a[k] - b[k]));
      s = std::max(s, std::abs(a[k]));
    }
    return d <= 1e-6 * std::max(1.0, s);
  };
  while (std::abs(out.omega_fail - out.omega_c) > tol) {
    const double mid = 0.5 * (out.omega_c + out.omega_fail);
    bool ok = false;
    try {
      const Vec x0 = Problem::coords(out.state);
      auto fwd = newton_solve(pb, mid, x0, cfg);
      if (fwd.report.classification == Classification::nontrivial) {
        auto back = newton_solve(pb, out.omega_c, Problem::coords(fwd.state), cfg);
        ok = within(Problem::coords(back.state), x0);
        if (ok) out.state = std::move(fwd.state);
      }
    } catch (const ConvergenceError&) {
    } catch (const GeometryError&) {
    }
    (ok ? out.omega_c : out.omega_fail) = mid;
  }
  return out;
}

/// Five converged states at omega_c + 4 eps, ..., omega_c, marched from `from` (a state on the
/// same sheet, beyond omega_c + 4 eps on the side of eps), tagged with arclength from the first.
template <class Problem>
Branch<typename Problem::State> fold_tail(const Problem& pb, const typename Problem::State& from, double omega_c,
                                          double eps, const NewtonConfig& cfg, double max_step = 5e-4) {
  require(eps != 0.0, "fold_tail: eps must be non-zero");
  require(max_step > 0.0, "fold_tail: max_step must be positive");
  Vec x = Problem::coords(from);
  double omega = from.omega;
  const double top = omega_c + 4.0 * eps;
  const int n_approach = int(std::ceil(std::abs(top - omega) / max_step));
  for (int k = 1; k <= n_approach; ++k) {
    const double target = omega + (top - omega) * k / n_approach;
    x = Problem::coords(newton_solve(pb, target, x, cfg).state);
  }
  Branch<typename Problem::State> tail;
  std::vector<typename Problem::State> states;
  for (int i = 4; i >= 0; --i) {
    auto res = newton_solve(pb, omega_c + i * eps, x, cfg);
    if (res.report.classification == Classification::trivial)
      throw ConvergenceError("fold_tail: collapsed onto the trivial root");
    x = Problem::coords(res.state);
    states.push_back(res.state);
    BranchPoint<typename Problem::State> pt;
    pt.omega = res.state.omega;
    pt.state = std::move(res.state);
    pt.report = res.report;
    tail.points.push_back(std::move(pt));
  }
  const auto lam = arclength_tag(states);
  for (std::size_t i = 0; i < lam.size(); ++i) tail.points[i].lambda = lam[i];
  tail.last_good_omega = tail.points.back().omega;
  return tail;
}

/// Continues a branch through a fold with the five-point Lagrange predictor. Each step predicts at
/// lambda_E + mean of the last four increments, corrects with Newton at the predicted Omega, and
/// rejects results within a quarter increment of the window (halving the step, at most 5 times).
template <class Problem>
Branch<typename Problem::State> fold_continue(const Problem& pb, const Branch<typename Problem::State>& tail, int steps,
                                              const NewtonConfig& cfg) {
  using State = typename Problem::State;
  require(tail.points.size() >= 5, "fold_continue: need at least five tail points");
  require(steps >= 0, "fold_continue: steps must be non-negative");
  std::vector<BranchPoint<State>> window(tail.points.end() - 5, tail.points.end());
  for (int i = 1; i < 5; ++i)
    require(window[i].lambda > window[i - 1].lambda, "fold_continue: tail lambdas must increase");
  // direction of travel in Omega while approaching the fold
  const double dir = window[4].omega >= window[3].omega ? 1.0 : -1.0;
  Branch<State> ext;
  ext.last_good_omega = window.back().omega;
  for (int s = 0; s < steps; ++s) {
    std::array<double, 5> lam, om;
    std::array<Vec, 5> cf;
    for (int i = 0; i < 5; ++i) {
      lam[i] = window[i].lambda;
      om[i] = window[i].omega;
      cf[i] = Problem::coords(window[i].state);
    }
    const double dlam = (lam[4] - lam[0]) / 4.0;
    const double min_dist = 0.25 * (lam[4] - lam[3]);
    const auto here = Problem::arc_coords(window[4].state);
    bool accepted = false;
    std::string why;
    double scale = 1.0;
    for (int attempt = 0; attempt <= 5 && !accepted; ++attempt, scale *= 0.5) {
      const auto pred = lagrange_predict(lam, om, cf, lam[4] + scale * dlam);
      try {
        auto res = newton_solve(pb, pred.omega, pred.coeffs, cfg);
        if (res.report.classification == Classification::trivial) {
          why = "collapsed onto the trivial root";
          continue;
        }
        const auto c = Problem::arc_coords(res.state);
        bool known = false;
        for (const auto& w : window)
          if (detail::arc_distance(Problem::arc_coords(w.state), c) < min_dist) known = true;
        if (known) {
          why = "returned to an already known state";
          continue;
        }
        BranchPoint<State> pt;
        pt.omega = res.state.omega;
        pt.lambda = lam[4] + detail::arc_distance(here, c);
        pt.past_fold = window[4].past_fold || (pt.omega - window[4].omega) * dir < 0.0;
        pt.state = std::move(res.state);
        pt.report = res.report;
        ext.points.push_back(pt);
        ext.last_good_omega = pt.omega;
        window.erase(window.begin());
        window.push_back(std::move(pt));
        accepted = true;
      } catch (const ConvergenceError& e) {
        why = e.what();
      } catch (const GeometryError& e) {
        why = e.what();
      }
    }
    if (!accepted) {
      ext.stopped_on_failure = true;
      ext.failure = "prediction failure after 5 step halvings (" + why + ")";
      return ext;
    }
  }
  return ext;
}

}  // namespace vstates
