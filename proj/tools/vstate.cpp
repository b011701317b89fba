// vstate: command-line front end for the vstates library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "vstates/vstates.hpp"

namespace vs = vstates;
using nlohmann::json;

namespace {

constexpr int exit_trivial = 5;

struct Options {
  double alpha = 0.5;
  std::optional<double> b;
  int m = 2;
  double omega = 0.0;
  double omega_start = 0.0, omega_end = 0.0, omega_step = 0.0;
  std::optional<int> r;
  bool fast = false;
  vs::NewtonConfig cfg;
  std::string quadrature = "product";
  double seed_a1 = 1e-3;
  std::string in, out;
  std::string format = "csv";
  int steps = 10;
  double eps = 1e-4;
  std::optional<double> omega_c, omega_fail, omega_stop;
  int index = -1;
  double b0_tol = 1e-13;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void emit(const Options& o, const json& j) {
  if (o.format == "json") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::cout << it.key() << "=";
    if (it->is_number_float())
      std::cout << num(it->get<double>());
    else
      std::cout << it->dump();
    std::cout << "\n";
  }
}

int resolution(const Options& o, bool doubly) {
  int r = o.r ? *o.r : (doubly ? 6 : 8);
  if (o.fast) r -= 2;
  return r;
}

vs::RunMeta make_meta(const Options& o, int r) {
  vs::RunMeta meta;
  meta.alpha = o.alpha;
  meta.b = o.b;
  meta.m = o.m;
  meta.r = r;
  meta.cfg = o.cfg;
  meta.cfg.quadrature = vs::io::parse_quadrature(o.quadrature);
  return meta;
}

vs::SimplyProblem make_problem(const vs::RunMeta& meta, vs::SimplyState*) {
  return vs::SimplyProblem(meta.alpha, vs::Discretization(meta.r, meta.m), meta.cfg.quadrature);
}
vs::DoublyProblem make_problem(const vs::RunMeta& meta, vs::DoublyState*) {
  return vs::DoublyProblem(meta.alpha, *meta.b, vs::Discretization(meta.r, meta.m), meta.cfg.quadrature);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw vs::DomainError("cannot open output file " + path);
  return f;
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

template <class State>
void write_branch(const Options& o, const vs::Branch<State>& br, const vs::RunMeta& meta, bool arc) {
  if (o.format == "csv") {
    auto f = open_out(o.out + ".csv");
    vs::write_branch_csv(f, br, meta, arc);
  }
  auto f = open_out(o.out + ".json");
  f << vs::branch_to_json(br, meta).dump(2) << "\n";
}

/// Calls fn(branch, meta) with the branch stored in `path` (.json or .csv) typed by its geometry.
template <class F>
int with_branch_file(const std::string& path, F&& fn) {
  std::ifstream f(path);
  if (!f) throw vs::DomainError("cannot open input file " + path);
  if (ends_with(path, ".json")) {
    const json j = json::parse(f);
    vs::RunMeta meta;
    if (j.at("params").at("b").is_null()) {
      const auto br = vs::branch_from_json<vs::SimplyState>(j, &meta);
      return fn(br, meta);
    }
    const auto br = vs::branch_from_json<vs::DoublyState>(j, &meta);
    return fn(br, meta);
  }
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  std::istringstream is(text);
  vs::RunMeta meta;
  if (text.find("kind=doubly") != std::string::npos) {
    const auto br = vs::read_branch_csv<vs::DoublyState>(is, &meta);
    return fn(br, meta);
  }
  const auto br = vs::read_branch_csv<vs::SimplyState>(is, &meta);
  return fn(br, meta);
}

/// Picks the point at `index` (negative counts from the end).
template <class State>
const vs::BranchPoint<State>& pick(const vs::Branch<State>& br, int index) {
  const int n = int(br.points.size());
  if (n == 0) throw vs::DomainError("input branch is empty");
  const int i = index < 0 ? n + index : index;
  if (i < 0 || i >= n) throw vs::DomainError("--index out of range");
  return br.points[i];
}

void apply_overrides(const CLI::App& sub, const Options& o, vs::RunMeta& meta) {
  if (sub.count("--fd-step")) meta.cfg.h = o.cfg.h;
  if (sub.count("--tol")) meta.cfg.tol = o.cfg.tol;
  if (sub.count("--max-iter")) meta.cfg.max_iter = o.cfg.max_iter;
  if (sub.count("--damping")) meta.cfg.damping = o.cfg.damping;
}

int cmd_eigen(const Options& o) {
  vs::GsqgParams p{o.alpha, o.b, o.m};
  p.validate();
  json j;
  if (!o.b) {
    j["omega"] = vs::omega_simply(o.m, o.alpha);
  } else {
    const auto e = vs::eigen_omegas(p);
    j["omega_plus"] = e.omega_plus;
    j["omega_minus"] = e.omega_minus;
    j["delta"] = e.delta;
    j["N"] = vs::symmetry_threshold(p);
    j["limiting_omega_minus"] = vs::limiting_omega_minus(*o.b, o.alpha);
  }
  j["b0"] = vs::b0_solve(o.alpha);
  emit(o, j);
  return 0;
}

int cmd_b0(const Options& o) {
  emit(o, json{{"alpha", o.alpha}, {"b0", vs::b0_solve(o.alpha, o.b0_tol)}});
  return 0;
}

int cmd_threshold(const Options& o) {
  if (!o.b) throw vs::DomainError("threshold requires --b");
  vs::GsqgParams p{o.alpha, o.b, o.m};
  const int n = vs::symmetry_threshold(p);
  emit(o, json{{"N", n}, {"E_N", vs::threshold_function(n, p)}});
  return 0;
}

template <class State>
int solve_impl(const Options& o, const std::optional<vs::BranchPoint<State>>& warm) {
  const auto meta = make_meta(o, resolution(o, vs::is_doubly_v<State>));
  const auto pb = make_problem(meta, static_cast<State*>(nullptr));
  vs::SolveResult<State> res = warm ? vs::newton_solve(pb, o.omega, std::decay_t<decltype(pb)>::coords(warm->state), meta.cfg)
                                    : vs::solve_nontrivial(pb, o.omega, meta.cfg, o.seed_a1);
  vs::Branch<State> br;
  vs::append_point<std::decay_t<decltype(pb)>>(br, res);
  write_branch(o, br, meta, false);
  auto f = open_out(o.out + "_boundary.csv");
  vs::write_boundary_csv(f, br.points.back().state, meta);
  std::cerr << "omega=" << num(o.omega) << " residual=" << num(res.report.final_residual)
            << " iterations=" << res.report.iterations << " " << vs::io::class_name(res.report.classification)
            << "\n";
  return res.report.classification == vs::Classification::trivial ? exit_trivial : 0;
}

int cmd_solve(const Options& o) {
  if (!o.in.empty()) {
    return with_branch_file(o.in, [&](const auto& br, const vs::RunMeta& m) {
      using State = std::decay_t<decltype(br.points.front().state)>;
      if (m.alpha != o.alpha || m.m != o.m || m.b != o.b || m.r != resolution(o, vs::is_doubly_v<State>))
        throw vs::DomainError("--in branch was computed with different parameters or resolution");
      return solve_impl<State>(o, pick(br, o.index));
    });
  }
  if (o.b) return solve_impl<vs::DoublyState>(o, std::nullopt);
  return solve_impl<vs::SimplyState>(o, std::nullopt);
}

template <class State>
int sweep_impl(const Options& o) {
  auto meta = make_meta(o, resolution(o, vs::is_doubly_v<State>));
  const auto pb = make_problem(meta, static_cast<State*>(nullptr));
  auto br = vs::sweep_branch(pb, o.omega_start, o.omega_step, o.omega_end, meta.cfg, o.seed_a1);
  if (br.stopped_on_failure) {
    meta.extra["failed_omega"] = br.failed_omega;
    meta.extra["failure"] = br.failure;
    std::cerr << "sweep stopped at omega=" << num(br.failed_omega) << ": " << br.failure << "\n";
  }
  write_branch(o, br, meta, false);
  std::cerr << br.points.size() << " states, last omega=" << num(br.last_good_omega) << "\n";
  return br.points.empty() ? 3 : 0;
}

int cmd_sweep(const Options& o) {
  if (o.b) return sweep_impl<vs::DoublyState>(o);
  return sweep_impl<vs::SimplyState>(o);
}

int cmd_continue(const CLI::App& sub, const Options& o) {
  if (o.in.empty()) throw vs::DomainError("continue requires --in");
  return with_branch_file(o.in, [&](const auto& br, vs::RunMeta meta) {
    using State = std::decay_t<decltype(br.points.front().state)>;
    apply_overrides(sub, o, meta);
    const auto pb = make_problem(meta, static_cast<State*>(nullptr));
    const auto& last = pick(br, -1);
    double omega_c;
    if (o.omega_c) {
      omega_c = *o.omega_c;
    } else {
      std::optional<double> fail = o.omega_fail;
      if (!fail && br.stopped_on_failure) fail = br.failed_omega;
      if (!fail && meta.extra.contains("failed_omega")) fail = meta.extra["failed_omega"].template get<double>();
      if (!fail) throw vs::DomainError("continue needs --omega-c, --omega-fail or a branch that stopped on failure");
      const auto fl = vs::locate_fold(pb, last.state, *fail, meta.cfg);
      omega_c = fl.omega_c;
      std::cerr << "fold located at omega_c=" << num(omega_c) << "\n";
    }
    const double eps = last.omega >= omega_c ? o.eps : -o.eps;
    auto tail = vs::fold_tail(pb, last.state, omega_c, eps, meta.cfg);
    vs::Branch<State> out = tail;
    out.points.back().past_fold = false;
    for (int s = 0; s < o.steps; ++s) {
      vs::Branch<State> window;
      window.points.assign(out.points.end() - 5, out.points.end());
      auto ext = vs::fold_continue(pb, window, 1, meta.cfg);
      if (ext.points.empty()) {
        out.stopped_on_failure = true;
        out.failure = ext.failure;
        std::cerr << "continuation stopped: " << ext.failure << "\n";
        break;
      }
      out.points.push_back(ext.points.front());
      out.last_good_omega = out.points.back().omega;
      if (o.omega_stop && (out.points.back().omega - *o.omega_stop) * (out.points.end()[-2].omega - *o.omega_stop) <= 0.0)
        break;
    }
    meta.extra["omega_c"] = omega_c;
    meta.extra["eps"] = eps;
    write_branch(o, out, meta, true);
    std::cerr << out.points.size() - 5 << " states beyond the tail, last omega=" << num(out.last_good_omega) << "\n";
    return out.points.size() > 5 ? 0 : 3;
  });
}

int cmd_dump_boundary(const Options& o) {
  if (o.in.empty()) throw vs::DomainError("dump-boundary requires --in");
  return with_branch_file(o.in, [&](const auto& br, const vs::RunMeta& meta) {
    const auto& p = pick(br, o.index);
    if (o.out.empty() || o.out == "-") {
      vs::write_boundary_csv(std::cout, p.state, meta);
    } else {
      auto f = open_out(o.out);
      vs::write_boundary_csv(f, p.state, meta);
    }
    return 0;
  });
}

void add_params(CLI::App* sub, Options& o, bool need_m = true) {
  sub->add_option("--alpha", o.alpha, "fractional order alpha in (0,1)")->required();
  sub->add_option("--b", o.b, "inner radius for a doubly-connected patch");
  auto* m = sub->add_option("--m", o.m, "fold symmetry");
  if (need_m) m->required();
}

void add_numerics(CLI::App* sub, Options& o) {
  sub->add_option("--r", o.r, "resolution exponent: N = m 2^r nodes (default 8 simply, 6 doubly)");
  sub->add_flag("--fast", o.fast, "lower r by two");
  sub->add_option("--fd-step", o.cfg.h, "finite-difference step h")->capture_default_str();
  sub->add_option("--tol", o.cfg.tol, "Newton tolerance")->capture_default_str();
  sub->add_option("--max-iter", o.cfg.max_iter, "Newton iteration cap")->capture_default_str();
  sub->add_option("--damping", o.cfg.damping, "Newton damping in (0,1]")->capture_default_str();
  sub->add_option("--quadrature", o.quadrature, "self-interaction rule")
      ->check(CLI::IsMember({"product", "trapezoid_skip"}))
      ->capture_default_str();
  sub->add_option("--seed-a1", o.seed_a1, "first rung of the perturbation ladder")->capture_default_str();
}

void add_format(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotating gSQG vortex patch equilibria"};
  app.set_version_flag("--version", std::string(vs::version));
  app.require_subcommand(1);
  Options o;

  auto* eigen = app.add_subcommand("eigen", "bifurcation velocities from the disc or annulus");
  add_params(eigen, o);
  add_format(eigen, o);

  auto* b0 = app.add_subcommand("b0", "critical inner radius b0(alpha)");
  b0->add_option("--alpha", o.alpha)->required();
  b0->add_option("--tol", o.b0_tol)->capture_default_str();
  add_format(b0, o);

  auto* thr = app.add_subcommand("threshold", "smallest m with two real simple eigenvalues");
  add_params(thr, o, false);
  add_format(thr, o);

  auto* solve = app.add_subcommand("solve", "single V-state at fixed omega");
  add_params(solve, o);
  add_numerics(solve, o);
  add_format(solve, o);
  solve->add_option("--omega", o.omega)->required();
  solve->add_option("--in", o.in, "branch file providing the initial guess");
  solve->add_option("--index", o.index, "point of --in to start from (negative counts from the end)");
  solve->add_option("--out", o.out, "output prefix")->required();

  auto* sweep = app.add_subcommand("sweep", "warm-started sweep in omega");
  add_params(sweep, o);
  add_numerics(sweep, o);
  add_format(sweep, o);
  sweep->add_option("--omega-start", o.omega_start)->required();
  sweep->add_option("--omega-end", o.omega_end)->required();
  sweep->add_option("--omega-step", o.omega_step)->required();
  sweep->add_option("--out", o.out, "output prefix")->required();

  auto* cont = app.add_subcommand("continue", "continue a branch through a fold");
  cont->add_option("--in", o.in, "branch file (.csv or .json) approaching the fold")->required();
  cont->add_option("--out", o.out, "output prefix")->required();
  cont->add_option("--steps", o.steps, "continuation steps")->capture_default_str();
  cont->add_option("--eps", o.eps, "spacing of the five tail states")->capture_default_str();
  cont->add_option("--omega-c", o.omega_c, "fold velocity (located by bisection when absent)");
  cont->add_option("--omega-fail", o.omega_fail, "first failing omega for the fold bisection");
  cont->add_option("--omega-end", o.omega_stop, "stop once the branch crosses this omega");
  cont->add_option("--fd-step", o.cfg.h);
  cont->add_option("--tol", o.cfg.tol);
  cont->add_option("--max-iter", o.cfg.max_iter);
  cont->add_option("--damping", o.cfg.damping);
  add_format(cont, o);

  auto* dump = app.add_subcommand("dump-boundary", "boundary samples of one branch point");
  dump->add_option("--in", o.in, "branch file")->required();
  dump->add_option("--index", o.index, "point index (negative counts from the end)");
  dump->add_option("--out", o.out, "output CSV (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return int(vs::ExitCode::domain);
  }

  try {
    if (*eigen) return cmd_eigen(o);
    if (*b0) return cmd_b0(o);
    if (*thr) return cmd_threshold(o);
    if (*solve) return cmd_solve(o);
    if (*sweep) return cmd_sweep(o);
    if (*cont) return cmd_continue(*cont, o);
    if (*dump) return cmd_dump_boundary(o);
  } catch (const vs::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return int(vs::ExitCode::domain);
  } catch (const vs::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return int(vs::ExitCode::convergence);
  } catch (const vs::GeometryError& e) {
    std::cerr << "geometry failure: " << e.what() << "\n";
    return int(vs::ExitCode::geometry);
  } catch (const json::exception& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return int(vs::ExitCode::domain);
  } catch (const std::logic_error& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return int(vs::ExitCode::domain);
  }
  return 0;
}
