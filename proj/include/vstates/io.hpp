#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "vstates/continuation.hpp"
#include "vstates/version.hpp"

namespace vstates {

/// Provenance written at the top of every output file.
struct RunMeta {
  double alpha = 0.5;
  std::optional<double> b;
  int m = 2;
  int r = 6;
  NewtonConfig cfg;
  nlohmann::json extra = nlohmann::json::object();
};

namespace io {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* quadrature_name(SelfQuadrature q) {
  return q == SelfQuadrature::product ? "product" : "trapezoid_skip";
}

inline SelfQuadrature parse_quadrature(const std::string& s) {
  if (s == "product") return SelfQuadrature::product;
  if (s == "trapezoid_skip") return SelfQuadrature::trapezoid_skip;
  throw DomainError("unknown quadrature rule: " + s);
}

inline void write_header(std::ostream& os, const RunMeta& meta) {
  const int n = meta.m << meta.r;
  os << "# vstate version=" << version << "\n";
  os << "# kind=" << (meta.b ? "doubly" : "simply") << " alpha=" << fmt17(meta.alpha);
  if (meta.b) os << " b=" << fmt17(*meta.b);
  os << " m=" << meta.m << " r=" << meta.r << " N=" << n << "\n";
  os << "# h=" << fmt17(meta.cfg.h) << " tol=" << fmt17(meta.cfg.tol) << " max_iter=" << meta.cfg.max_iter
     << " damping=" << fmt17(meta.cfg.damping) << " quadrature=" << quadrature_name(meta.cfg.quadrature) << "\n";
  if (!meta.extra.empty()) os << "# extra=" << meta.extra.dump() << "\n";
}

/// key=value pairs from '#' lines; `extra` keeps its JSON payload verbatim.
inline std::map<std::string, std::string> parse_header_line(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::string body = line.substr(1);
  const auto ex = body.find("extra=");
  if (ex != std::string::npos) {
    kv["extra"] = body.substr(ex + 6);
    return kv;
  }
  std::istringstream ss(body);
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

inline RunMeta meta_from_header(const std::map<std::string, std::string>& kv) {
  RunMeta meta;
  auto get = [&](const char* k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw DomainError(std::string("missing header field: ") + k);
    return it->second;
  };
  meta.alpha = std::stod(get("alpha"));
  if (kv.count("b")) meta.b = std::stod(get("b"));
  meta.m = std::stoi(get("m"));
  meta.r = std::stoi(get("r"));
  meta.cfg.h = std::stod(get("h"));
  meta.cfg.tol = std::stod(get("tol"));
  meta.cfg.max_iter = std::stoi(get("max_iter"));
  meta.cfg.damping = std::stod(get("damping"));
  meta.cfg.quadrature = parse_quadrature(get("quadrature"));
  if (kv.count("extra")) meta.extra = nlohmann::json::parse(get("extra"));
  return meta;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

inline const char* class_name(Classification c) { return c == Classification::trivial ? "trivial" : "nontrivial"; }

}  // namespace io

template <class State>
constexpr bool is_doubly_v = std::is_same_v<State, DoublyState>;

/// Branch CSV: omega,residual,iter,a_1..a_M (or a1_k then a2_k), plus lambda,past_fold when requested.
template <class State>
void write_branch_csv(std::ostream& os, const Branch<State>& br, const RunMeta& meta, bool with_arclength) {
  const int M = (1 << (meta.r - 1)) - 1;
  io::write_header(os, meta);
  os << "omega,residual,iter";
  if constexpr (is_doubly_v<State>) {
    for (int k = 1; k <= M; ++k) os << ",a1_" << k;
    for (int k = 1; k <= M; ++k) os << ",a2_" << k;
  } else {
    for (int k = 1; k <= M; ++k) os << ",a_" << k;
  }
  if (with_arclength) os << ",lambda,past_fold";
  os << "\n";
  for (const auto& p : br.points) {
    os << io::fmt17(p.omega) << ',' << io::fmt17(p.report.final_residual) << ',' << p.report.iterations;
    if constexpr (is_doubly_v<State>) {
      for (double v : p.state.outer) os << ',' << io::fmt17(v);
      for (double v : p.state.inner) os << ',' << io::fmt17(v);
    } else {
      for (double v : p.state.coeffs) os << ',' << io::fmt17(v);
    }
    if (with_arclength) os << ',' << io::fmt17(p.lambda) << ',' << (p.past_fold ? 1 : 0);
    os << "\n";
  }
}

template <class State>
Branch<State> read_branch_csv(std::istream& is, RunMeta* meta_out = nullptr) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::vector<std::string> cols;
  Branch<State> br;
  std::optional<RunMeta> meta;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (auto& [k, v] : io::parse_header_line(line)) kv[k] = v;
      continue;
    }
    if (cols.empty()) {
      cols = io::split_csv(line);
      meta = io::meta_from_header(kv);
      if (meta->b.has_value() != is_doubly_v<State>) throw DomainError("branch CSV: geometry does not match");
      continue;
    }
    const auto cells = io::split_csv(line);
    if (cells.size() != cols.size()) throw DomainError("branch CSV: ragged row");
    const int M = (1 << (meta->r - 1)) - 1;
    const bool arc = cols.size() >= 2 && cols[cols.size() - 2] == "lambda";
    BranchPoint<State> p;
    p.omega = std::stod(cells[0]);
    p.report.converged = true;
    p.report.final_residual = std::stod(cells[1]);
    p.report.iterations = std::stoi(cells[2]);
    const int ncoef = is_doubly_v<State> ? 2 * M : M;
    if (int(cells.size()) != 3 + ncoef + (arc ? 2 : 0)) throw DomainError("branch CSV: column count mismatch");
    Vec x(ncoef);
    for (int k = 0; k < ncoef; ++k) x[k] = std::stod(cells[3 + k]);
    if constexpr (is_doubly_v<State>) {
      p.state = {meta->alpha, *meta->b, meta->m, p.omega, Vec(x.begin(), x.begin() + M), Vec(x.begin() + M, x.end())};
    } else {
      p.state = {meta->alpha, meta->m, p.omega, 1.0, x};
    }
    p.report.classification = is_trivial(x) ? Classification::trivial : Classification::nontrivial;
    if (arc) {
      p.lambda = std::stod(cells[cells.size() - 2]);
      p.past_fold = cells.back() == "1";
    }
    br.points.push_back(std::move(p));
  }
  if (!meta) throw DomainError("branch CSV: missing column header");
  if (!br.points.empty()) br.last_good_omega = br.points.back().omega;
  if (meta_out) *meta_out = *meta;
  return br;
}

inline nlohmann::json meta_to_json(const RunMeta& meta) {
  nlohmann::json j;
  j["version"] = version;
  j["params"] = {{"alpha", meta.alpha}, {"m", meta.m}};
  j["params"]["b"] = meta.b ? nlohmann::json(*meta.b) : nlohmann::json(nullptr);
  j["discretization"] = {{"r", meta.r}, {"N", meta.m << meta.r}, {"M", (1 << (meta.r - 1)) - 1}};
  j["config"] = {{"h", meta.cfg.h},
                 {"tol", meta.cfg.tol},
                 {"max_iter", meta.cfg.max_iter},
                 {"damping", meta.cfg.damping},
                 {"quadrature", io::quadrature_name(meta.cfg.quadrature)}};
  j["extra"] = meta.extra;
  return j;
}

inline RunMeta meta_from_json(const nlohmann::json& j) {
  RunMeta meta;
  meta.alpha = j.at("params").at("alpha").get<double>();
  if (!j.at("params").at("b").is_null()) meta.b = j.at("params").at("b").get<double>();
  meta.m = j.at("params").at("m").get<int>();
  meta.r = j.at("discretization").at("r").get<int>();
  const auto& c = j.at("config");
  meta.cfg.h = c.at("h").get<double>();
  meta.cfg.tol = c.at("tol").get<double>();
  meta.cfg.max_iter = c.at("max_iter").get<int>();
  meta.cfg.damping = c.at("damping").get<double>();
  meta.cfg.quadrature = io::parse_quadrature(c.at("quadrature").get<std::string>());
  if (j.contains("extra")) meta.extra = j.at("extra");
  return meta;
}

template <class State>
nlohmann::json branch_to_json(const Branch<State>& br, const RunMeta& meta) {
  nlohmann::json j = meta_to_json(meta);
  j["stopped_on_failure"] = br.stopped_on_failure;
  j["last_good_omega"] = br.last_good_omega;
  if (br.stopped_on_failure) {
    j["failed_omega"] = br.failed_omega;
    j["failure"] = br.failure;
  }
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : br.points) {
    nlohmann::json q;
    q["omega"] = p.omega;
    q["lambda"] = p.lambda;
    q["past_fold"] = p.past_fold;
    q["report"] = {{"converged", p.report.converged},
                   {"iterations", p.report.iterations},
                   {"final_residual", p.report.final_residual},
                   {"classification", io::class_name(p.report.classification)}};
    if constexpr (is_doubly_v<State>) {
      q["outer"] = p.state.outer;
      q["inner"] = p.state.inner;
    } else {
      q["coeffs"] = p.state.coeffs;
    }
    pts.push_back(std::move(q));
  }
  return j;
}

template <class State>
Branch<State> branch_from_json(const nlohmann::json& j, RunMeta* meta_out = nullptr) {
  const RunMeta meta = meta_from_json(j);
  if (meta.b.has_value() != is_doubly_v<State>) throw DomainError("branch JSON: geometry does not match");
  Branch<State> br;
  br.stopped_on_failure = j.value("stopped_on_failure", false);
  br.last_good_omega = j.value("last_good_omega", 0.0);
  br.failed_omega = j.value("failed_omega", 0.0);
  br.failure = j.value("failure", std::string());
  for (const auto& q : j.at("points")) {
    BranchPoint<State> p;
    p.omega = q.at("omega").get<double>();
    p.lambda = q.at("lambda").get<double>();
    p.past_fold = q.at("past_fold").get<bool>();
    const auto& r = q.at("report");
    p.report.converged = r.at("converged").get<bool>();
    p.report.iterations = r.at("iterations").get<int>();
    p.report.final_residual = r.at("final_residual").get<double>();
    p.report.classification =
        r.at("classification").get<std::string>() == "trivial" ? Classification::trivial : Classification::nontrivial;
    if constexpr (is_doubly_v<State>) {
      p.state = {meta.alpha, *meta.b, meta.m, p.omega, q.at("outer").get<Vec>(), q.at("inner").get<Vec>()};
    } else {
      p.state = {meta.alpha, meta.m, p.omega, 1.0, q.at("coeffs").get<Vec>()};
    }
    br.points.push_back(std::move(p));
  }
  if (meta_out) *meta_out = meta;
  return br;
}

/// Boundary samples at the quadrature nodes: theta,x,y (simply) or theta,x1,y1,x2,y2 (doubly).
template <class State>
void write_boundary_csv(std::ostream& os, const State& s, const RunMeta& meta) {
  const Discretization disc(meta.r, meta.m);
  RunMeta m2 = meta;
  m2.extra["omega"] = s.omega;
  io::write_header(os, m2);
  if constexpr (is_doubly_v<State>)
    os << "theta,x1,y1,x2,y2\n";
  else
    os << "theta,x,y\n";
  for (int i = 0; i < disc.nodes(); ++i) {
    const double th = disc.theta(i);
    os << io::fmt17(th);
    if constexpr (is_doubly_v<State>) {
      const auto p1 = boundary_eval(s, 0, th), p2 = boundary_eval(s, 1, th);
      os << ',' << io::fmt17(p1.z.real()) << ',' << io::fmt17(p1.z.imag()) << ',' << io::fmt17(p2.z.real()) << ','
         << io::fmt17(p2.z.imag());
    } else {
      const auto p = boundary_eval(s, th);
      os << ',' << io::fmt17(p.z.real()) << ',' << io::fmt17(p.z.imag());
    }
    os << "\n";
  }
}

struct BoundaryTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> header;
};

inline BoundaryTable read_boundary_csv(std::istream& is) {
  BoundaryTable t;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (auto& [k, v] : io::parse_header_line(line)) t.header[k] = v;
      continue;
    }
    if (t.columns.empty()) {
      t.columns = io::split_csv(line);
      continue;
    }
    const auto cells = io::split_csv(line);
    if (cells.size() != t.columns.size()) throw DomainError("boundary CSV: ragged row");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::stod(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace vstates
