#ifndef LAGFREE_IO_HPP
#define LAGFREE_IO_HPP

// Run configuration, CSV tables and JSON records. Numbers are written with
// 17 significant digits so identical runs give identical files.

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lagfree/disc_mesh.hpp"
#include "lagfree/domain.hpp"
#include "lagfree/error.hpp"
#include "lagfree/examples.hpp"
#include "lagfree/residuals.hpp"
#include "lagfree/solver.hpp"

namespace lagfree {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Quote a CSV field when it holds a comma, quote or newline ("sw:1,2").
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  std::string command;
  std::string example = "sw:1,2";
  std::string domain = "ball";
  int n_rings = 12;
  int n_sectors = 48;
  double grading = 1.0;
  int refinements = 3;
  std::vector<unsigned> seeds{1};
  std::string output_dir = ".";
  double eps = 0.05;
  SolverConfig solver;

  static const std::set<std::string>& commands() {
    static const std::set<std::string> c{"verify-example", "boundary-report", "stationarity",
                                         "masses",         "rigidity",        "dump-mesh"};
    return c;
  }

  void validate() const;
};

/// "flat", "sw:p,q" or "nonminimal".
inline ExampleMap parse_example(const std::string& name) {
  if (name == "flat") return flat_disc(Eigen::Matrix2cd::Identity());
  if (name == "nonminimal") return nonminimal_map();
  if (name.rfind("sw:", 0) == 0) {
    int p = 0, q = 0;
    char tail = 0;
    if (std::sscanf(name.c_str() + 3, "%d,%d%c", &p, &q, &tail) == 2) {
      try {
        return sw_cone(p, q);
      } catch (const Error& e) {
        fail(ErrorCode::Config, "example: " + std::string(e.what()));
      }
    }
  }
  fail(ErrorCode::Config, "example: expected flat, sw:p,q or nonminimal, got '" + name + "'");
}

/// The ball carries the cones and flat discs; the stored boundary curve
/// belongs to the nonminimal map only.
inline Domain make_domain(const std::string& name, const ExampleMap& e) {
  if (name == "ball") {
    if (e.kind == ExampleKind::NonMinimal) {
      fail(ErrorCode::Config, "domain: the nonminimal map has no free boundary on the ball; use domain curve");
    }
    return unit_ball();
  }
  if (name == "curve") {
    if (e.kind != ExampleKind::NonMinimal) fail(ErrorCode::Config, "domain: curve is only valid with nonminimal");
    return curve_domain_from_map(e);
  }
  fail(ErrorCode::Config, "domain: expected ball or curve, got '" + name + "'");
}

inline void RunConfig::validate() const {
  if (!commands().count(command)) fail(ErrorCode::Config, "command: unknown command '" + command + "'");
  if (n_rings < 2 || n_sectors < 8 || !(grading >= 0.2 && grading <= 1.0)) {
    fail(ErrorCode::Config, "mesh: needs n_rings >= 2, n_sectors >= 8, grading in [0.2, 1]");
  }
  if (refinements < 1 || refinements > 6) fail(ErrorCode::Config, "refinements: must lie in [1, 6]");
  if (seeds.empty()) fail(ErrorCode::Config, "seeds: at least one seed is needed");
  if (!(eps >= 0.0 && eps <= 0.1)) fail(ErrorCode::Config, "eps: must lie in [0, 0.1]");
  if (output_dir.empty()) fail(ErrorCode::Config, "output_dir: must not be empty");
  if (command != "dump-mesh" && command != "rigidity") make_domain(domain, parse_example(example));
  try {
    solver.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, "solver: " + std::string(e.what()));
  }
}

namespace detail {

template <class T>
T config_value(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::Config, key + ": wrong type");
  }
}

inline void parse_mesh(RunConfig& c, const json& m) {
  if (!m.is_array() || m.size() != 3) fail(ErrorCode::Config, "mesh: expected [n_rings, n_sectors, grading]");
  try {
    c.n_rings = m[0].get<int>();
    c.n_sectors = m[1].get<int>();
    c.grading = m[2].get<double>();
  } catch (const json::exception&) {
    fail(ErrorCode::Config, "mesh: expected [n_rings, n_sectors, grading]");
  }
}

inline void parse_solver(SolverConfig& s, const json& j) {
  if (!j.is_object()) fail(ErrorCode::Config, "solver: expected an object");
  for (const auto& [key, v] : j.items()) {
    const std::string k = "solver." + key;
    if (key == "penalty_lagrangian") s.penalty_lagrangian = config_value<double>(j, key);
    else if (key == "penalty_boundary") s.penalty_boundary = config_value<double>(j, key);
    else if (key == "max_iters") s.max_iters = config_value<int>(j, key);
    else if (key == "grad_tol") s.grad_tol = config_value<double>(j, key);
    else if (key == "armijo") s.line_search.armijo = config_value<double>(j, key);
    else if (key == "shrink") s.line_search.shrink = config_value<double>(j, key);
    else if (key == "odd_symmetry") s.odd_symmetry = config_value<bool>(j, key);
    else if (key == "continuation") {
      s.continuation.clear();
      if (!v.is_array()) fail(ErrorCode::Config, k + ": expected a list of [lambda_1, lambda_2]");
      for (const json& st : v) {
        if (!st.is_array() || st.size() != 2 || !st[0].is_number() || !st[1].is_number()) {
          fail(ErrorCode::Config, k + ": expected a list of [lambda_1, lambda_2]");
        }
        s.continuation.emplace_back(st[0].get<double>(), st[1].get<double>());
      }
    } else {
      fail(ErrorCode::Config, k + ": unknown key");
    }
  }
}

}  // namespace detail

/// Unknown keys are errors so that a config file is a complete record.
inline RunConfig run_config_from_json(const json& j, RunConfig c = {}) {
  if (!j.is_object()) fail(ErrorCode::Config, "config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") c.command = detail::config_value<std::string>(j, key);
    else if (key == "example") c.example = detail::config_value<std::string>(j, key);
    else if (key == "domain") c.domain = detail::config_value<std::string>(j, key);
    else if (key == "mesh") detail::parse_mesh(c, v);
    else if (key == "refinements") c.refinements = detail::config_value<int>(j, key);
    else if (key == "seeds") c.seeds = detail::config_value<std::vector<unsigned>>(j, key);
    else if (key == "output_dir") c.output_dir = detail::config_value<std::string>(j, key);
    else if (key == "eps") c.eps = detail::config_value<double>(j, key);
    else if (key == "solver") detail::parse_solver(c.solver, v);
    else fail(ErrorCode::Config, key + ": unknown key");
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "config: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

inline json to_json(const SolverConfig& s) {
  json stages = json::array();
  for (const auto& [l1, l2] : s.continuation) stages.push_back({l1, l2});
  return {{"penalty_lagrangian", s.penalty_lagrangian},
          {"penalty_boundary", s.penalty_boundary},
          {"max_iters", s.max_iters},
          {"grad_tol", s.grad_tol},
          {"armijo", s.line_search.armijo},
          {"shrink", s.line_search.shrink},
          {"odd_symmetry", s.odd_symmetry},
          {"continuation", stages}};
}

inline json to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"example", c.example},
          {"domain", c.domain},
          {"mesh", {c.n_rings, c.n_sectors, c.grading}},
          {"refinements", c.refinements},
          {"seeds", c.seeds},
          {"output_dir", c.output_dir},
          {"eps", c.eps},
          {"solver", to_json(c.solver)}};
}

// ---------------------------------------------------------------------------
// Records.

/// Nodes, triangles, boundary edges; node values and the stored boundary
/// curve when given.
inline json mesh_to_json(const DiscMesh& m, const std::vector<AmbientVector>* values = nullptr,
                         const Domain* d = nullptr) {
  json j;
  json nodes = json::array(), tris = json::array(), edges = json::array();
  for (const Point2& x : m.nodes()) nodes.push_back({x.x(), x.y()});
  for (const Triangle& t : m.triangles()) tris.push_back({t[0], t[1], t[2]});
  for (const Edge& e : m.boundary_edges()) edges.push_back({e[0], e[1]});
  j["nodes"] = std::move(nodes);
  j["triangles"] = std::move(tris);
  j["boundary_edges"] = std::move(edges);
  if (values) {
    if (values->size() != m.num_nodes()) fail(ErrorCode::InvalidParameter, "one value per node expected");
    json vals = json::array();
    for (const AmbientVector& z : *values) vals.push_back({z.x1, z.y1, z.x2, z.y2});
    j["values"] = std::move(vals);
  }
  if (d && d->curve) {
    json pts = json::array(), nrm = json::array();
    for (const AmbientVector& z : d->curve->points) pts.push_back({z.x1, z.y1, z.x2, z.y2});
    for (const AmbientVector& z : d->curve->normals) nrm.push_back({z.x1, z.y1, z.x2, z.y2});
    j["curve_points"] = std::move(pts);
    j["curve_normals"] = std::move(nrm);
  }
  return j;
}

inline std::string report_csv(const std::vector<ResidualReport>& reports) {
  std::ostringstream out;
  out << "example,domain,h,check,value\n";
  for (const ResidualReport& r : reports) {
    for (const auto& [check, v] : r.entries()) {
      out << csv_field(r.example) << ',' << csv_field(r.domain) << ',' << format_double(r.h) << ',' << check << ',' << format_double(v)
          << '\n';
    }
  }
  return out.str();
}

inline std::string history_csv(const std::vector<HistoryEntry>& history) {
  std::ostringstream out;
  out << "iter,stage,E,grad_norm,lagrangian,boundary_violation\n";
  for (const HistoryEntry& h : history) {
    out << h.iter << ',' << h.stage << ',' << format_double(h.energy) << ',' << format_double(h.grad_norm) << ','
        << format_double(h.lagrangian) << ',' << format_double(h.boundary_violation) << '\n';
  }
  return out.str();
}

inline json to_json(const RigidityReport& r) {
  return {{"seed", r.seed},
          {"eps", r.eps},
          {"initial_distance", r.initial_distance},
          {"distance", r.distance},
          {"plane_is_lagrangian", r.plane_is_lagrangian},
          {"angle_variance", r.angle_variance},
          {"circle_defect", r.circle_defect},
          {"lagrangian", r.lagrangian},
          {"energy", r.energy},
          {"iterations", r.iterations},
          {"stalled", r.stalled},
          {"control", r.control},
          {"lagrangian_drift", r.lagrangian_drift},
          {"pass", r.pass}};
}

inline json to_json(const SingularMassRecord& s) {
  return {{"point", {s.point.x(), s.point.y()}},
          {"degree", s.degree},
          {"flux_mass", s.flux_mass},
          {"radii", s.radii_used},
          {"degree_spread", s.degree_spread},
          {"flux_spread", s.flux_spread},
          {"near_integer", s.near_integer}};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Config, "output_dir: cannot write '" + path + "'");
  out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace lagfree

#endif  // LAGFREE_IO_HPP
