#ifndef LAGFREE_SOLVER_HPP
#define LAGFREE_SOLVER_HPP

// Penalized Dirichlet energy descent over discrete maps, the Hamiltonian
// flow integrator, flat-disc diagnostics and the rigidity experiment.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lagfree/cplx2.hpp"
#include "lagfree/disc_mesh.hpp"
#include "lagfree/domain.hpp"
#include "lagfree/error.hpp"
#include "lagfree/examples.hpp"
#include "lagfree/hamiltonians.hpp"
#include "lagfree/residuals.hpp"

namespace lagfree {

struct LineSearch {
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_halvings = 60;
};

struct SolverConfig {
  double penalty_lagrangian = 10.0;  // lambda_1
  double penalty_boundary = 1e2;     // lambda_2
  int max_iters = 200;               // per continuation stage
  double grad_tol = 1e-9;
  LineSearch line_search;
  /// (lambda_1, lambda_2) per stage; empty means one stage at the penalties above.
  std::vector<std::pair<double, double>> continuation{{10.0, 1e2}, {1e2, 1e3}, {1e3, 1e4}};
  /// Lumped-mass shift of the Gauss-Newton preconditioner.
  double mass_shift = 1e-6;
  /// Keep iterates odd, u(-x) = -u(x). The equatorial disc is only a
  /// critical point of the free boundary energy: without this the descent
  /// slides off along translations to the constant maps.
  bool odd_symmetry = true;

  void validate() const {
    auto bad = [](double l1, double l2) { return !(l1 >= 0.0) || !(l2 > 0.0); };
    if (bad(penalty_lagrangian, penalty_boundary)) {
      fail(ErrorCode::Config, "penalty_lagrangian must be >= 0 and penalty_boundary > 0");
    }
    for (const auto& [l1, l2] : continuation) {
      if (bad(l1, l2)) fail(ErrorCode::Config, "continuation penalties must be >= 0 (lambda_1) and > 0 (lambda_2)");
    }
    if (!(grad_tol > 0.0)) fail(ErrorCode::Config, "grad_tol must be positive");
    if (max_iters < 0) fail(ErrorCode::Config, "max_iters must be non-negative");
    if (!(line_search.armijo > 0.0 && line_search.armijo < 1.0 && line_search.shrink > 0.0 &&
          line_search.shrink < 1.0)) {
      fail(ErrorCode::Config, "line search constants must lie in (0, 1)");
    }
  }

  std::vector<std::pair<double, double>> stages() const {
    if (continuation.empty()) return {{penalty_lagrangian, penalty_boundary}};
    return continuation;
  }
};

// ---------------------------------------------------------------------------
// Energy.

struct EnergyTerms {
  double dirichlet = 0.0;
  double lagrangian = 0.0;  // lambda_1 int |u^* omega|^2
  double boundary = 0.0;    // lambda_2 sum F(u)^2 w
  double total() const { return dirichlet + lagrangian + boundary; }
};

namespace detail {

inline void require_level_set(const Domain& d) {
  if (d.kind != DomainKind::LevelSet) fail(ErrorCode::Unsupported, "the boundary penalty needs a level-set domain");
}

inline double symplectic_density(const AmbientVector& gx, const AmbientVector& gy) { return dot(apply_I(gx), gy); }

}  // namespace detail

inline EnergyTerms energy_terms(const DiscreteMap& u, const Domain& d, double lambda1, double lambda2) {
  detail::require_level_set(d);
  const DiscMesh& m = *u.mesh;
  EnergyTerms e;
  const auto grads = element_gradient(m, u.values);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const double a = m.area(t);
    e.dirichlet += 0.5 * a * (norm_sq(grads[t].dx) + norm_sq(grads[t].dy));
    const double s = detail::symplectic_density(grads[t].dx, grads[t].dy);
    e.lagrangian += lambda1 * a * s * s;
  }
  for (int node : m.boundary_cycle()) {
    const double f = d.F(u.values[node]);
    e.boundary += lambda2 * m.boundary_weight(node) * f * f;
  }
  return e;
}

/// E = 1/2 int |grad u|^2 + lambda_1 int |u^* omega|^2 + lambda_2 sum_bnd F(u)^2 w
/// and its exact gradient with respect to the nodal values.
inline std::pair<double, std::vector<AmbientVector>> energy_and_gradient(const DiscreteMap& u, const Domain& d,
                                                                         double lambda1, double lambda2) {
  u.validate();
  detail::require_level_set(d);
  const DiscMesh& m = *u.mesh;
  std::vector<AmbientVector> G(u.values.size());
  const auto grads = element_gradient(m, u.values);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[t];
    const double a = m.area(t);
    const AmbientVector& gx = grads[t].dx;
    const AmbientVector& gy = grads[t].dy;
    const double s = detail::symplectic_density(gx, gy);
    // ds/dgx = -I gy, ds/dgy = I gx.
    const AmbientVector ds_dx = -1.0 * apply_I(gy);
    const AmbientVector ds_dy = apply_I(gx);
    for (int k = 0; k < 3; ++k) {
      const Point2& b = m.basis_gradient(t, k);
      G[tri[k]] += a * (b.x() * gx + b.y() * gy);
      G[tri[k]] += (2.0 * lambda1 * a * s) * (b.x() * ds_dx + b.y() * ds_dy);
    }
  }
  for (int node : m.boundary_cycle()) {
    const double f = d.F(u.values[node]);
    G[node] += (2.0 * lambda2 * m.boundary_weight(node) * f) * d.gradF(u.values[node]);
  }
  return {energy_terms(u, d, lambda1, lambda2).total(), std::move(G)};
}

inline std::pair<double, std::vector<AmbientVector>> energy_and_gradient(const DiscreteMap& u, const Domain& d,
                                                                         const SolverConfig& cfg) {
  return energy_and_gradient(u, d, cfg.penalty_lagrangian, cfg.penalty_boundary);
}

inline double max_boundary_violation(const DiscreteMap& u, const Domain& d) {
  double worst = 0.0;
  for (int node : u.mesh->boundary_cycle()) worst = std::max(worst, std::abs(d.F(u.values[node])));
  return worst;
}

// ---------------------------------------------------------------------------
// Minimization.

struct HistoryEntry {
  int iter = 0;
  int stage = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double lagrangian = 0.0;  // max pointwise Lagrangian defect over elements
  double boundary_violation = 0.0;
};

struct MinimizeResult {
  DiscreteMap u;
  std::vector<HistoryEntry> history;
  bool converged = false;
  bool stalled = false;  // line search failed; u is the best iterate so far
  int iterations = 0;
};

namespace detail {

inline double gradient_norm(const std::vector<AmbientVector>& G) {
  double s = 0.0;
  for (const AmbientVector& g : G) s += norm_sq(g);
  return std::sqrt(s);
}

/// Gauss-Newton matrix: stiffness (x) Id_4, the outer products of the
/// symplectic density gradients, the boundary constraint normals and a
/// lumped-mass shift.
inline Eigen::SparseMatrix<double> gauss_newton_matrix(const DiscreteMap& u, const Domain& d, double lambda1,
                                                       double lambda2, double mass_shift) {
  const DiscMesh& m = *u.mesh;
  const auto grads = element_gradient(m, u.values);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.num_triangles() * 9 * 20);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[t];
    const double a = m.area(t);
    const Eigen::Vector4d dsx = (-1.0 * apply_I(grads[t].dy)).eigen();
    const Eigen::Vector4d dsy = apply_I(grads[t].dx).eigen();
    Eigen::Vector4d J[3];
    for (int k = 0; k < 3; ++k) {
      const Point2& b = m.basis_gradient(t, k);
      J[k] = b.x() * dsx + b.y() * dsy;
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double kij = a * m.basis_gradient(t, i).dot(m.basis_gradient(t, j));
        const Eigen::Matrix4d block = kij * Eigen::Matrix4d::Identity() + (2.0 * lambda1 * a) * J[i] * J[j].transpose();
        for (int r = 0; r < 4; ++r) {
          for (int c = 0; c < 4; ++c) {
            if (block(r, c) != 0.0) trip.emplace_back(4 * tri[i] + r, 4 * tri[j] + c, block(r, c));
          }
        }
      }
    }
    for (int k = 0; k < 3; ++k) {
      for (int r = 0; r < 4; ++r) trip.emplace_back(4 * tri[k] + r, 4 * tri[k] + r, mass_shift * a / 3.0);
    }
  }
  for (int node : m.boundary_cycle()) {
    const Eigen::Vector4d n = d.gradF(u.values[node]).eigen();
    const Eigen::Matrix4d block = (2.0 * lambda2 * m.boundary_weight(node)) * n * n.transpose();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) trip.emplace_back(4 * node + r, 4 * node + c, block(r, c));
    }
  }
  Eigen::SparseMatrix<double> P(4 * u.values.size(), 4 * u.values.size());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

/// Index of the node at -x for every node x.
inline std::vector<int> antipodal_nodes(const DiscMesh& m) {
  std::vector<int> out(m.num_nodes(), -1);
  std::vector<int> order(m.num_nodes());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto key = [&m](int i) { return std::make_pair(m.nodes()[i].x(), m.nodes()[i].y()); };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    const Point2 target = -m.nodes()[i];
    auto it = std::lower_bound(order.begin(), order.end(), std::make_pair(target.x() - 1e-12, target.y() - 1e-12),
                               [&](int a, const std::pair<double, double>& k) { return key(a) < k; });
    for (; it != order.end() && m.nodes()[*it].x() <= target.x() + 1e-12; ++it) {
      if ((m.nodes()[*it] - target).norm() <= 1e-12) {
        out[i] = *it;
        break;
      }
    }
    if (out[i] < 0) fail(ErrorCode::Unsupported, "odd symmetry needs a mesh symmetric under x -> -x");
  }
  return out;
}

inline void make_odd(std::vector<AmbientVector>& v, const std::vector<int>& anti) {
  const std::vector<AmbientVector> src = v;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (src[i] - src[anti[i]]);
}

inline HistoryEntry history_entry(const DiscreteMap& u, const Domain& d, int iter, int stage, double E,
                                  const std::vector<AmbientVector>& G) {
  DiscreteMap p1 = u;
  p1.exact_frames.reset();
  return {iter, stage, E, gradient_norm(G), pointwise_geometry_report(p1).lagrangian, max_boundary_violation(u, d)};
}

}  // namespace detail

namespace detail {

inline void project_boundary_nodes(DiscreteMap& u, const Domain& d) {
  for (int node : u.mesh->boundary_cycle()) u.values[node] = project_to_boundary(d, u.values[node]);
}

/// Drop the normal component of a nodal field at boundary nodes.
inline void tangential_at_boundary(std::vector<AmbientVector>& v, const DiscreteMap& u, const Domain& d) {
  for (int node : u.mesh->boundary_cycle()) {
    const AmbientVector nrm = d.normal_field(u.values[node]);
    v[node] -= dot(v[node], nrm) * nrm;
  }
}

}  // namespace detail

/// Preconditioned descent with Armijo backtracking under the continuation
/// schedule. Boundary nodes are kept on the level set: the gradient is made
/// tangential there and trial points are projected back, so the boundary
/// penalty only shapes the preconditioner. Energy never increases within a
/// stage.
inline MinimizeResult minimize(const DiscreteMap& u0, const Domain& d, const SolverConfig& cfg) {
  cfg.validate();
  u0.validate();
  detail::require_level_set(d);
  MinimizeResult res;
  res.u = u0;
  if (cfg.max_iters == 0) return res;
  res.u.exact_frames.reset();
  const std::size_t n = u0.values.size();
  std::vector<int> anti;
  if (cfg.odd_symmetry) {
    anti = detail::antipodal_nodes(*u0.mesh);
    detail::make_odd(res.u.values, anti);
  }
  detail::project_boundary_nodes(res.u, d);

  auto evaluate = [&](double l1, double l2) {
    auto [E, G] = energy_and_gradient(res.u, d, l1, l2);
    detail::tangential_at_boundary(G, res.u, d);
    if (cfg.odd_symmetry) detail::make_odd(G, anti);
    return std::make_pair(E, std::move(G));
  };

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;
  const auto stages = cfg.stages();
  for (std::size_t stage = 0; stage < stages.size(); ++stage) {
    const auto [l1, l2] = stages[stage];
    auto [E, G] = evaluate(l1, l2);
    res.history.push_back(detail::history_entry(res.u, d, res.iterations, static_cast<int>(stage), E, G));
    bool stage_done = false;
    for (int it = 0; it < cfg.max_iters; ++it) {
      if (detail::gradient_norm(G) <= cfg.grad_tol) {
        stage_done = true;
        break;
      }
      const Eigen::SparseMatrix<double> P = detail::gauss_newton_matrix(res.u, d, l1, l2, cfg.mass_shift);
      if (!analyzed) {
        solver.analyzePattern(P);
        analyzed = true;
      }
      solver.factorize(P);
      Eigen::VectorXd g(4 * n);
      for (std::size_t i = 0; i < n; ++i) g.segment<4>(4 * i) = G[i].eigen();
      Eigen::VectorXd sol = solver.solve(g);
      if (solver.info() != Eigen::Success || !sol.allFinite()) sol = g;
      std::vector<AmbientVector> dir(n);
      for (std::size_t i = 0; i < n; ++i) dir[i] = -1.0 * AmbientVector::from_eigen(sol.segment<4>(4 * i));
      detail::tangential_at_boundary(dir, res.u, d);
      if (cfg.odd_symmetry) detail::make_odd(dir, anti);
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += dot(G[i], dir[i]);
      if (!(slope < 0.0)) {
        for (std::size_t i = 0; i < n; ++i) dir[i] = -1.0 * G[i];
        slope = -detail::gradient_norm(G) * detail::gradient_norm(G);
      }

      double alpha = 1.0;
      bool accepted = false;
      DiscreteMap trial = res.u;
      double E_trial = E;
      for (int k = 0; k <= cfg.line_search.max_halvings; ++k) {
        for (std::size_t i = 0; i < n; ++i) trial.values[i] = res.u.values[i] + alpha * dir[i];
        detail::project_boundary_nodes(trial, d);
        E_trial = energy_terms(trial, d, l1, l2).total();
        if (E_trial <= E + cfg.line_search.armijo * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= cfg.line_search.shrink;
      }
      if (!accepted) {
        res.stalled = true;
        return res;
      }
      ++res.iterations;
      const double decrease = E - E_trial;
      res.u = std::move(trial);
      std::tie(E, G) = evaluate(l1, l2);
      res.history.push_back(detail::history_entry(res.u, d, res.iterations, static_cast<int>(stage), E, G));
      // Newton decrement at roundoff: nothing left to gain in this stage.
      const double floor = 1e-14 * std::max(1.0, std::abs(E));
      if (decrease <= floor && -slope <= floor) {
        stage_done = true;
        break;
      }
    }
    if (stage + 1 == stages.size()) res.converged = stage_done || detail::gradient_norm(G) <= cfg.grad_tol;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Hamiltonian flow.

struct FlowDiagnostics {
  double energy = 0.0;  // 1/2 int |grad u|^2 of the P1 map
  double lagrangian = 0.0;
  double boundary_violation = 0.0;
};

struct FlowState {
  DiscreteMap u;
  double t = 0.0;
  FlowDiagnostics diagnostics;
  std::vector<FlowDiagnostics> per_step;
};

inline FlowDiagnostics flow_diagnostics(const DiscreteMap& u, const Domain& d) {
  FlowDiagnostics out;
  const auto grads = element_gradient(*u.mesh, u.values);
  for (std::size_t t = 0; t < grads.size(); ++t) {
    out.energy += 0.5 * u.mesh->area(t) * (norm_sq(grads[t].dx) + norm_sq(grads[t].dy));
  }
  out.lagrangian = pointwise_geometry_report(u).lagrangian;
  if (d.kind == DomainKind::LevelSet) out.boundary_violation = max_boundary_violation(u, d);
  return out;
}

inline FlowState make_flow_state(DiscreteMap u, const Domain& d) {
  u.validate();
  FlowState s;
  s.diagnostics = flow_diagnostics(u, d);
  s.u = std::move(u);
  return s;
}

/// One midpoint step of du/dt = I grad f(u) at every node. Exact frames, when
/// present, are carried by the linearized flow dF/dt = I Hess f(u) F, so the
/// Lagrangian defect measures only the integrator. Boundary nodes are then
/// projected back onto the domain boundary.
inline FlowState hamiltonian_flow_step(const FlowState& s, const Hamiltonian& f, double dt, const Domain& d) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidParameter, "dt must be positive");
  FlowState out = s;
  const std::size_t n = s.u.values.size();
  auto field = [&f](const AmbientVector& z) { return apply_I(f.gradient(z)); };
  auto lin = [&f](const AmbientVector& z, const AmbientVector& v) {
    return apply_I(AmbientVector::from_eigen(f.hessian(z) * v.eigen()));
  };
  for (std::size_t i = 0; i < n; ++i) {
    const AmbientVector z = s.u.values[i];
    const AmbientVector zm = z + (0.5 * dt) * field(z);
    out.u.values[i] = z + dt * field(zm);
    if (s.u.exact_frames) {
      const TangentFrame& F = (*s.u.exact_frames)[i];
      const TangentFrame Fm{F.e_x + (0.5 * dt) * lin(z, F.e_x), F.e_y + (0.5 * dt) * lin(z, F.e_y)};
      (*out.u.exact_frames)[i] = {F.e_x + dt * lin(zm, Fm.e_x), F.e_y + dt * lin(zm, Fm.e_y)};
    }
  }
  if (d.kind == DomainKind::LevelSet) {
    for (int node : s.u.mesh->boundary_cycle()) out.u.values[node] = project_to_boundary(d, out.u.values[node]);
  }
  out.t = s.t + dt;
  out.diagnostics = flow_diagnostics(out.u, d);
  out.per_step.push_back(out.diagnostics);
  return out;
}

// ---------------------------------------------------------------------------
// Flat-disc diagnostics.

struct FlatDiscFit {
  double distance = 0.0;
  Eigen::Vector4d b1 = Eigen::Vector4d::Zero();
  Eigen::Vector4d b2 = Eigen::Vector4d::Zero();
  double plane_is_lagrangian = 0.0;  // |omega(b1, b2)|
  double max_plane_distance = 0.0;
  double area_defect = 0.0;  // |area(u) - area(mesh)| / pi
};

/// Best-fit 2-plane through the origin of the node values, and the distance
/// of u from an isometric flat disc in it.
inline FlatDiscFit flat_disc_distance(const DiscreteMap& u) {
  u.validate();
  if (u.values.size() < 10) fail(ErrorCode::DegeneratePointCloud, "flat_disc_distance needs at least 10 nodes");
  Eigen::MatrixXd X(u.values.size(), 4);
  for (std::size_t i = 0; i < u.values.size(); ++i) X.row(i) = u.values[i].eigen().transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
  const Eigen::Vector4d sv = svd.singularValues();
  if (!(sv(1) > 1e-12 * sv(0))) fail(ErrorCode::DegeneratePointCloud, "node values do not span a plane");
  FlatDiscFit fit;
  fit.b1 = svd.matrixV().col(0);
  fit.b2 = svd.matrixV().col(1);
  fit.plane_is_lagrangian =
      std::abs(symplectic(AmbientVector::from_eigen(fit.b1), AmbientVector::from_eigen(fit.b2)));
  for (const AmbientVector& z : u.values) {
    const Eigen::Vector4d v = z.eigen();
    const Eigen::Vector4d perp = v - v.dot(fit.b1) * fit.b1 - v.dot(fit.b2) * fit.b2;
    fit.max_plane_distance = std::max(fit.max_plane_distance, perp.norm());
  }
  const DiscMesh& m = *u.mesh;
  double area = 0.0, ref = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[t];
    const Eigen::Vector4d a = u.values[tri[1]].eigen() - u.values[tri[0]].eigen();
    const Eigen::Vector4d b = u.values[tri[2]].eigen() - u.values[tri[0]].eigen();
    area += 0.5 * std::sqrt(std::max(0.0, a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b)));
    ref += m.area(t);
  }
  fit.area_defect = std::abs(area - ref) / std::numbers::pi;
  fit.distance = std::max(fit.max_plane_distance, fit.area_defect);
  return fit;
}

/// Max distance of boundary node values to the unit circle of the plane.
inline double great_circle_defect(const DiscreteMap& u, const FlatDiscFit& fit) {
  double worst = 0.0;
  for (int node : u.mesh->boundary_cycle()) {
    const Eigen::Vector4d v = u.values[node].eigen();
    const double p1 = v.dot(fit.b1), p2 = v.dot(fit.b2);
    const double perp = (v - p1 * fit.b1 - p2 * fit.b2).norm();
    worst = std::max(worst, std::hypot(perp, std::hypot(p1, p2) - 1.0));
  }
  return worst;
}

/// Area-weighted variance of the element Lagrangian angles about their mean.
inline double angle_variance(const DiscreteMap& u) {
  const auto frames = element_frames(u);
  const DiscMesh& m = *u.mesh;
  cplx mean = 0.0;
  double total = 0.0;
  std::vector<cplx> angles(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    angles[t] = lagrangian_angle(frames[t]).angle.value();
    mean += m.area(t) * angles[t];
    total += m.area(t);
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t t = 0; t < frames.size(); ++t) var += m.area(t) * std::norm(angles[t] - mean);
  return var / total;
}

// ---------------------------------------------------------------------------
// Perturbations and the rigidity experiment.

/// Transport the nodes along the flow of f for time t (RK4 with the given
/// number of steps), then put boundary nodes back on the domain boundary.
inline DiscreteMap flow_nodes(const DiscreteMap& u, const Hamiltonian& f, double t, const Domain& d, int steps = 16) {
  DiscreteMap out = u;
  out.exact_frames.reset();
  if (t == 0.0) return out;
  const double h = t / steps;
  auto field = [&f](const AmbientVector& z) { return apply_I(f.gradient(z)); };
  for (AmbientVector& z : out.values) {
    for (int k = 0; k < steps; ++k) {
      const AmbientVector k1 = field(z);
      const AmbientVector k2 = field(z + (0.5 * h) * k1);
      const AmbientVector k3 = field(z + (0.5 * h) * k2);
      const AmbientVector k4 = field(z + h * k3);
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  if (d.kind == DomainKind::LevelSet) {
    for (int node : u.mesh->boundary_cycle()) out.values[node] = project_to_boundary(d, out.values[node]);
  }
  return out;
}

/// A seeded Hopf-invariant generator with a non-constant radial profile.
/// These are even in z, so their flows preserve u(-x) = -u(x) and the
/// perturbation cannot excite the translation mode of the equatorial disc.
inline Hamiltonian random_admissible_hamiltonian(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  const std::array<double, 4> c{N(rng), N(rng), N(rng), N(rng)};
  return hopf_invariant_quadratic(c, Profile::quadratic(1.0, U(rng), U(rng)));
}

/// Composition of three seeded admissible flows of total amplitude eps:
/// each moves the nodes by at most eps / 3.
inline DiscreteMap perturb_by_hamiltonian_flows(const DiscreteMap& u, const Domain& d, double eps, unsigned seed) {
  std::mt19937_64 rng(seed);
  DiscreteMap out = u;
  out.exact_frames.reset();
  for (int k = 0; k < 3; ++k) {
    const Hamiltonian f = random_admissible_hamiltonian(rng);
    double speed = 0.0;
    for (const AmbientVector& z : out.values) speed = std::max(speed, norm(f.gradient(z)));
    if (speed > 0.0 && eps > 0.0) out = flow_nodes(out, f, eps / 3.0 / speed, d);
  }
  return out;
}

/// Flat disc with the normal displacement size * psi(x) I e1, psi a unit
/// dipole bump of radius rho around c. psi dx is not closed, so this
/// deformation is not generated by a Hamiltonian.
inline DiscreteMap normal_dipole_perturbation(const MeshPtr& mesh, const Point2& c, double rho, double size) {
  if (!(rho > 0.0)) fail(ErrorCode::InvalidParameter, "rho must be positive");
  const double t = 1.0 / std::sqrt(7.0);
  const double peak = t * std::pow(1.0 - t * t, 3);
  DiscreteMap u;
  u.mesh = mesh;
  u.values.reserve(mesh->num_nodes());
  for (const Point2& x : mesh->nodes()) {
    const Point2 w = (x - c) / rho;
    const double s = w.squaredNorm();
    const double psi = s < 1.0 ? w.x() * std::pow(1.0 - s, 3) / peak : 0.0;
    u.values.push_back(AmbientVector{x.x(), size * psi, x.y(), 0.0});
  }
  return u;
}

struct RigidityReport {
  unsigned seed = 0;
  double eps = 0.0;
  double initial_distance = 0.0;
  double distance = 0.0;
  double plane_is_lagrangian = 0.0;
  double angle_variance = 0.0;
  double circle_defect = 0.0;
  double lagrangian = 0.0;  // final max pointwise Lagrangian defect
  double energy = 0.0;      // final Dirichlet energy
  int iterations = 0;
  bool stalled = false;
  bool control = false;  // Lagrangian penalty disabled: no PASS claim
  bool lagrangian_drift = false;
  bool pass = false;
  std::vector<HistoryEntry> history;
};

inline RigidityReport rigidity_experiment(unsigned seed, double eps, const MeshPtr& mesh, const SolverConfig& cfg) {
  if (!(eps >= 0.0 && eps <= 0.1)) fail(ErrorCode::InvalidParameter, "eps must lie in [0, 0.1]");
  cfg.validate();
  const Domain ball = unit_ball();
  const ExampleMap flat = flat_disc(Eigen::Matrix2cd::Identity());
  DiscreteMap u0 = sample(flat, mesh);
  u0.exact_frames.reset();
  const DiscreteMap start = perturb_by_hamiltonian_flows(u0, ball, eps, seed);

  RigidityReport r;
  r.seed = seed;
  r.eps = eps;
  r.initial_distance = flat_disc_distance(start).distance;
  bool control = cfg.penalty_lagrangian == 0.0;
  for (const auto& [l1, l2] : cfg.stages()) control = control || l1 == 0.0;
  r.control = control;

  const MinimizeResult res = minimize(start, ball, cfg);
  const FlatDiscFit fit = flat_disc_distance(res.u);
  r.distance = fit.distance;
  r.plane_is_lagrangian = fit.plane_is_lagrangian;
  r.angle_variance = angle_variance(res.u);
  r.circle_defect = great_circle_defect(res.u, fit);
  r.lagrangian = pointwise_geometry_report(res.u).lagrangian;
  r.energy = energy_terms(res.u, ball, 0.0, 1.0).dirichlet;
  r.iterations = res.iterations;
  r.stalled = res.stalled;
  r.history = res.history;
  r.lagrangian_drift = r.lagrangian > 1e-6 || r.plane_is_lagrangian > 1e-6;
  r.pass = !control && r.distance <= 1e-3 && r.angle_variance <= 1e-6 && r.circle_defect <= 1e-3;
  return r;
}

}  // namespace lagfree

#endif  // LAGFREE_SOLVER_HPP
