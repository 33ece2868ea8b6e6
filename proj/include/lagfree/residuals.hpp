#ifndef LAGFREE_RESIDUALS_HPP
#define LAGFREE_RESIDUALS_HPP

// Verification functionals: Lagrangian and conformality defects, the
// structural equation div(g grad u) = 0, S^1-harmonicity of the angle,
// singular degrees, the three boundary conditions and the weak
// stationarity integral over subdomains.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lagfree/cplx2.hpp"
#include "lagfree/disc_mesh.hpp"
#include "lagfree/domain.hpp"
#include "lagfree/error.hpp"
#include "lagfree/examples.hpp"
#include "lagfree/hamiltonians.hpp"
#include "lagfree/quadrature.hpp"

namespace lagfree {

struct ResidualReport {
  std::string example;
  std::string domain;
  double h = 0.0;
  double lagrangian = 0.0;
  double conformality = 0.0;
  double structural = 0.0;
  double angle_div = 0.0;
  double angle_perp_div = 0.0;
  double legendrian = 0.0;
  double conormal = 0.0;
  double neumann_trace = 0.0;
  double stationarity = 0.0;

  std::vector<std::pair<std::string, double>> entries() const {
    return {{"lagrangian", lagrangian},       {"conformality", conformality},
            {"structural", structural},       {"angle_div", angle_div},
            {"angle_perp_div", angle_perp_div}, {"legendrian", legendrian},
            {"conormal", conormal},           {"neumann_trace", neumann_trace},
            {"stationarity", stationarity}};
  }
  bool valid() const {
    for (const auto& [k, v] : entries()) {
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
    }
    return std::isfinite(h) && h > 0.0;
  }
};

struct SingularMassRecord {
  Point2 point = Point2::Zero();
  double degree = 0.0;
  double flux_mass = 0.0;
  std::vector<double> radii_used;
  double degree_spread = 0.0;
  double flux_spread = 0.0;
  bool near_integer = false;  // |degree - round(degree)| <= 1e-3
};

// ---------------------------------------------------------------------------
// Convergence orders.

struct OrderFit {
  double order = 0.0;
  bool at_floor = false;  // every value already at roundoff level
  bool passes(double threshold) const { return at_floor || order >= threshold; }
};

/// Least-squares slope of log(value) against log(h). Values at or below the
/// floor are roundoff, for which no order can be measured.
inline OrderFit estimate_order(const std::vector<double>& h, const std::vector<double>& v, double floor = 1e-11) {
  if (h.size() != v.size() || h.size() < 2) fail(ErrorCode::InvalidParameter, "order fit needs two or more levels");
  OrderFit fit;
  fit.at_floor = std::all_of(v.begin(), v.end(), [floor](double x) { return x <= floor; });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(std::max(v[i], std::numeric_limits<double>::min()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

// ---------------------------------------------------------------------------
// Pointwise geometry.

struct GeometryResiduals {
  double lagrangian = 0.0;
  double conformality = 0.0;
};

namespace detail {

inline bool in_any_ball(const Point2& x, const std::vector<Ball2>& balls) {
  for (const Ball2& b : balls) {
    if ((x - b.center).norm() <= b.radius) return true;
  }
  return false;
}

inline bool triangle_meets_any_ball(const DiscMesh& m, std::size_t t, const std::vector<Ball2>& balls) {
  const Triangle& tri = m.triangles()[t];
  for (const Ball2& b : balls) {
    if (distance_to_triangle(b.center, m.nodes()[tri[0]], m.nodes()[tri[1]], m.nodes()[tri[2]]) <= b.radius) {
      return true;
    }
  }
  return false;
}

inline void accumulate_geometry(const TangentFrame& f, GeometryResiduals& out) {
  const double e2l = 0.5 * (norm_sq(f.e_x) + norm_sq(f.e_y));
  if (!(e2l > kDegenerateFrameTol)) return;  // branch point sample
  const double denom = e2l + 1e-300;
  out.lagrangian = std::max(out.lagrangian, std::abs(symplectic(f.e_x, f.e_y)) / denom);
  out.conformality = std::max(out.conformality,
                              (std::abs(dot(f.e_x, f.e_y)) + std::abs(norm_sq(f.e_x) - norm_sq(f.e_y))) / denom);
}

}  // namespace detail

/// Exact frames are evaluated at nodes outside the exclusion balls; without
/// them, element frames on triangles that do not meet the balls. A radius
/// of zero excludes exactly the node or the incident triangles.
inline GeometryResiduals pointwise_geometry_report(const DiscreteMap& u, const std::vector<Ball2>& exclude = {}) {
  u.validate();
  GeometryResiduals out;
  if (u.exact_frames) {
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      if (detail::in_any_ball(u.mesh->nodes()[i], exclude)) continue;
      detail::accumulate_geometry((*u.exact_frames)[i], out);
    }
    return out;
  }
  const auto frames = element_frames(u);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (detail::triangle_meets_any_ball(*u.mesh, t, exclude)) continue;
    detail::accumulate_geometry(frames[t], out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural equation and angle harmonicity.

namespace detail {

/// Weak residual of a C^2-valued vector field given per element as
/// (w_x, w_y), tested componentwise.
inline double componentwise_weak_residual(const DiscMesh& m, const std::vector<TangentFrame>& w,
                                          const std::vector<Ball2>& exclude) {
  std::vector<ElementField> comps(4, ElementField(w.size()));
  for (std::size_t t = 0; t < w.size(); ++t) {
    for (int k = 0; k < 4; ++k) comps[k][t] = Point2(w[t].e_x[k], w[t].e_y[k]);
  }
  return weak_divergence_residual(m, comps, exclude).value;
}

}  // namespace detail

/// Weak residual of div(g grad u) with P1 u and g interpolated at centroids.
inline double structural_residual(const DiscreteMap& u, const NodalComplexField& g,
                                  const std::vector<Ball2>& exclude = {}) {
  u.validate();
  if (g.values.size() != u.values.size()) fail(ErrorCode::InvalidParameter, "g needs one value per node");
  const DiscMesh& m = *u.mesh;
  if (u.exact_frames) {
    // g must be the conjugate of the map's own angle.
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      if (detail::in_any_ball(m.nodes()[i], exclude)) continue;
      const TangentFrame& f = (*u.exact_frames)[i];
      if (f.degenerate(kDegenerateFrameTol)) continue;
      const cplx expected = std::conj(lagrangian_angle(f).angle.value());
      if (std::abs(expected - g.values[i]) > 1e-6) {
        fail(ErrorCode::InconsistentAngle, "g disagrees with the angle of u at node " + std::to_string(i));
      }
    }
  }
  const auto grads = element_gradient(m, u.values);
  std::vector<TangentFrame> w(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[t];
    const cplx gc = (g.values[tri[0]] + g.values[tri[1]] + g.values[tri[2]]) / 3.0;
    w[t] = {gc * grads[t].dx, gc * grads[t].dy};
  }
  return detail::componentwise_weak_residual(m, w, exclude);
}

/// Exact route: triangle averages of g grad u from the closed-form example.
inline double structural_residual(const ExampleMap& e, const DiscMesh& m, const std::vector<Ball2>& exclude = {},
                                  int quad_n = 6) {
  const auto rule = quadrature::triangle_rule(quad_n);
  std::vector<TangentFrame> w(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (detail::triangle_meets_any_ball(m, t, exclude)) continue;
    const Triangle& tri = m.triangles()[t];
    TangentFrame acc;
    for (const auto& q : rule) {
      const Point2 x =
          q.bary[0] * m.nodes()[tri[0]] + q.bary[1] * m.nodes()[tri[1]] + q.bary[2] * m.nodes()[tri[2]];
      const TangentFrame f = e.frame(x);
      const cplx g = e.angle(x).conj().value();
      acc.e_x += q.weight * (g * f.e_x);
      acc.e_y += q.weight * (g * f.e_y);
    }
    w[t] = acc;
  }
  return detail::componentwise_weak_residual(m, w, exclude);
}

struct AngleHarmonicity {
  double angle_div = 0.0;       // weak divergence of i conj(g) grad g
  double angle_perp_div = 0.0;  // weak divergence of i conj(g) rot grad g
};

/// Per-element i conj(g) grad g from nodal unit values: with the phase
/// unwrapped inside each triangle, g = e^{i beta} gives -grad beta.
inline ElementField discrete_angle_flux(const NodalComplexField& g) {
  const DiscMesh& m = *g.mesh;
  ElementField w(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[t];
    const cplx g0 = g.values[tri[0]];
    const double beta[3] = {0.0, std::arg(g.values[tri[1]] * std::conj(g0)),
                            std::arg(g.values[tri[2]] * std::conj(g0))};
    Point2 grad = Point2::Zero();
    for (int k = 0; k < 3; ++k) grad += beta[k] * m.basis_gradient(t, k);
    w[t] = -grad;
  }
  return w;
}

inline void check_unit_modulus(const NodalComplexField& g, const std::vector<Ball2>& exclude) {
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (detail::in_any_ball(g.mesh->nodes()[i], exclude)) continue;
    if (std::abs(std::abs(g.values[i]) - 1.0) > 1e-6) {
      fail(ErrorCode::NotUnitModulus, "|g| != 1 at node " + std::to_string(i));
    }
  }
}

inline AngleHarmonicity angle_harmonicity(const NodalComplexField& g, const std::vector<Ball2>& exclude = {}) {
  if (!g.mesh || g.values.size() != g.mesh->num_nodes()) {
    fail(ErrorCode::InvalidParameter, "g needs one value per node");
  }
  check_unit_modulus(g, exclude);
  const ElementField w = discrete_angle_flux(g);
  return {weak_divergence_residual(*g.mesh, w, exclude).value,
          weak_divergence_residual(*g.mesh, rotate_perp(w), exclude).value};
}

/// Exact route: triangle averages of the closed-form i conj(g) grad g.
inline AngleHarmonicity angle_harmonicity(const ExampleMap& e, const DiscMesh& m,
                                          const std::vector<Ball2>& exclude = {}) {
  const PlaneField field = [&e, &exclude](const Point2& x) {
    return detail::in_any_ball(x, exclude) ? Point2(0.0, 0.0) : e.angle_flux(x);
  };
  const ElementField w = element_average_field(m, field);
  return {weak_divergence_residual(m, w, exclude).value, weak_divergence_residual(m, rotate_perp(w), exclude).value};
}

// ---------------------------------------------------------------------------
// Singular points.

/// degree = (1/2pi) circulation and flux_mass = flux of w around circles,
/// averaged over the radii.
inline SingularMassRecord singular_masses(const PlaneField& w, const Point2& point, const std::vector<double>& radii,
                                          int n_quad = 256) {
  if (radii.empty()) fail(ErrorCode::InvalidParameter, "singular_masses needs at least one radius");
  SingularMassRecord rec;
  rec.point = point;
  rec.radii_used = radii;
  double dmin = 1e300, dmax = -1e300, fmin = 1e300, fmax = -1e300;
  for (double r : radii) {
    const LoopIntegrals li = loop_integrals(w, point, r, n_quad);
    const double d = li.circulation / (2.0 * std::numbers::pi);
    rec.degree += d;
    rec.flux_mass += li.flux;
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
    fmin = std::min(fmin, li.flux);
    fmax = std::max(fmax, li.flux);
  }
  rec.degree /= static_cast<double>(radii.size());
  rec.flux_mass /= static_cast<double>(radii.size());
  rec.degree_spread = dmax - dmin;
  rec.flux_spread = fmax - fmin;
  rec.near_integer = std::abs(rec.degree - std::round(rec.degree)) <= 1e-3;
  return rec;
}

// ---------------------------------------------------------------------------
// Boundary conditions.

struct BoundaryResiduals {
  double legendrian = 0.0;     // max |<d_tau u, I N>| / |d_tau u|^2
  double conormal = 0.0;       // max |N ^ d_nu u| / |d_nu u|
  double neumann_trace = 0.0;  // max over test functions of |<i conj(g) d_nu g, phi>|
  std::vector<double> legendrian_per_node;
};

/// Test functions 1, cos k theta, sin k theta for k <= 4.
inline std::vector<std::function<double(double)>> boundary_test_functions() {
  std::vector<std::function<double(double)>> out{[](double) { return 1.0; }};
  for (int k = 1; k <= 4; ++k) {
    out.push_back([k](double t) { return std::cos(k * t); });
    out.push_back([k](double t) { return std::sin(k * t); });
  }
  return out;
}

namespace detail {

inline void accumulate_boundary(const AmbientVector& z, const AmbientVector& dtau, const AmbientVector& dnu,
                                const Domain& d, BoundaryResiduals& out) {
  const AmbientVector n = normal_at(d, z);
  const double tt = norm_sq(dtau);
  const double leg = tt > 0.0 ? std::abs(dot(dtau, apply_I(n))) / tt : 0.0;
  out.legendrian_per_node.push_back(leg);
  out.legendrian = std::max(out.legendrian, leg);
  const double nn = norm(dnu);
  if (nn > 0.0) {
    // |N ^ v| = |v - <v, N> N| for unit N.
    out.conormal = std::max(out.conormal, norm(dnu - dot(dnu, n) * n) / nn);
  }
}

inline double max_pairing(const DiscMesh& m, const ElementField& w, double collar_r0,
                          const std::vector<Ball2>& singular) {
  double worst = 0.0;
  for (const auto& phi : boundary_test_functions()) {
    worst = std::max(worst, std::abs(boundary_trace_pairing(m, w, phi, collar_r0, singular)));
  }
  return worst;
}

}  // namespace detail

/// Exact route: closed-form boundary derivatives at the boundary nodes of
/// the mesh and the exact angle field averaged over triangles.
inline BoundaryResiduals boundary_conditions_report(const ExampleMap& e, const DiscMesh& m, const Domain& d,
                                                    double collar_r0 = 0.7,
                                                    const std::vector<Ball2>& singular = {}) {
  BoundaryResiduals out;
  for (int node : m.boundary_cycle()) {
    const Point2& x = m.nodes()[node];
    const double th = std::atan2(x.y(), x.x());
    detail::accumulate_boundary(e.value(x), e.tangential_derivative(th), e.normal_derivative(th), d, out);
  }
  const PlaneField field = [&e, &singular](const Point2& x) {
    return detail::in_any_ball(x, singular) ? Point2(0.0, 0.0) : e.angle_flux(x);
  };
  out.neumann_trace = detail::max_pairing(m, element_average_field(m, field), collar_r0, singular);
  return out;
}

/// Discrete route: nodal frames (exact when sampled) and the unwrapped
/// discrete angle field of g.
inline BoundaryResiduals boundary_conditions_report(const DiscreteMap& u, const NodalComplexField& g,
                                                    const Domain& d, double collar_r0 = 0.7,
                                                    const std::vector<Ball2>& singular = {}) {
  u.validate();
  BoundaryResiduals out;
  const auto frames = nodal_frames(u);
  for (int node : u.mesh->boundary_cycle()) {
    const Point2& x = u.mesh->nodes()[node];
    const TangentFrame& f = frames[node];
    const AmbientVector dnu = x.x() * f.e_x + x.y() * f.e_y;
    const AmbientVector dtau = -x.y() * f.e_x + x.x() * f.e_y;
    detail::accumulate_boundary(u.values[node], dtau, dnu, d, out);
  }
  out.neumann_trace = detail::max_pairing(*u.mesh, discrete_angle_flux(g), collar_r0, singular);
  return out;
}

// ---------------------------------------------------------------------------
// Stationarity.

/// Subdomains omega of the disc: the full disc, a half-disc {x > c}, or an
/// annular sector {r0 < r <= r1, theta0 < theta < theta1}.
struct OmegaSpec {
  enum class Kind { FullDisc, HalfDisc, AnnularSector };
  Kind kind = Kind::FullDisc;
  double c = 0.0;
  double r0 = 0.0, r1 = 1.0;
  double theta0 = 0.0, theta1 = 2.0 * std::numbers::pi;

  static OmegaSpec full_disc() { return {}; }
  static OmegaSpec half_disc(double c) {
    if (!(c > -1.0 && c < 1.0)) fail(ErrorCode::InvalidParameter, "half-disc offset must lie in (-1, 1)");
    OmegaSpec s;
    s.kind = Kind::HalfDisc;
    s.c = c;
    return s;
  }
  static OmegaSpec annular_sector(double r0, double r1, double theta0, double theta1) {
    if (!(r0 >= 0.0 && r1 > r0 && r1 <= 1.0 && theta1 > theta0 && theta1 - theta0 <= 2.0 * std::numbers::pi)) {
      fail(ErrorCode::InvalidParameter, "annular sector needs 0 <= r0 < r1 <= 1 and a valid angle range");
    }
    OmegaSpec s;
    s.kind = Kind::AnnularSector;
    s.r0 = r0;
    s.r1 = r1;
    s.theta0 = theta0;
    s.theta1 = theta1;
    return s;
  }

  bool full_turn() const { return theta1 - theta0 >= 2.0 * std::numbers::pi - 1e-14; }

  bool contains(const Point2& x) const {
    switch (kind) {
      case Kind::FullDisc: return x.norm() <= 1.0 + 1e-12;
      case Kind::HalfDisc: return x.x() > c;
      case Kind::AnnularSector: {
        const double r = x.norm();
        if (!(r > r0 && r <= r1 + 1e-12)) return false;
        if (full_turn()) return true;
        double th = std::atan2(x.y(), x.x());
        while (th < theta0) th += 2.0 * std::numbers::pi;
        return th < theta1;
      }
    }
    return false;
  }

  /// Sample points of the part of the boundary of omega inside the open disc.
  std::vector<Point2> interior_boundary_samples(int n) const {
    std::vector<Point2> out;
    switch (kind) {
      case Kind::FullDisc: break;
      case Kind::HalfDisc: {
        const double half = std::sqrt(1.0 - c * c);
        for (int i = 0; i < n; ++i) out.emplace_back(c, -half + 2.0 * half * (i + 0.5) / n);
        break;
      }
      case Kind::AnnularSector: {
        auto arc = [&](double r) {
          for (int i = 0; i < n; ++i) {
            const double th = theta0 + (theta1 - theta0) * (i + 0.5) / n;
            out.emplace_back(r * std::cos(th), r * std::sin(th));
          }
        };
        if (r0 > 0.0) arc(r0);
        if (r1 < 1.0) arc(r1);
        if (!full_turn()) {
          for (double th : {theta0, theta1}) {
            for (int i = 0; i < n; ++i) {
              const double r = r0 + (r1 - r0) * (i + 0.5) / n;
              out.emplace_back(r * std::cos(th), r * std::sin(th));
            }
          }
        }
        break;
      }
    }
    return out;
  }
};

namespace detail {

/// P1 interpolation of a discrete map at a point of the disc.
inline std::optional<AmbientVector> interpolate(const DiscreteMap& u, const Point2& x) {
  const DiscMesh& m = *u.mesh;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[t];
    const Point2& a = m.nodes()[tri[0]];
    double lam[3];
    for (int k = 0; k < 3; ++k) lam[k] = (k == 0 ? 1.0 : 0.0) + m.basis_gradient(t, k).dot(x - a);
    if (lam[0] >= -1e-12 && lam[1] >= -1e-12 && lam[2] >= -1e-12) {
      return lam[0] * u.values[tri[0]] + lam[1] * u.values[tri[1]] + lam[2] * u.values[tri[2]];
    }
  }
  return std::nullopt;
}


/// Admissibility and support checks shared by both stationarity routes.
inline void check_hamiltonians(const std::vector<Hamiltonian>& fs, const Domain& d,
                               const std::vector<AmbientVector>& boundary_images,
                               const std::vector<AmbientVector>& cut_images) {
  for (const Hamiltonian& f : fs) {
    if (f.tag == Admissibility::BoundaryTangent && f.domain_name != d.name) {
      fail(ErrorCode::InadmissibleHamiltonian, f.name + " is tangent to '" + f.domain_name + "', not '" + d.name + "'");
    }
    const double res = admissibility_residual(f, d, boundary_images);
    if (res > 1e-6) {
      fail(ErrorCode::InadmissibleHamiltonian,
           f.name + " has admissibility residual " + std::to_string(res) + " on the boundary");
    }
    for (const AmbientVector& z : cut_images) {
      if (std::abs(f.value(z)) > 1e-14 || norm(f.gradient(z)) > 1e-14) {
        fail(ErrorCode::SupportViolation, f.name + " does not vanish on the image of the cut boundary");
      }
    }
  }
}

struct StationaritySums {
  std::vector<double> integral;  // one per f
  std::vector<double> hess_max;
  double energy = 0.0;  // ||grad u||^2 on omega
};

inline void accumulate_stationarity(const std::vector<Hamiltonian>& fs, const AmbientVector& z,
                                    const TangentFrame& f, double weight, StationaritySums& s) {
  s.energy += weight * (norm_sq(f.e_x) + norm_sq(f.e_y));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Eigen::Matrix4d H = fs[i].hessian(z);
    double v = 0.0;
    for (const AmbientVector* e : {&f.e_x, &f.e_y}) {
      v += dot(apply_I(AmbientVector::from_eigen(H * e->eigen())), *e);
    }
    s.integral[i] += weight * v;
    // Spectral norm, computed only where the Frobenius bound could raise the max.
    if (H.norm() > s.hess_max[i]) {
      const Eigen::Vector4d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(H, Eigen::EigenvaluesOnly).eigenvalues();
      s.hess_max[i] = std::max(s.hess_max[i], ev.cwiseAbs().maxCoeff());
    }
  }
}

inline double normalized_max(const StationaritySums& s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < s.integral.size(); ++i) {
    worst = std::max(worst, std::abs(s.integral[i]) / (s.hess_max[i] * s.energy + 1e-300));
  }
  return worst;
}

inline std::vector<AmbientVector> boundary_images_in(const DiscMesh& m, const OmegaSpec& omega,
                                                     const std::function<AmbientVector(int)>& value) {
  std::vector<AmbientVector> out;
  for (int node : m.boundary_cycle()) {
    if (omega.contains(m.nodes()[node])) out.push_back(value(node));
  }
  return out;
}

}  // namespace detail

/// Per-f raw integrals of sum_k <I Hess f(u) d_k u, d_k u> over omega and
/// their normalized maximum.
struct StationarityResult {
  double value = 0.0;
  std::vector<double> integrals;
};

/// Discrete route: midpoint rule on the P1 map over triangles whose
/// centroid lies in omega.
inline StationarityResult stationarity_test_detailed(const DiscreteMap& u, const Domain& d,
                                                     const std::vector<Hamiltonian>& fs,
                                                     const OmegaSpec& omega = OmegaSpec::full_disc()) {
  u.validate();
  const DiscMesh& m = *u.mesh;
  const auto bimg = detail::boundary_images_in(m, omega, [&u](int i) { return u.values[i]; });
  std::vector<AmbientVector> cut;
  for (const Point2& x : omega.interior_boundary_samples(64)) {
    if (auto z = detail::interpolate(u, x)) cut.push_back(*z);
  }
  detail::check_hamiltonians(fs, d, bimg, cut);

  detail::StationaritySums s{std::vector<double>(fs.size(), 0.0), std::vector<double>(fs.size(), 0.0), 0.0};
  const auto grads = element_gradient(m, u.values);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!omega.contains(m.centroid(t))) continue;
    const Triangle& tri = m.triangles()[t];
    const AmbientVector z = (1.0 / 3.0) * (u.values[tri[0]] + u.values[tri[1]] + u.values[tri[2]]);
    detail::accumulate_stationarity(fs, z, {grads[t].dx, grads[t].dy}, m.area(t), s);
  }
  return {detail::normalized_max(s), s.integral};
}

inline double stationarity_test(const DiscreteMap& u, const Domain& d, const std::vector<Hamiltonian>& fs,
                                const OmegaSpec& omega = OmegaSpec::full_disc()) {
  return stationarity_test_detailed(u, d, fs, omega).value;
}

namespace detail {

/// Tensor Gauss rule on the polar cells of the mesh layout (exact disc, not
/// the inscribed polygon), or on the triangles when there is no layout.
inline void for_each_disc_quadrature_point(const DiscMesh& m, int n,
                                           const std::function<void(const Point2&, double)>& fn) {
  const quadrature::Rule1d g = quadrature::gauss_legendre(n);
  if (m.polar()) {
    const PolarLayout& p = *m.polar();
    const double dth = 2.0 * std::numbers::pi / p.n_sectors;
    for (std::size_t k = 1; k < p.ring_radii.size(); ++k) {
      const double ra = p.ring_radii[k - 1], rb = p.ring_radii[k];
      for (int j = 0; j < p.n_sectors; ++j) {
        for (int a = 0; a < n; ++a) {
          const double r = 0.5 * (ra + rb) + 0.5 * (rb - ra) * g.nodes[a];
          for (int b = 0; b < n; ++b) {
            const double th = dth * (j + 0.5 + 0.5 * g.nodes[b]);
            const double w = 0.25 * g.weights[a] * g.weights[b] * (rb - ra) * dth * r;
            fn(Point2(r * std::cos(th), r * std::sin(th)), w);
          }
        }
      }
    }
    return;
  }
  const auto rule = quadrature::triangle_rule(n);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangles()[t];
    for (const auto& q : rule) {
      fn(q.bary[0] * m.nodes()[tri[0]] + q.bary[1] * m.nodes()[tri[1]] + q.bary[2] * m.nodes()[tri[2]],
         q.weight * m.area(t));
    }
  }
}

}  // namespace detail

/// The integrals alone, with no admissibility or support checks.
inline StationarityResult stationarity_integrals(const ExampleMap& e, const DiscMesh& m,
                                                 const std::vector<Hamiltonian>& fs,
                                                 const OmegaSpec& omega = OmegaSpec::full_disc(), int quad_n = 5) {
  detail::StationaritySums s{std::vector<double>(fs.size(), 0.0), std::vector<double>(fs.size(), 0.0), 0.0};
  detail::for_each_disc_quadrature_point(m, quad_n, [&](const Point2& x, double w) {
    if (!omega.contains(x)) return;
    detail::accumulate_stationarity(fs, e.value(x), e.frame(x), w, s);
  });
  return {detail::normalized_max(s), s.integral};
}

/// Exact route: closed-form values and frames with Gauss quadrature over the
/// polar cells of the mesh; only quadrature error remains.
inline StationarityResult stationarity_test_detailed(const ExampleMap& e, const DiscMesh& m, const Domain& d,
                                                     const std::vector<Hamiltonian>& fs,
                                                     const OmegaSpec& omega = OmegaSpec::full_disc(),
                                                     int quad_n = 5) {
  const auto bimg = detail::boundary_images_in(m, omega, [&e, &m](int i) { return e.value(m.nodes()[i]); });
  std::vector<AmbientVector> cut;
  for (const Point2& x : omega.interior_boundary_samples(64)) cut.push_back(e.value(x));
  detail::check_hamiltonians(fs, d, bimg, cut);
  return stationarity_integrals(e, m, fs, omega, quad_n);
}

inline double stationarity_test(const ExampleMap& e, const DiscMesh& m, const Domain& d,
                                const std::vector<Hamiltonian>& fs, const OmegaSpec& omega = OmegaSpec::full_disc(),
                                int quad_n = 5) {
  return stationarity_test_detailed(e, m, d, fs, omega, quad_n).value;
}

/// The two terms of the first variation in the exact route:
/// int <d u, d(I grad f o u)> = boundary + interior, with
/// boundary = int_{S^1} <d_nu u, I grad f(u)> and
/// interior = -int i conj(g) dg . d(f o u).
struct FirstVariationSplit {
  double boundary = 0.0;
  double interior = 0.0;
};

inline FirstVariationSplit first_variation_split(const ExampleMap& e, const DiscMesh& m, const Hamiltonian& f,
                                                 int quad_n = 5, int n_boundary = 2048) {
  FirstVariationSplit out;
  detail::for_each_disc_quadrature_point(m, quad_n, [&](const Point2& x, double w) {
    const AmbientVector grad = f.gradient(e.value(x));
    const TangentFrame fr = e.frame(x);
    const Point2 dfu(dot(grad, fr.e_x), dot(grad, fr.e_y));
    out.interior -= w * e.angle_flux(x).dot(dfu);
  });
  const double dth = 2.0 * std::numbers::pi / n_boundary;
  for (int k = 0; k < n_boundary; ++k) {
    const double th = k * dth;
    out.boundary += dth * dot(e.normal_derivative(th), apply_I(f.gradient(e.value_polar(1.0, th))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full reports.

struct ReportOptions {
  double exclusion_radius = 0.1;
  double collar_r0 = 0.7;
  int quad_n = 5;
  OmegaSpec omega = OmegaSpec::full_disc();
};

/// Admissible Hamiltonians for the example's free boundary: the ball batch,
/// or for the curve domain interior bumps plus the curve tangent family.
inline std::vector<Hamiltonian> default_test_batch(const ExampleMap& e, const Domain& d) {
  if (d.kind == DomainKind::LevelSet) return ball_test_batch();
  std::vector<AmbientVector> centers, curve;
  for (const Point2& x : {Point2(0, 0), Point2(0.3, 0.2), Point2(-0.4, 0.1), Point2(0.1, -0.4)}) {
    centers.push_back(e.value(x));
  }
  for (int k = 0; k < 256; ++k) curve.push_back(e.value_polar(1.0, 2.0 * std::numbers::pi * k / 256));
  auto fs = interior_bumps_near(centers, curve, 0.4);
  if (e.kind == ExampleKind::NonMinimal) {
    for (int w = 0; w <= 4; ++w) fs.push_back(nonminimal_curve_tangent(w));
  }
  return fs;
}

inline std::vector<Ball2> exclusion_balls(const ExampleMap& e, double radius) {
  std::vector<Ball2> out;
  for (const Point2& p : e.singular_points) out.push_back({p, radius});
  return out;
}

/// Every entry from closed-form fields on the given mesh.
inline ResidualReport exact_report(const ExampleMap& e, const MeshPtr& mesh, const Domain& d,
                                   const std::vector<Hamiltonian>& fs, const ReportOptions& opt = {}) {
  ResidualReport r;
  r.example = e.name;
  r.domain = d.name;
  r.h = mesh->h();
  const auto points = exclusion_balls(e, 0.0);
  const auto balls = exclusion_balls(e, opt.exclusion_radius);
  const GeometryResiduals geo = pointwise_geometry_report(sample(e, mesh), points);
  r.lagrangian = geo.lagrangian;
  r.conformality = geo.conformality;
  r.structural = structural_residual(e, *mesh, balls);
  const AngleHarmonicity ah = angle_harmonicity(e, *mesh, balls);
  r.angle_div = ah.angle_div;
  r.angle_perp_div = ah.angle_perp_div;
  const BoundaryResiduals b = boundary_conditions_report(e, *mesh, d, opt.collar_r0, balls);
  r.legendrian = b.legendrian;
  r.conormal = b.conormal;
  r.neumann_trace = b.neumann_trace;
  if (!fs.empty()) r.stationarity = stationarity_test(e, *mesh, d, fs, opt.omega, opt.quad_n);
  return r;
}

/// Every entry from the sampled P1 map and nodal angle.
inline ResidualReport discrete_report(const ExampleMap& e, const MeshPtr& mesh, const Domain& d,
                                      const std::vector<Hamiltonian>& fs, const ReportOptions& opt = {}) {
  ResidualReport r;
  r.example = e.name;
  r.domain = d.name;
  r.h = mesh->h();
  const auto balls = exclusion_balls(e, opt.exclusion_radius);
  DiscreteMap u = sample(e, mesh);
  const NodalComplexField g = sample_g(e, mesh);
  DiscreteMap p1 = u;
  p1.exact_frames.reset();
  const GeometryResiduals geo = pointwise_geometry_report(p1, balls);
  r.lagrangian = geo.lagrangian;
  r.conformality = geo.conformality;
  r.structural = structural_residual(u, g, balls);
  const AngleHarmonicity ah = angle_harmonicity(g, balls);
  r.angle_div = ah.angle_div;
  r.angle_perp_div = ah.angle_perp_div;
  const BoundaryResiduals b = boundary_conditions_report(p1, g, d, opt.collar_r0, balls);
  r.legendrian = b.legendrian;
  r.conormal = b.conormal;
  r.neumann_trace = b.neumann_trace;
  if (!fs.empty()) r.stationarity = stationarity_test(p1, d, fs, opt.omega);
  return r;
}

}  // namespace lagfree

#endif  // LAGFREE_RESIDUALS_HPP
