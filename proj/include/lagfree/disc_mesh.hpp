#ifndef LAGFREE_DISC_MESH_HPP
#define LAGFREE_DISC_MESH_HPP

// Triangulated unit-disc meshes with piecewise-linear fields, weak
// divergence residuals, the collar boundary pairing and loop integrals.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lagfree/cplx2.hpp"
#include "lagfree/error.hpp"
#include "lagfree/quadrature.hpp"

namespace lagfree {

using Point2 = Eigen::Vector2d;
using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// A disc in the parameter domain, used for exclusion balls around
/// singular points.
struct Ball2 {
  Point2 center = Point2::Zero();
  double radius = 0.0;
};

/// Ring/sector structure of meshes produced by build_polar_mesh.
struct PolarLayout {
  std::vector<double> ring_radii;  // ring_radii[0] = 0 (center node)
  int n_sectors = 0;
};

class DiscMesh {
 public:
  DiscMesh(std::vector<Point2> nodes, std::vector<Triangle> triangles,
           std::vector<Edge> boundary_edges,
           std::optional<PolarLayout> polar = std::nullopt)
      : nodes_(std::move(nodes)),
        triangles_(std::move(triangles)),
        boundary_edges_(std::move(boundary_edges)),
        polar_(std::move(polar)) {
    finalize();
  }

  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<bool>& boundary_flags() const { return is_boundary_; }
  const std::optional<PolarLayout>& polar() const { return polar_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  bool is_boundary(int node) const { return is_boundary_[node]; }

  double area(std::size_t t) const { return areas_[t]; }
  /// Gradient of the hat function of local vertex k on triangle t.
  const Point2& basis_gradient(std::size_t t, int k) const { return grads_[t][k]; }
  Point2 centroid(std::size_t t) const {
    const Triangle& tri = triangles_[t];
    return (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0;
  }
  /// Triangles incident to a node, ascending.
  const std::vector<int>& star(int node) const { return stars_[node]; }
  /// Boundary nodes in cycle order (counterclockwise).
  const std::vector<int>& boundary_cycle() const { return boundary_cycle_; }
  /// Length of the boundary polygon attributed to a node (half of each
  /// adjacent boundary edge).
  double boundary_weight(int node) const { return boundary_weights_[node]; }
  /// Longest edge.
  double h() const { return h_; }

 private:
  void finalize() {
    const std::size_t n = nodes_.size();
    areas_.resize(triangles_.size());
    grads_.resize(triangles_.size());
    stars_.assign(n, {});
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      const Triangle& tri = triangles_[t];
      for (int v : tri) {
        if (v < 0 || static_cast<std::size_t>(v) >= n) {
          fail(ErrorCode::InvalidParameter, "triangle references a missing node");
        }
      }
      const Point2& a = nodes_[tri[0]];
      const Point2& b = nodes_[tri[1]];
      const Point2& c = nodes_[tri[2]];
      const double twice = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
      if (!(0.5 * twice >= 1e-14)) {
        fail(ErrorCode::InvalidParameter,
             "triangle " + std::to_string(t) + " has non-positive signed area");
      }
      areas_[t] = 0.5 * twice;
      // grad of hat k is the inward-rotated opposite edge over twice the area.
      for (int k = 0; k < 3; ++k) {
        const Point2& p = nodes_[tri[(k + 1) % 3]];
        const Point2& q = nodes_[tri[(k + 2) % 3]];
        grads_[t][k] = Point2(p.y() - q.y(), q.x() - p.x()) / twice;
      }
      for (int k = 0; k < 3; ++k) {
        stars_[tri[k]].push_back(static_cast<int>(t));
        h_ = std::max(h_, (nodes_[tri[k]] - nodes_[tri[(k + 1) % 3]]).norm());
      }
    }

    is_boundary_.assign(n, false);
    boundary_weights_.assign(n, 0.0);
    std::vector<int> next(n, -1);
    for (const Edge& e : boundary_edges_) {
      is_boundary_[e[0]] = true;
      is_boundary_[e[1]] = true;
      if (next[e[0]] != -1) {
        fail(ErrorCode::InvalidParameter, "boundary edges do not form a simple cycle");
      }
      next[e[0]] = e[1];
      const double len = (nodes_[e[0]] - nodes_[e[1]]).norm();
      boundary_weights_[e[0]] += 0.5 * len;
      boundary_weights_[e[1]] += 0.5 * len;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (is_boundary_[i] && std::abs(nodes_[i].norm() - 1.0) > 1e-12) {
        fail(ErrorCode::InvalidParameter, "boundary node off the unit circle");
      }
    }
    if (!boundary_edges_.empty()) {
      const int start = boundary_edges_.front()[0];
      int cur = start;
      do {
        boundary_cycle_.push_back(cur);
        cur = next[cur];
        if (cur == -1 || boundary_cycle_.size() > boundary_edges_.size()) {
          fail(ErrorCode::InvalidParameter, "boundary edges do not form a single cycle");
        }
      } while (cur != start);
      if (boundary_cycle_.size() != boundary_edges_.size()) {
        fail(ErrorCode::InvalidParameter, "boundary edges do not form a single cycle");
      }
    }
    check_conforming();
  }

  void check_conforming() const {
    std::vector<std::array<int, 3>> edges;  // (lo, hi, count-key)
    edges.reserve(3 * triangles_.size());
    for (const Triangle& tri : triangles_) {
      for (int k = 0; k < 3; ++k) {
        const int a = tri[k];
        const int b = tri[(k + 1) % 3];
        edges.push_back({std::min(a, b), std::max(a, b), 0});
      }
    }
    std::sort(edges.begin(), edges.end());
    std::size_t boundary_count = 0;
    for (std::size_t i = 0; i < edges.size();) {
      std::size_t j = i;
      while (j < edges.size() && edges[j][0] == edges[i][0] && edges[j][1] == edges[i][1]) ++j;
      const std::size_t mult = j - i;
      if (mult > 2) fail(ErrorCode::InvalidParameter, "edge shared by more than two triangles");
      if (mult == 1) {
        ++boundary_count;
        if (!is_boundary_[edges[i][0]] || !is_boundary_[edges[i][1]]) {
          fail(ErrorCode::InvalidParameter, "non-conforming mesh: interior edge with one triangle");
        }
      }
      i = j;
    }
    if (boundary_count != boundary_edges_.size()) {
      fail(ErrorCode::InvalidParameter, "boundary edge list does not match mesh boundary");
    }
  }

  std::vector<Point2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> boundary_edges_;
  std::optional<PolarLayout> polar_;

  std::vector<double> areas_;
  std::vector<std::array<Point2, 3>> grads_;
  std::vector<std::vector<int>> stars_;
  std::vector<bool> is_boundary_;
  std::vector<int> boundary_cycle_;
  std::vector<double> boundary_weights_;
  double h_ = 0.0;
};

using MeshPtr = std::shared_ptr<const DiscMesh>;

/// Structured polar mesh: a center node plus n_rings rings of n_sectors
/// nodes, ring radii (k/n_rings)^(1/grading).
inline MeshPtr build_polar_mesh(int n_rings, int n_sectors, double grading) {
  if (n_rings < 2 || n_sectors < 8 || !(grading >= 0.2 && grading <= 1.0)) {
    fail(ErrorCode::InvalidParameter, "build_polar_mesh needs n_rings >= 2, n_sectors >= 8, grading in [0.2, 1]");
  }
  PolarLayout layout;
  layout.n_sectors = n_sectors;
  layout.ring_radii.push_back(0.0);
  for (int k = 1; k <= n_rings; ++k) {
    layout.ring_radii.push_back(k == n_rings ? 1.0 : std::pow(static_cast<double>(k) / n_rings, 1.0 / grading));
  }

  std::vector<Point2> nodes;
  nodes.reserve(1 + static_cast<std::size_t>(n_rings) * n_sectors);
  nodes.emplace_back(0.0, 0.0);
  for (int k = 1; k <= n_rings; ++k) {
    const double r = layout.ring_radii[k];
    for (int j = 0; j < n_sectors; ++j) {
      const double th = 2.0 * std::numbers::pi * j / n_sectors;
      nodes.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  auto id = [n_sectors](int ring, int sector) {
    return 1 + (ring - 1) * n_sectors + ((sector % n_sectors) + n_sectors) % n_sectors;
  };

  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(n_sectors) * (2 * n_rings - 1));
  for (int j = 0; j < n_sectors; ++j) tris.push_back({0, id(1, j), id(1, j + 1)});
  for (int k = 1; k < n_rings; ++k) {
    for (int j = 0; j < n_sectors; ++j) {
      tris.push_back({id(k, j), id(k + 1, j), id(k + 1, j + 1)});
      tris.push_back({id(k, j), id(k + 1, j + 1), id(k, j + 1)});
    }
  }
  std::vector<Edge> bnd;
  for (int j = 0; j < n_sectors; ++j) bnd.push_back({id(n_rings, j), id(n_rings, j + 1)});
  return std::make_shared<const DiscMesh>(std::move(nodes), std::move(tris), std::move(bnd), std::move(layout));
}

/// Piecewise-linear gradient (d_x, d_y) on every triangle; T is any type
/// closed under addition and scaling by double (double, cplx, AmbientVector).
template <typename T>
struct ElementGradient {
  T dx;
  T dy;
};

template <typename T>
std::vector<ElementGradient<T>> element_gradient(const DiscMesh& mesh, const std::vector<T>& field) {
  if (field.size() != mesh.num_nodes()) {
    fail(ErrorCode::InvalidParameter, "field size does not match node count");
  }
  std::vector<ElementGradient<T>> out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    T dx = mesh.basis_gradient(t, 0).x() * field[tri[0]];
    T dy = mesh.basis_gradient(t, 0).y() * field[tri[0]];
    for (int k = 1; k < 3; ++k) {
      dx = dx + mesh.basis_gradient(t, k).x() * field[tri[k]];
      dy = dy + mesh.basis_gradient(t, k).y() * field[tri[k]];
    }
    out[t] = {dx, dy};
  }
  return out;
}

/// A real vector field given by one (averaged) value per triangle.
using ElementField = std::vector<Point2>;

using PlaneField = std::function<Point2(const Point2&)>;

/// Value at the centroid of each triangle.
inline ElementField element_centroid_field(const DiscMesh& mesh, const PlaneField& w) {
  ElementField out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out[t] = w(mesh.centroid(t));
  return out;
}

/// Triangle average of w with an n x n collapsed Gauss rule.
inline ElementField element_average_field(const DiscMesh& mesh, const PlaneField& w, int n = 6) {
  const auto rule = quadrature::triangle_rule(n);
  ElementField out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    Point2 acc = Point2::Zero();
    for (const auto& q : rule) {
      const Point2 x = q.bary[0] * mesh.nodes()[tri[0]] + q.bary[1] * mesh.nodes()[tri[1]] +
                       q.bary[2] * mesh.nodes()[tri[2]];
      acc += q.weight * w(x);
    }
    out[t] = acc;
  }
  return out;
}

/// Rotation by +90 degrees, (a, b) -> (-b, a).
inline ElementField rotate_perp(const ElementField& w) {
  ElementField out(w.size());
  for (std::size_t t = 0; t < w.size(); ++t) out[t] = Point2(-w[t].y(), w[t].x());
  return out;
}

inline double distance_to_triangle(const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
  auto seg = [&p](const Point2& u, const Point2& v) {
    const Point2 d = v - u;
    const double s = std::clamp((p - u).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return (p - (u + s * d)).norm();
  };
  auto side = [](const Point2& u, const Point2& v, const Point2& q) {
    return (v.x() - u.x()) * (q.y() - u.y()) - (q.x() - u.x()) * (v.y() - u.y());
  };
  if (side(a, b, p) >= 0 && side(b, c, p) >= 0 && side(c, a, p) >= 0) return 0.0;
  return std::min({seg(a, b), seg(b, c), seg(c, a)});
}

struct WeakResidual {
  double value = 0.0;
  std::size_t tested = 0;  // number of hat functions used
  bool empty() const { return tested == 0; }
};

namespace detail {

inline bool star_clear_of(const DiscMesh& mesh, int node, const std::vector<Ball2>& exclude) {
  for (const Ball2& ball : exclude) {
    for (int t : mesh.star(node)) {
      const Triangle& tri = mesh.triangles()[t];
      if (distance_to_triangle(ball.center, mesh.nodes()[tri[0]], mesh.nodes()[tri[1]],
                               mesh.nodes()[tri[2]]) < ball.radius) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Max over interior hat functions phi (support clear of every exclusion
/// ball) of |int w . grad phi| / (||w||_{L2(supp phi)} ||grad phi||_{L2} + eps).
inline WeakResidual weak_divergence_residual(const DiscMesh& mesh, const ElementField& w,
                                             const std::vector<Ball2>& exclude = {}) {
  if (w.size() != mesh.num_triangles()) {
    fail(ErrorCode::InvalidParameter, "element field size does not match triangle count");
  }
  WeakResidual res;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const int node = static_cast<int>(i);
    if (mesh.is_boundary(node)) continue;
    if (!detail::star_clear_of(mesh, node, exclude)) continue;
    double pairing = 0.0, w_sq = 0.0, g_sq = 0.0;
    for (int t : mesh.star(node)) {
      const Triangle& tri = mesh.triangles()[t];
      const int k = tri[0] == node ? 0 : (tri[1] == node ? 1 : 2);
      const Point2& g = mesh.basis_gradient(t, k);
      const double a = mesh.area(t);
      pairing += a * w[t].dot(g);
      w_sq += a * w[t].squaredNorm();
      g_sq += a * g.squaredNorm();
    }
    ++res.tested;
    res.value = std::max(res.value, std::abs(pairing) / (std::sqrt(w_sq) * std::sqrt(g_sq) + eps));
  }
  return res;
}

/// Vector-valued version: max over components and interior hat functions of
/// |int w_k . grad phi| / (||w||_{L2(supp phi)} ||grad phi||_{L2} + eps) with
/// the norm of the whole field, so a component that vanishes identically
/// is not measured against its own discretization noise.
inline WeakResidual weak_divergence_residual(const DiscMesh& mesh, const std::vector<ElementField>& w,
                                             const std::vector<Ball2>& exclude = {}) {
  for (const ElementField& c : w) {
    if (c.size() != mesh.num_triangles()) {
      fail(ErrorCode::InvalidParameter, "element field size does not match triangle count");
    }
  }
  WeakResidual res;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> pairing(w.size());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const int node = static_cast<int>(i);
    if (mesh.is_boundary(node)) continue;
    if (!detail::star_clear_of(mesh, node, exclude)) continue;
    std::fill(pairing.begin(), pairing.end(), 0.0);
    double w_sq = 0.0, g_sq = 0.0;
    for (int t : mesh.star(node)) {
      const Triangle& tri = mesh.triangles()[t];
      const int k = tri[0] == node ? 0 : (tri[1] == node ? 1 : 2);
      const Point2& g = mesh.basis_gradient(t, k);
      const double a = mesh.area(t);
      for (std::size_t c = 0; c < w.size(); ++c) {
        pairing[c] += a * w[c][t].dot(g);
        w_sq += a * w[c][t].squaredNorm();
      }
      g_sq += a * g.squaredNorm();
    }
    ++res.tested;
    const double denom = std::sqrt(w_sq) * std::sqrt(g_sq) + eps;
    for (double p : pairing) res.value = std::max(res.value, std::abs(p) / denom);
  }
  return res;
}

/// Cubic smoothstep cutoff: 0 for r <= r0, 1 at r = 1.
inline double collar_cutoff(double r, double r0) {
  const double s = std::clamp((r - r0) / (1.0 - r0), 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

/// <w . nu, phi> on the unit circle realized in a collar: the integral of
/// w . grad(phi(theta) chi(r)) with chi the smoothstep cutoff.
inline double boundary_trace_pairing(const DiscMesh& mesh, const ElementField& w,
                                     const std::function<double(double)>& phi, double collar_r0,
                                     const std::vector<Ball2>& singular = {}) {
  if (!(collar_r0 > 0.0 && collar_r0 < 1.0)) {
    fail(ErrorCode::InvalidCollar, "collar radius must lie in (0, 1)");
  }
  for (const Ball2& s : singular) {
    if (s.center.norm() + s.radius > collar_r0) {
      fail(ErrorCode::InvalidCollar, "collar meets an excluded point");
    }
  }
  if (w.size() != mesh.num_triangles()) {
    fail(ErrorCode::InvalidParameter, "element field size does not match triangle count");
  }
  std::vector<double> psi(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const Point2& x = mesh.nodes()[i];
    const double r = x.norm();
    psi[i] = r <= collar_r0 ? 0.0 : phi(std::atan2(x.y(), x.x())) * collar_cutoff(r, collar_r0);
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangles()[t];
    if (psi[tri[0]] == 0.0 && psi[tri[1]] == 0.0 && psi[tri[2]] == 0.0) continue;
    Point2 g = Point2::Zero();
    for (int k = 0; k < 3; ++k) g += psi[tri[k]] * mesh.basis_gradient(t, k);
    acc += mesh.area(t) * w[t].dot(g);
  }
  return acc;
}

struct LoopIntegrals {
  double flux = 0.0;
  double circulation = 0.0;
};

/// Trapezoidal flux and circulation of w around a circle.
inline LoopIntegrals loop_integrals(const PlaneField& w, const Point2& center, double radius, int n_quad) {
  if (!(radius > 0.0) || center.norm() + radius >= 1.0 || n_quad < 3) {
    fail(ErrorCode::InvalidLoop, "loop must be a circle inside the open unit disc");
  }
  LoopIntegrals out;
  const double dth = 2.0 * std::numbers::pi / n_quad;
  for (int k = 0; k < n_quad; ++k) {
    const double th = k * dth;
    const Point2 nu(std::cos(th), std::sin(th));
    const Point2 tau(-nu.y(), nu.x());
    const Point2 v = w(center + radius * nu);
    out.flux += v.dot(nu) * radius * dth;
    out.circulation += v.dot(tau) * radius * dth;
  }
  return out;
}

/// Nodal map from the mesh into C^2, optionally with exact frames.
struct DiscreteMap {
  MeshPtr mesh;
  std::vector<AmbientVector> values;
  std::optional<std::vector<TangentFrame>> exact_frames;

  void validate() const {
    if (!mesh || values.size() != mesh->num_nodes()) {
      fail(ErrorCode::InvalidParameter, "discrete map needs one value per node");
    }
    for (const auto& v : values) {
      if (!v.finite()) fail(ErrorCode::InvalidParameter, "non-finite map value");
    }
    if (exact_frames && exact_frames->size() != values.size()) {
      fail(ErrorCode::InvalidParameter, "exact frames need one entry per node");
    }
  }
};

struct NodalComplexField {
  MeshPtr mesh;
  std::vector<cplx> values;
};

/// Per-triangle frames from the piecewise-linear gradient of a map.
inline std::vector<TangentFrame> element_frames(const DiscreteMap& u) {
  const auto grads = element_gradient(*u.mesh, u.values);
  std::vector<TangentFrame> out(grads.size());
  for (std::size_t t = 0; t < grads.size(); ++t) out[t] = {grads[t].dx, grads[t].dy};
  return out;
}

/// Per-node frames: exact ones when present, otherwise the area-weighted
/// average of the incident element gradients.
inline std::vector<TangentFrame> nodal_frames(const DiscreteMap& u) {
  if (u.exact_frames) return *u.exact_frames;
  const auto elem = element_frames(u);
  std::vector<TangentFrame> out(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    double wsum = 0.0;
    TangentFrame acc;
    for (int t : u.mesh->star(static_cast<int>(i))) {
      const double a = u.mesh->area(t);
      acc.e_x += a * elem[t].e_x;
      acc.e_y += a * elem[t].e_y;
      wsum += a;
    }
    out[i] = {(1.0 / wsum) * acc.e_x, (1.0 / wsum) * acc.e_y};
  }
  return out;
}

}  // namespace lagfree

#endif  // LAGFREE_DISC_MESH_HPP
