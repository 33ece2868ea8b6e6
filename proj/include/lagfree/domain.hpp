#ifndef LAGFREE_DOMAIN_HPP
#define LAGFREE_DOMAIN_HPP

// The constraint region Omega. Level-set domains carry F with Omega = {F < 0};
// curve domains only know the outward normal along an image curve.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lagfree/cplx2.hpp"
#include "lagfree/error.hpp"
#include "lagfree/examples.hpp"

namespace lagfree {

/// Periodic cubic spline through uniformly spaced samples on [0, 2 pi).
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  explicit PeriodicSpline(std::vector<double> y) : y_(std::move(y)) {
    const std::size_t n = y_.size();
    if (n < 4) fail(ErrorCode::InvalidParameter, "periodic spline needs at least 4 samples");
    h_ = 2.0 * std::numbers::pi / static_cast<double>(n);
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = 6.0 * (y_[(i + 1) % n] - 2.0 * y_[i] + y_[(i + n - 1) % n]) / (h_ * h_);
    }
    m_ = solve_cyclic(rhs);
  }

  double operator()(double theta) const {
    const std::size_t n = y_.size();
    double s = std::fmod(theta, 2.0 * std::numbers::pi);
    if (s < 0) s += 2.0 * std::numbers::pi;
    std::size_t i = static_cast<std::size_t>(s / h_);
    if (i >= n) i = n - 1;
    const std::size_t j = (i + 1) % n;
    const double a = (static_cast<double>(i + 1) * h_ - s) / h_;
    const double b = 1.0 - a;
    return a * y_[i] + b * y_[j] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[j]) * h_ * h_ / 6.0;
  }

 private:
  // M_{i-1} + 4 M_i + M_{i+1} = rhs_i with periodic wrap (Sherman-Morrison).
  static std::vector<double> solve_cyclic(const std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    const double gamma = -4.0;
    std::vector<double> diag(n, 4.0);
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    auto thomas = [&](std::vector<double> d) {
      std::vector<double> c(n), b = diag;
      c[0] = 1.0 / b[0];
      d[0] /= b[0];
      for (std::size_t i = 1; i < n; ++i) {
        const double m = b[i] - c[i - 1];
        c[i] = 1.0 / m;
        d[i] = (d[i] - d[i - 1]) / m;
      }
      for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
      return d;
    };
    std::vector<double> x = thomas(rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = 1.0;
    std::vector<double> z = thomas(u);
    const double fact = (x[0] + x[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
  }

  std::vector<double> y_;
  std::vector<double> m_;
  double h_ = 0.0;
};

enum class DomainKind { LevelSet, CurveNormal };

struct CurveData {
  std::vector<double> theta;
  std::vector<AmbientVector> points;
  std::vector<AmbientVector> normals;
  std::array<PeriodicSpline, 4> point_spline;
  std::array<PeriodicSpline, 4> normal_spline;

  AmbientVector point(double th) const {
    return {point_spline[0](th), point_spline[1](th), point_spline[2](th), point_spline[3](th)};
  }
  AmbientVector normal(double th) const {
    AmbientVector n{normal_spline[0](th), normal_spline[1](th), normal_spline[2](th), normal_spline[3](th)};
    return (1.0 / norm(n)) * n;
  }
};

struct Domain {
  DomainKind kind = DomainKind::LevelSet;
  std::string name;
  std::function<double(const AmbientVector&)> F;
  std::function<AmbientVector(const AmbientVector&)> gradF;
  std::function<Eigen::Matrix4d(const AmbientVector&)> hessF;  // optional; flow_adapted needs it
  std::shared_ptr<const CurveData> curve;

  /// Normalized gradF, defined off the boundary as well.
  AmbientVector normal_field(const AmbientVector& z) const {
    if (kind != DomainKind::LevelSet) fail(ErrorCode::Unsupported, "normal_field needs a level-set domain");
    const AmbientVector g = gradF(z);
    const double n = norm(g);
    if (!(n >= 1e-8)) fail(ErrorCode::DegenerateNormal, "gradient of F vanishes");
    return (1.0 / n) * g;
  }
};

inline Domain unit_ball() {
  Domain d;
  d.kind = DomainKind::LevelSet;
  d.name = "ball";
  d.F = [](const AmbientVector& z) { return norm_sq(z) - 1.0; };
  d.gradF = [](const AmbientVector& z) { return 2.0 * z; };
  d.hessF = [](const AmbientVector&) -> Eigen::Matrix4d { return 2.0 * Eigen::Matrix4d::Identity(); };
  return d;
}

struct CurveLocation {
  double theta = 0.0;
  double distance = 0.0;
};

/// Closest parameter on the stored curve (grid search, then golden section).
inline CurveLocation locate_on_curve(const CurveData& c, const AmbientVector& z) {
  std::size_t best = 0;
  double best_d = norm_sq(c.points[0] - z);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    const double d = norm_sq(c.points[i] - z);
    if (d < best_d) { best_d = d; best = i; }
  }
  const double h = 2.0 * std::numbers::pi / static_cast<double>(c.points.size());
  double a = c.theta[best] - h, b = c.theta[best] + h;
  auto dist = [&](double th) { return norm_sq(c.point(th) - z); };
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = dist(x1), f2 = dist(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - ratio * (b - a); f1 = dist(x1); }
    else { a = x1; x1 = x2; f1 = f2; x2 = a + ratio * (b - a); f2 = dist(x2); }
  }
  const double th = 0.5 * (a + b);
  return {th, std::sqrt(dist(th))};
}

inline AmbientVector normal_at(const Domain& d, const AmbientVector& z) {
  if (d.kind == DomainKind::LevelSet) {
    if (std::abs(d.F(z)) > 1e-6) fail(ErrorCode::NotOnBoundary, "point is not on the level set");
    return d.normal_field(z);
  }
  const CurveLocation loc = locate_on_curve(*d.curve, z);
  if (loc.distance > 1e-6) fail(ErrorCode::NotOnBoundary, "point is not on the stored curve");
  return d.curve->normal(loc.theta);
}

/// Newton projection along gradF onto {F = 0}.
inline AmbientVector project_to_boundary(const Domain& d, const AmbientVector& z0) {
  if (d.kind != DomainKind::LevelSet) fail(ErrorCode::Unsupported, "projection needs a level-set domain");
  AmbientVector z = z0;
  for (int it = 0; it < 60; ++it) {
    const double f = d.F(z);
    if (std::abs(f) <= 1e-13) return z;
    const AmbientVector g = d.gradF(z);
    const double gg = norm_sq(g);
    if (!(gg > 1e-24)) fail(ErrorCode::ProjectionDiverged, "gradient of F vanishes");
    z -= (f / gg) * g;
    if (!z.finite()) break;
  }
  if (std::abs(d.F(z)) <= 1e-12) return z;
  fail(ErrorCode::ProjectionDiverged, "Newton projection did not converge");
}

/// Curve domain from a boundary curve and a (not necessarily unit) normal.
inline Domain curve_domain(const std::function<AmbientVector(double)>& curve,
                           const std::function<AmbientVector(double)>& normal_dir,
                           const std::function<AmbientVector(double)>& tangent, int n_theta = 512) {
  if (n_theta < 256) fail(ErrorCode::InvalidParameter, "curve domains need at least 256 samples");
  auto data = std::make_shared<CurveData>();
  std::array<std::vector<double>, 4> pc, nc;
  for (int i = 0; i < n_theta; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n_theta;
    const AmbientVector x = normal_dir(th);
    const double len = norm(x);
    if (!(len >= 1e-6)) fail(ErrorCode::DegenerateNormal, "normal field vanishes on the curve");
    const AmbientVector n = (1.0 / len) * x;
    const AmbientVector t = tangent(th);
    if (std::abs(dot(n, t)) > 1e-8 * std::max(1.0, norm(t))) {
      fail(ErrorCode::DegenerateNormal, "normal field is not orthogonal to the curve");
    }
    const AmbientVector p = curve(th);
    data->theta.push_back(th);
    data->points.push_back(p);
    data->normals.push_back(n);
    for (int k = 0; k < 4; ++k) {
      pc[k].push_back(p[k]);
      nc[k].push_back(n[k]);
    }
  }
  for (int k = 0; k < 4; ++k) {
    data->point_spline[k] = PeriodicSpline(pc[k]);
    data->normal_spline[k] = PeriodicSpline(nc[k]);
  }
  Domain d;
  d.kind = DomainKind::CurveNormal;
  d.name = "curve";
  d.curve = std::move(data);
  return d;
}

/// Normal X/|X| along u(boundary) when the example exposes X; otherwise the
/// sphere normal u itself.
inline Domain curve_domain_from_map(const ExampleMap& e, int n_theta = 512) {
  auto curve = [&e](double th) { return e.value_polar(1.0, th); };
  auto tangent = [&e](double th) { return e.tangential_derivative(th); };
  if (e.boundary_X) return curve_domain(curve, e.boundary_X, tangent, n_theta);
  return curve_domain(curve, curve, tangent, n_theta);
}

}  // namespace lagfree

#endif  // LAGFREE_DOMAIN_HPP
