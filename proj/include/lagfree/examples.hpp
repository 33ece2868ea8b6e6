#ifndef LAGFREE_EXAMPLES_HPP
#define LAGFREE_EXAMPLES_HPP

// Closed-form Hamiltonian stationary Lagrangian discs: flat discs A(D),
// the Schoen-Wolfson cones and the non-minimal map u = (conj g, iG) with
// g = exp(i x), G = y.

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lagfree/cplx2.hpp"
#include "lagfree/disc_mesh.hpp"
#include "lagfree/error.hpp"

namespace lagfree {

enum class ExampleKind { FlatDisc, SWCone, NonMinimal };

struct ExampleMap {
  ExampleKind kind = ExampleKind::FlatDisc;
  std::string name;
  Eigen::Matrix2cd unitary = Eigen::Matrix2cd::Identity();  // FlatDisc
  int p = 0;                                                // SWCone
  int q = 0;

  std::function<AmbientVector(const Point2&)> value;
  /// Cartesian (d_x u, d_y u).
  std::function<TangentFrame(const Point2&)> frame;
  /// Lagrangian angle conj(g).
  std::function<UnitComplex(const Point2&)> angle;
  /// The real field i conj(g) grad g.
  std::function<Point2(const Point2&)> angle_flux;
  std::vector<Point2> singular_points;
  /// X = conj(g) J d_tau u + G I d_tau u along the boundary (NonMinimal only).
  std::function<AmbientVector(double)> boundary_X;

  AmbientVector value_polar(double r, double theta) const {
    return value(Point2(r * std::cos(theta), r * std::sin(theta)));
  }
  TangentFrame frame_polar(double r, double theta) const {
    return frame(Point2(r * std::cos(theta), r * std::sin(theta)));
  }
  /// (d_r u, d_theta u / r) from the Cartesian frame.
  TangentFrame polar_frame(double r, double theta) const {
    const TangentFrame f = frame_polar(r, theta);
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * f.e_x + s * f.e_y, -s * f.e_x + c * f.e_y};
  }
  AmbientVector tangential_derivative(double theta) const {
    return polar_frame(1.0, theta).e_y;
  }
  AmbientVector normal_derivative(double theta) const {
    return polar_frame(1.0, theta).e_x;
  }
};

inline ExampleMap flat_disc(const Eigen::Matrix2cd& U) {
  if ((U.adjoint() * U - Eigen::Matrix2cd::Identity()).norm() > 1e-12) {
    fail(ErrorCode::NotUnitary, "flat_disc needs a unitary matrix");
  }
  ExampleMap e;
  e.kind = ExampleKind::FlatDisc;
  e.name = "flat";
  e.unitary = U;
  const AmbientVector col0 = AmbientVector::from_complex(U(0, 0), U(1, 0));
  const AmbientVector col1 = AmbientVector::from_complex(U(0, 1), U(1, 1));
  const UnitComplex ang = UnitComplex::from(U.determinant());
  e.value = [col0, col1](const Point2& x) { return x.x() * col0 + x.y() * col1; };
  e.frame = [col0, col1](const Point2&) { return TangentFrame{col0, col1}; };
  e.angle = [ang](const Point2&) { return ang; };
  e.angle_flux = [](const Point2&) { return Point2(0.0, 0.0); };
  return e;
}

inline ExampleMap sw_cone(int p, int q) {
  if (p < 1 || q < 1) fail(ErrorCode::InvalidParameter, "sw_cone needs p, q >= 1");
  if (std::gcd(p, q) != 1) fail(ErrorCode::NotCoprime, "sw_cone needs coprime p, q");
  ExampleMap e;
  e.kind = ExampleKind::SWCone;
  e.name = "sw:" + std::to_string(p) + "," + std::to_string(q);
  e.p = p;
  e.q = q;
  const double sp = std::sqrt(static_cast<double>(p));
  const double sq = std::sqrt(static_cast<double>(q));
  const double spq = std::sqrt(static_cast<double>(p * q));
  const double norm = 1.0 / std::sqrt(static_cast<double>(p + q));
  const cplx I(0.0, 1.0);

  e.value = [=](const Point2& x) {
    const double r = x.norm();
    const double th = std::atan2(x.y(), x.x());
    const double rho = std::pow(r, spq) * norm;
    return AmbientVector::from_complex(rho * sq * std::exp(I * (p * th)),
                                       rho * I * sp * std::exp(-I * (q * th)));
  };
  e.frame = [=](const Point2& x) {
    const double r = x.norm();
    const double th = std::atan2(x.y(), x.x());
    const double c = spq * std::pow(r, spq - 1.0) * norm;
    const AmbientVector dr = AmbientVector::from_complex(c * sq * std::exp(I * (p * th)),
                                                         c * I * sp * std::exp(-I * (q * th)));
    const AmbientVector dth = AmbientVector::from_complex(c * I * sp * std::exp(I * (p * th)),
                                                          c * sq * std::exp(-I * (q * th)));
    const double cs = std::cos(th), sn = std::sin(th);
    return TangentFrame{cs * dr - sn * dth, sn * dr + cs * dth};
  };
  e.angle = [p, q](const Point2& x) {
    return UnitComplex::polar((p - q) * std::atan2(x.y(), x.x()));
  };
  e.angle_flux = [p, q](const Point2& x) {
    const double r2 = x.squaredNorm();
    return Point2(-(p - q) * x.y() / r2, (p - q) * x.x() / r2);
  };
  if (p != q) e.singular_points.push_back(Point2::Zero());
  return e;
}

inline ExampleMap nonminimal_map() {
  ExampleMap e;
  e.kind = ExampleKind::NonMinimal;
  e.name = "nonminimal";
  const cplx I(0.0, 1.0);
  e.value = [I](const Point2& x) {
    return AmbientVector::from_complex(std::exp(-I * x.x()), I * x.y());
  };
  e.frame = [I](const Point2& x) {
    return TangentFrame{AmbientVector::from_complex(-I * std::exp(-I * x.x()), 0.0),
                        AmbientVector::from_complex(0.0, I)};
  };
  e.angle = [](const Point2& x) { return UnitComplex::polar(-x.x()); };
  e.angle_flux = [](const Point2&) { return Point2(-1.0, 0.0); };
  const auto frame = e.frame;
  e.boundary_X = [frame, I](double theta) {
    const double x = std::cos(theta), y = std::sin(theta);
    const TangentFrame f = frame(Point2(x, y));
    const AmbientVector dtau = -y * f.e_x + x * f.e_y;
    return std::exp(-I * x) * apply_J(dtau) + y * apply_I(dtau);
  };
  return e;
}

/// Nodal samples with exact frames; frames at singular points are zero.
inline DiscreteMap sample(const ExampleMap& e, const MeshPtr& mesh) {
  DiscreteMap u;
  u.mesh = mesh;
  u.values.reserve(mesh->num_nodes());
  std::vector<TangentFrame> frames;
  frames.reserve(mesh->num_nodes());
  for (const Point2& x : mesh->nodes()) {
    u.values.push_back(e.value(x));
    bool singular = false;
    for (const Point2& s : e.singular_points) singular = singular || (x - s).norm() < 1e-14;
    frames.push_back(singular ? TangentFrame{} : e.frame(x));
  }
  u.exact_frames = std::move(frames);
  return u;
}

/// conj of the angle at the nodes, i.e. g itself.
inline NodalComplexField sample_g(const ExampleMap& e, const MeshPtr& mesh) {
  NodalComplexField g;
  g.mesh = mesh;
  g.values.reserve(mesh->num_nodes());
  for (const Point2& x : mesh->nodes()) g.values.push_back(e.angle(x).conj().value());
  return g;
}

}  // namespace lagfree

#endif  // LAGFREE_EXAMPLES_HPP
