#ifndef LAGFREE_CPLX2_HPP
#define LAGFREE_CPLX2_HPP

// Linear and multilinear algebra of C^2 viewed as the quaternions:
// complex structure I, quaternionic J, symplectic form, holomorphic area
// form and the Lagrangian angle of a tangent frame.

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "lagfree/error.hpp"

namespace lagfree {

using cplx = std::complex<double>;

/// Point or tangent vector of C^2, (z1, z2) = (x1 + i y1, x2 + i y2).
struct AmbientVector {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  constexpr AmbientVector() = default;
  constexpr AmbientVector(double a, double b, double c, double d)
      : x1(a), y1(b), x2(c), y2(d) {}

  static AmbientVector from_complex(cplx z1, cplx z2) {
    return {z1.real(), z1.imag(), z2.real(), z2.imag()};
  }
  static AmbientVector from_eigen(const Eigen::Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }

  cplx z1() const { return {x1, y1}; }
  cplx z2() const { return {x2, y2}; }
  Eigen::Vector4d eigen() const { return {x1, y1, x2, y2}; }

  double operator[](int k) const {
    switch (k) {
      case 0: return x1;
      case 1: return y1;
      case 2: return x2;
      default: return y2;
    }
  }
  double& operator[](int k) {
    switch (k) {
      case 0: return x1;
      case 1: return y1;
      case 2: return x2;
      default: return y2;
    }
  }

  bool finite() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2);
  }

  AmbientVector& operator+=(const AmbientVector& o) {
    x1 += o.x1; y1 += o.y1; x2 += o.x2; y2 += o.y2;
    return *this;
  }
  AmbientVector& operator-=(const AmbientVector& o) {
    x1 -= o.x1; y1 -= o.y1; x2 -= o.x2; y2 -= o.y2;
    return *this;
  }
  AmbientVector& operator*=(double s) {
    x1 *= s; y1 *= s; x2 *= s; y2 *= s;
    return *this;
  }
};

inline AmbientVector operator+(AmbientVector a, const AmbientVector& b) { return a += b; }
inline AmbientVector operator-(AmbientVector a, const AmbientVector& b) { return a -= b; }
inline AmbientVector operator-(const AmbientVector& a) { return {-a.x1, -a.y1, -a.x2, -a.y2}; }
inline AmbientVector operator*(double s, AmbientVector a) { return a *= s; }
inline AmbientVector operator*(AmbientVector a, double s) { return a *= s; }

/// A complex scalar acts componentwise on (z1, z2).
inline AmbientVector operator*(cplx s, const AmbientVector& a) {
  return AmbientVector::from_complex(s * a.z1(), s * a.z2());
}

inline double dot(const AmbientVector& a, const AmbientVector& b) {
  return a.x1 * b.x1 + a.y1 * b.y1 + a.x2 * b.x2 + a.y2 * b.y2;
}
inline double norm_sq(const AmbientVector& a) { return dot(a, a); }
inline double norm(const AmbientVector& a) { return std::sqrt(norm_sq(a)); }

/// Unit complex number; g, its conjugate, and phases live here.
struct UnitComplex {
  double re = 1.0;
  double im = 0.0;

  static UnitComplex from(cplx z) {
    const double m = std::abs(z);
    if (!(m > 0.0) || !std::isfinite(m)) {
      fail(ErrorCode::InvalidParameter, "cannot normalize a zero complex number");
    }
    return {z.real() / m, z.imag() / m};
  }
  static UnitComplex polar(double phase) { return {std::cos(phase), std::sin(phase)}; }

  cplx value() const { return {re, im}; }
  UnitComplex conj() const { return {re, -im}; }
  double arg() const { return std::atan2(im, re); }
};

/// The partial derivatives (d_x u, d_y u) at one point.
struct TangentFrame {
  AmbientVector e_x;
  AmbientVector e_y;

  bool degenerate(double tol) const { return norm_sq(e_x) + norm_sq(e_y) <= tol; }
};

/// Complex multiplication by i on both factors.
inline AmbientVector apply_I(const AmbientVector& v) { return {-v.y1, v.x1, -v.y2, v.x2}; }

/// J(z1, z2) = (conj z2, -conj z1). With this sign, the identity
/// d_theta u / r = -conj(g) J d_r u holds for the Lagrangian angle of every
/// conformal Lagrangian frame (see tests).
inline AmbientVector apply_J(const AmbientVector& v) { return {v.x2, -v.y2, -v.x1, v.y1}; }

inline AmbientVector apply_K(const AmbientVector& v) { return apply_I(apply_J(v)); }

/// omega = dx1^dy1 + dx2^dy2.
inline double symplectic(const AmbientVector& a, const AmbientVector& b) {
  return a.x1 * b.y1 - a.y1 * b.x1 + a.x2 * b.y2 - a.y2 * b.x2;
}

/// dz1^dz2(a, b).
inline cplx holomorphic_area(const AmbientVector& a, const AmbientVector& b) {
  return a.z1() * b.z2() - a.z2() * b.z1();
}

struct AngleData {
  double conformal_factor = 0.0;
  UnitComplex angle;  // conj(g), with u^*(dz1^dz2) = e^{2 lambda} conj(g) dx^dy
};

inline constexpr double kDegenerateFrameTol = 1e-14;

/// Conformal factor (|e_x|^2 + |e_y|^2)/2 and Lagrangian angle conj(g).
inline AngleData lagrangian_angle(const TangentFrame& f, double tol = kDegenerateFrameTol) {
  const double energy = norm_sq(f.e_x) + norm_sq(f.e_y);
  if (!(energy > tol)) {
    fail(ErrorCode::DegenerateFrame, "frame energy below tolerance");
  }
  const cplx area = holomorphic_area(f.e_x, f.e_y);
  if (std::abs(area) <= std::numeric_limits<double>::min()) {
    fail(ErrorCode::DegenerateFrame, "holomorphic area vanishes");
  }
  return {0.5 * energy, UnitComplex::from(area)};
}

/// Real 4x4 matrix of a complex 2x2 matrix acting on (x1, y1, x2, y2).
inline Eigen::Matrix4d realify(const Eigen::Matrix2cd& U) {
  Eigen::Matrix4d R;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const cplx c = U(i, j);
      R(2 * i, 2 * j) = c.real();
      R(2 * i, 2 * j + 1) = -c.imag();
      R(2 * i + 1, 2 * j) = c.imag();
      R(2 * i + 1, 2 * j + 1) = c.real();
    }
  }
  return R;
}

inline AmbientVector apply(const Eigen::Matrix2cd& U, const AmbientVector& v) {
  return AmbientVector::from_complex(U(0, 0) * v.z1() + U(0, 1) * v.z2(),
                                     U(1, 0) * v.z1() + U(1, 1) * v.z2());
}

}  // namespace lagfree

#endif  // LAGFREE_CPLX2_HPP
