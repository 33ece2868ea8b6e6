#ifndef LAGFREE_JET_HPP
#define LAGFREE_JET_HPP

// Second-order forward-mode jets in the four real coordinates of C^2.
// Hamiltonians written once against Jet give value, gradient and Hessian.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "lagfree/cplx2.hpp"

namespace lagfree {

struct Jet {
  double v = 0.0;
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  Eigen::Matrix4d H = Eigen::Matrix4d::Zero();

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet variable(int k, double value) {
    Jet j(value);
    j.g[k] = 1.0;
    return j;
  }
};

using JetPoint = std::array<Jet, 4>;

inline JetPoint jet_point(const AmbientVector& z) {
  return {Jet::variable(0, z.x1), Jet::variable(1, z.y1), Jet::variable(2, z.x2),
          Jet::variable(3, z.y2)};
}

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v + b.v;
  r.g = a.g + b.g;
  r.H = a.H + b.H;
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v - b.v;
  r.g = a.g - b.g;
  r.H = a.H - b.H;
  return r;
}
inline Jet operator-(const Jet& a) {
  Jet r;
  r.v = -a.v;
  r.g = -a.g;
  r.H = -a.H;
  return r;
}
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.H = a.v * b.H + b.v * a.H + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}
inline Jet operator*(double s, const Jet& a) {
  Jet r;
  r.v = s * a.v;
  r.g = s * a.g;
  r.H = s * a.H;
  return r;
}
inline Jet operator*(const Jet& a, double s) { return s * a; }

/// Composition with a scalar function given its first two derivatives.
inline Jet compose(const Jet& a, double f0, double f1, double f2) {
  Jet r;
  r.v = f0;
  r.g = f1 * a.g;
  r.H = f1 * a.H + f2 * a.g * a.g.transpose();
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  const double inv = 1.0 / b.v;
  return a * compose(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return compose(a, e, e, e);
}

inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return compose(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet square(const Jet& a) { return a * a; }

inline Jet atan2(const Jet& y, const Jet& x) {
  const double r2 = x.v * x.v + y.v * y.v;
  const double r4 = r2 * r2;
  const double fx = -y.v / r2, fy = x.v / r2;
  const double fxx = 2.0 * x.v * y.v / r4;
  const double fyy = -fxx;
  const double fxy = (y.v * y.v - x.v * x.v) / r4;
  Jet r;
  r.v = std::atan2(y.v, x.v);
  r.g = fx * x.g + fy * y.g;
  r.H = fx * x.H + fy * y.H + fxx * x.g * x.g.transpose() + fyy * y.g * y.g.transpose() +
        fxy * (x.g * y.g.transpose() + y.g * x.g.transpose());
  return r;
}

inline Jet norm_sq(const JetPoint& z) {
  return z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3];
}

}  // namespace lagfree

#endif  // LAGFREE_JET_HPP
