#ifndef LAGFREE_HAMILTONIANS_HPP
#define LAGFREE_HAMILTONIANS_HPP

// Test Hamiltonians f : C^2 -> R with gradient and Hessian, tagged by the
// reason they are admissible for free-boundary variations.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lagfree/cplx2.hpp"
#include "lagfree/domain.hpp"
#include "lagfree/error.hpp"
#include "lagfree/jet.hpp"

namespace lagfree {

enum class Admissibility { InteriorSupported, BoundaryTangent };

struct SupportBall {
  AmbientVector center;
  double radius = 0.0;
};

struct Hamiltonian {
  std::string name;
  std::function<double(const AmbientVector&)> value;
  std::function<AmbientVector(const AmbientVector&)> gradient;
  std::function<Eigen::Matrix4d(const AmbientVector&)> hessian;
  std::optional<SupportBall> support_hint;
  Admissibility tag = Admissibility::InteriorSupported;
  std::string domain_name;  // for BoundaryTangent
};

using JetFunction = std::function<Jet(const JetPoint&)>;

inline Hamiltonian from_jet(std::string name, JetFunction fn, Admissibility tag,
                            std::string domain_name = {}) {
  auto shared = std::make_shared<JetFunction>(std::move(fn));
  Hamiltonian h;
  h.name = std::move(name);
  h.value = [shared](const AmbientVector& z) { return (*shared)(jet_point(z)).v; };
  h.gradient = [shared](const AmbientVector& z) {
    return AmbientVector::from_eigen((*shared)(jet_point(z)).g);
  };
  h.hessian = [shared](const AmbientVector& z) { return (*shared)(jet_point(z)).H; };
  h.tag = tag;
  h.domain_name = std::move(domain_name);
  return h;
}

/// Scalar profile with its first two derivatives.
struct Profile {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;

  Jet operator()(const Jet& s) const { return compose(s, f(s.v), df(s.v), d2f(s.v)); }

  static Profile constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  }
  /// a + b s + c s^2.
  static Profile quadratic(double a, double b, double c) {
    return {[=](double s) { return a + b * s + c * s * s; }, [=](double s) { return b + 2.0 * c * s; },
            [=](double) { return 2.0 * c; }};
  }
  /// exp(k s).
  static Profile exponential(double k) {
    return {[k](double s) { return std::exp(k * s); }, [k](double s) { return k * std::exp(k * s); },
            [k](double s) { return k * k * std::exp(k * s); }};
  }
};

inline Hamiltonian interior_bump(const AmbientVector& center, double radius, double amplitude) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidParameter, "bump radius must be positive");
  const double inv_r2 = 1.0 / (radius * radius);
  Hamiltonian h = from_jet(
      "bump",
      [=](const JetPoint& z) {
        Jet s = (square(z[0] - center.x1) + square(z[1] - center.y1) + square(z[2] - center.x2) +
                 square(z[3] - center.y2)) *
                inv_r2;
        if (s.v >= 1.0) return Jet(0.0);
        const double m = 1.0 - s.v;
        const double e = std::exp(-1.0 / m);
        const double d1 = -e / (m * m);
        const double d2 = e / (m * m * m * m) - 2.0 * e / (m * m * m);
        return amplitude * compose(s, e, d1, d2);
      },
      Admissibility::InteriorSupported);
  h.support_hint = SupportBall{center, radius};
  return h;
}

/// f(z) = profile(|z|^2); tangent to the unit sphere.
inline Hamiltonian radial_invariant(const Profile& profile) {
  return from_jet(
      "radial", [profile](const JetPoint& z) { return profile(norm_sq(z)); },
      Admissibility::BoundaryTangent, "ball");
}

/// profile(|z|^2) * (c0 |z1|^2 + c1 |z2|^2 + c2 Re(conj z1 z2) + c3 Im(conj z1 z2)).
inline Hamiltonian hopf_invariant_quadratic(const std::array<double, 4>& c, const Profile& profile) {
  return from_jet(
      "hopf",
      [c, profile](const JetPoint& z) {
        const Jet quad = c[0] * (z[0] * z[0] + z[1] * z[1]) + c[1] * (z[2] * z[2] + z[3] * z[3]) +
                         c[2] * (z[0] * z[2] + z[1] * z[3]) + c[3] * (z[0] * z[3] - z[1] * z[2]);
        return profile(norm_sq(z)) * quad;
      },
      Admissibility::BoundaryTangent, "ball");
}

/// f(z) = <a, z>. Not admissible for the ball; used as a negative control.
inline Hamiltonian linear_hamiltonian(const AmbientVector& a) {
  return from_jet(
      "linear",
      [a](const JetPoint& z) { return a.x1 * z[0] + a.y1 * z[1] + a.x2 * z[2] + a.y2 * z[3]; },
      Admissibility::BoundaryTangent, "none");
}

/// Boundary-tangent family for the curve domain of the non-minimal example:
/// f = k(z) Q(z) with Q = Im z2 (|z1|^2 - 1) - 2 arg(z1) Re z2. Along the image
/// curve, grad f = k (2 y (z1, 0) + 2 x (0, 1)), and I grad f is orthogonal
/// to the normal X / |X|.
inline Hamiltonian nonminimal_curve_tangent(int weight) {
  return from_jet(
      "curve_tangent_" + std::to_string(weight),
      [weight](const JetPoint& z) {
        const Jet q = z[3] * (z[0] * z[0] + z[1] * z[1] - 1.0) - 2.0 * atan2(z[1], z[0]) * z[2];
        switch (weight) {
          case 0: return q;
          case 1: return z[0] * q;
          case 2: return z[3] * q;
          case 3: return (z[3] * z[3] + 0.5 * z[1]) * q;
          default: return exp(0.5 * z[1]) * q;
        }
      },
      Admissibility::BoundaryTangent, "curve");
}

/// Sum of scaled Hamiltonians; the tag is the weakest of the inputs.
inline Hamiltonian linear_combination(const std::vector<std::pair<double, Hamiltonian>>& terms) {
  Hamiltonian h;
  h.name = "combination";
  h.value = [terms](const AmbientVector& z) {
    double acc = 0.0;
    for (const auto& [c, f] : terms) acc += c * f.value(z);
    return acc;
  };
  h.gradient = [terms](const AmbientVector& z) {
    AmbientVector acc;
    for (const auto& [c, f] : terms) acc += c * f.gradient(z);
    return acc;
  };
  h.hessian = [terms](const AmbientVector& z) {
    Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
    for (const auto& [c, f] : terms) acc += c * f.hessian(z);
    return acc;
  };
  h.tag = Admissibility::InteriorSupported;
  for (const auto& [c, f] : terms) {
    if (f.tag == Admissibility::BoundaryTangent) {
      h.tag = Admissibility::BoundaryTangent;
      h.domain_name = f.domain_name;
    }
  }
  return h;
}

/// Largest |<I grad f(z), N(z)>| / (|grad f(z)| + eps) over the points.
inline double admissibility_residual(const Hamiltonian& f, const Domain& d,
                                     const std::vector<AmbientVector>& pts) {
  double worst = 0.0;
  for (const AmbientVector& z : pts) {
    const AmbientVector g = f.gradient(z);
    const AmbientVector n = normal_at(d, z);
    worst = std::max(worst, std::abs(dot(apply_I(g), n)) / (norm(g) + 1e-300));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Flow-adapted test functions.

/// Anchor data on the boundary of Omega: a point p, a unit tangent v and the
/// phase g0 with v = g0 J N(p).
struct FlowAnchor {
  AmbientVector p;
  AmbientVector v;
  cplx g0{1.0, 0.0};
};

/// Scalar profile beta on (-delta, delta) with its derivative.
struct BetaProfile {
  std::function<double(double)> f;
  std::function<double(double)> df;

  /// (t / delta) exp(-1 / (1 - (t/delta)^2)): smooth, odd, supported in (-delta, delta).
  static BetaProfile odd_bump(double delta) {
    auto f = [delta](double t) {
      const double x = t / delta;
      if (std::abs(x) >= 1.0) return 0.0;
      return x * std::exp(-1.0 / (1.0 - x * x));
    };
    auto df = [delta](double t) {
      const double x = t / delta;
      if (std::abs(x) >= 1.0) return 0.0;
      const double m = 1.0 - x * x;
      const double e = std::exp(-1.0 / m);
      return (e + x * e * (-2.0 * x / (m * m))) / delta;
    };
    return {f, df};
  }
  static BetaProfile zero() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }};
  }
};

/// Plateau cutoff: 1 for |z - p| <= inner, 0 for |z - p| >= outer, C-infinity.
struct PlateauCutoff {
  double inner = 0.2;
  double outer = 0.4;
};

namespace detail {

inline double smooth_psi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
inline double smooth_dpsi(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

/// 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  const double a = smooth_psi(x), b = smooth_psi(1.0 - x);
  return a / (a + b);
}
inline double smooth_dstep(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double a = smooth_psi(x), b = smooth_psi(1.0 - x);
  const double da = smooth_dpsi(x), db = -smooth_dpsi(1.0 - x);
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

/// The flow of Y(z) = g0 J N(z), N = gradF / |gradF|, integrated with
/// classical RK4 over a fixed number of steps, together with its Jacobian.
class AnchorFlow {
 public:
  AnchorFlow(Domain domain, cplx g0, int steps) : domain_(std::move(domain)), steps_(steps) {
    Eigen::Matrix2cd G;
    G << g0, 0.0, 0.0, g0;
    Eigen::Matrix4d Jm;
    for (int k = 0; k < 4; ++k) {
      AmbientVector e;
      e[k] = 1.0;
      Jm.col(k) = apply_J(e).eigen();
    }
    L_ = realify(G) * Jm;
  }

  Eigen::Vector4d field(const Eigen::Vector4d& z) const {
    return L_ * domain_.normal_field(AmbientVector::from_eigen(z)).eigen();
  }

  Eigen::Matrix4d field_jacobian(const Eigen::Vector4d& z) const {
    const AmbientVector zz = AmbientVector::from_eigen(z);
    const Eigen::Vector4d g = domain_.gradF(zz).eigen();
    const double gn = g.norm();
    const Eigen::Vector4d n = g / gn;
    const Eigen::Matrix4d dN = (Eigen::Matrix4d::Identity() - n * n.transpose()) * domain_.hessF(zz) / gn;
    return L_ * dN;
  }

  Eigen::Vector4d advance(Eigen::Vector4d z, double s) const {
    const double dt = s / steps_;
    for (int i = 0; i < steps_; ++i) {
      const Eigen::Vector4d k1 = field(z);
      const Eigen::Vector4d k2 = field(z + 0.5 * dt * k1);
      const Eigen::Vector4d k3 = field(z + 0.5 * dt * k2);
      const Eigen::Vector4d k4 = field(z + dt * k3);
      z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
  }

  /// End point and d(end)/d(start).
  std::pair<Eigen::Vector4d, Eigen::Matrix4d> advance_with_jacobian(Eigen::Vector4d z, double s) const {
    const double dt = s / steps_;
    Eigen::Matrix4d Z = Eigen::Matrix4d::Identity();
    for (int i = 0; i < steps_; ++i) {
      const Eigen::Vector4d k1 = field(z);
      const Eigen::Matrix4d K1 = field_jacobian(z) * Z;
      const Eigen::Vector4d z2 = z + 0.5 * dt * k1;
      const Eigen::Vector4d k2 = field(z2);
      const Eigen::Matrix4d K2 = field_jacobian(z2) * (Z + 0.5 * dt * K1);
      const Eigen::Vector4d z3 = z + 0.5 * dt * k2;
      const Eigen::Vector4d k3 = field(z3);
      const Eigen::Matrix4d K3 = field_jacobian(z3) * (Z + 0.5 * dt * K2);
      const Eigen::Vector4d z4 = z + dt * k3;
      const Eigen::Vector4d k4 = field(z4);
      const Eigen::Matrix4d K4 = field_jacobian(z4) * (Z + dt * K3);
      z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      Z += dt / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
    }
    return {z, Z};
  }

 private:
  Domain domain_;
  Eigen::Matrix4d L_;
  int steps_;
};

}  // namespace detail

/// Time coordinate of the anchor flow: t(z) such that flowing z for time
/// -t lands on the hyperplane through p orthogonal to v.
struct FlowTime {
  double t = 0.0;
  Eigen::Vector4d grad = Eigen::Vector4d::Zero();
};

class FlowCoordinates {
 public:
  FlowCoordinates(const Domain& d, const FlowAnchor& anchor, double delta)
      : flow_(d, anchor.g0, 64), p_(anchor.p.eigen()), v_(anchor.v.eigen()), delta_(delta) {}

  /// Newton solve for the landing time; throws FlowNotInvertible.
  FlowTime time(const AmbientVector& z, bool with_gradient) const {
    const Eigen::Vector4d z0 = z.eigen();
    double s = -(z0 - p_).dot(v_);
    for (int it = 0; it < 40; ++it) {
      const Eigen::Vector4d end = flow_.advance(z0, s);
      const double h = (end - p_).dot(v_);
      const double dh = flow_.field(end).dot(v_);
      if (!(std::abs(dh) > 0.1)) fail(ErrorCode::FlowNotInvertible, "flow is not transverse to the anchor plane");
      const double step = h / dh;
      s -= step;
      if (std::abs(s) > 4.0 * delta_ + 1.0) fail(ErrorCode::FlowNotInvertible, "flow does not reach the anchor plane");
      if (std::abs(step) < 1e-15) break;
    }
    FlowTime out;
    out.t = -s;
    if (with_gradient) {
      const auto [end, Z] = flow_.advance_with_jacobian(z0, s);
      const double dh = flow_.field(end).dot(v_);
      out.grad = Z.transpose() * v_ / dh;
    }
    return out;
  }

  const detail::AnchorFlow& flow() const { return flow_; }

 private:
  detail::AnchorFlow flow_;
  Eigen::Vector4d p_;
  Eigen::Vector4d v_;
  double delta_;
};

/// f = eta * beta(t(z)): the level sets of f are the images of the anchor
/// hyperplane under the flow of g0 J N. The Hessian is a centered finite
/// difference (step 1e-5) of the gradient.
inline Hamiltonian flow_adapted(const Domain& d, const FlowAnchor& anchor, const BetaProfile& beta, double delta,
                                const PlateauCutoff& cutoff) {
  if (d.kind != DomainKind::LevelSet || !d.hessF) {
    fail(ErrorCode::Unsupported, "flow_adapted needs a level-set domain with a Hessian");
  }
  if (!(delta > 0.0) || !(cutoff.outer > cutoff.inner) || !(cutoff.inner > 0.0)) {
    fail(ErrorCode::InvalidParameter, "flow_adapted needs delta > 0 and 0 < inner < outer");
  }
  // The flow field needs N off the boundary: the tube must stay clear of
  // critical points of F.
  const double pn = norm(anchor.p);
  if (d.name == "ball" && cutoff.outer >= 0.8 * pn) {
    fail(ErrorCode::TubeTooLarge, "cutoff support reaches the center of the ball");
  }
  const AmbientVector expected_v = anchor.g0 * apply_J(normal_at(d, anchor.p));
  if (norm(expected_v - anchor.v) > 1e-8) {
    fail(ErrorCode::InvalidParameter, "anchor tangent must equal g0 J N(p)");
  }
  auto coords = std::make_shared<FlowCoordinates>(d, anchor, delta);
  // Build-time check of invertibility on a shell of sample points.
  for (int k = 0; k < 64; ++k) {
    AmbientVector dir{std::cos(0.7 * k), std::sin(1.3 * k), std::cos(2.1 * k + 0.3), std::sin(0.4 * k + 1.0)};
    dir *= 1.0 / norm(dir);
    try {
      coords->time(anchor.p + cutoff.outer * dir, false);
    } catch (const Error&) {
      fail(ErrorCode::TubeTooLarge, "anchor flow is not invertible on the cutoff support");
    }
  }

  const AmbientVector p = anchor.p;
  auto eta = [p, cutoff](const AmbientVector& z, Eigen::Vector4d* grad) {
    const AmbientVector dz = z - p;
    const double r = norm(dz);
    const double x = (r - cutoff.inner) / (cutoff.outer - cutoff.inner);
    if (grad) {
      *grad = Eigen::Vector4d::Zero();
      if (x > 0.0 && x < 1.0 && r > 0.0) *grad = -detail::smooth_dstep(x) / (cutoff.outer - cutoff.inner) / r * dz.eigen();
    }
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return 1.0 - detail::smooth_step(x);
  };

  Hamiltonian h;
  h.name = "flow_adapted";
  h.tag = Admissibility::BoundaryTangent;
  h.domain_name = d.name;
  h.support_hint = SupportBall{anchor.p, cutoff.outer};
  h.value = [coords, eta, beta, p, cutoff](const AmbientVector& z) {
    if (norm(z - p) >= cutoff.outer) return 0.0;
    return eta(z, nullptr) * beta.f(coords->time(z, false).t);
  };
  h.gradient = [coords, eta, beta, p, cutoff](const AmbientVector& z) {
    if (norm(z - p) >= cutoff.outer) return AmbientVector{};
    Eigen::Vector4d geta;
    const double e = eta(z, &geta);
    const FlowTime ft = coords->time(z, true);
    return AmbientVector::from_eigen(beta.f(ft.t) * geta + e * beta.df(ft.t) * ft.grad);
  };
  auto grad = h.gradient;
  h.hessian = [grad, p, cutoff](const AmbientVector& z) -> Eigen::Matrix4d {
    Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
    if (norm(z - p) >= cutoff.outer + 1e-4) return H;
    constexpr double step = 1e-5;
    for (int k = 0; k < 4; ++k) {
      AmbientVector zp = z, zm = z;
      zp[k] += step;
      zm[k] -= step;
      H.col(k) = (grad(zp).eigen() - grad(zm).eigen()) / (2.0 * step);
    }
    return 0.5 * (H + H.transpose());
  };
  return h;
}

// ---------------------------------------------------------------------------
// Standard test batches.

/// 21 Hamiltonians admissible for the unit ball: interior bumps spread
/// through the ball, radial and Hopf-invariant families, and two mixtures.
inline std::vector<Hamiltonian> ball_test_batch() {
  std::vector<Hamiltonian> out;
  for (int k = 0; k < 8; ++k) {
    const double a = 0.7 * k;
    out.push_back(interior_bump({0.4 * std::cos(a), 0.4 * std::sin(a), 0.3 * std::sin(1.3 * a), 0.2 * std::cos(a)},
                                0.35, 1.0));
  }
  out.push_back(radial_invariant(Profile::quadratic(0.0, 1.0, 0.0)));
  out.push_back(radial_invariant(Profile::quadratic(0.0, 0.5, -0.3)));
  out.push_back(radial_invariant(Profile::exponential(0.7)));
  for (int k = 0; k < 4; ++k) {
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};
    c[k] = 1.0;
    out.push_back(hopf_invariant_quadratic(c, Profile::constant(1.0)));
    out.push_back(hopf_invariant_quadratic(c, Profile::exponential(0.3)));
  }
  out.push_back(linear_combination({{1.0, out[0]}, {-0.5, out[9]}, {0.25, out[12]}}));
  out.push_back(linear_combination({{0.3, out[3]}, {1.0, out[14]}}));
  return out;
}

/// Interior bumps centred at the given points, each with radius half its
/// distance to the boundary samples, capped at max_radius.
inline std::vector<Hamiltonian> interior_bumps_near(const std::vector<AmbientVector>& centers,
                                                    const std::vector<AmbientVector>& boundary_samples,
                                                    double max_radius) {
  std::vector<Hamiltonian> out;
  for (const AmbientVector& c : centers) {
    double dist = 1e300;
    for (const AmbientVector& b : boundary_samples) dist = std::min(dist, norm(c - b));
    out.push_back(interior_bump(c, std::min(max_radius, 0.5 * dist), 1.0));
  }
  return out;
}

}  // namespace lagfree

#endif  // LAGFREE_HAMILTONIANS_HPP
