#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "lagfree/disc_mesh.hpp"
#include "lagfree/examples.hpp"
#include "test_util.hpp"

using namespace lagfree;
using lagfree::testing::fitted_order;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lagfree::Error thrown";
  return ErrorCode::Config;
}

}  // namespace

TEST(PolarMesh, SmallMeshCounts) {
  const MeshPtr m = build_polar_mesh(2, 8, 1.0);
  EXPECT_EQ(m->num_nodes(), 17u);
  EXPECT_EQ(m->num_triangles(), 24u);
  EXPECT_EQ(m->boundary_edges().size(), 8u);
}

TEST(PolarMesh, GradedRingRadii) {
  const MeshPtr m = build_polar_mesh(3, 12, 0.5);
  const auto& radii = m->polar()->ring_radii;
  ASSERT_EQ(radii.size(), 4u);
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(radii[k], std::pow(k / 3.0, 2.0), 1e-15);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_NEAR(m->nodes()[1 + (k - 1) * 12].norm(), std::pow(k / 3.0, 2.0), 1e-15);
  }
}

TEST(PolarMesh, RejectsBadParameters) {
  EXPECT_EQ(code_of([] { build_polar_mesh(1, 8, 1.0); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { build_polar_mesh(4, 7, 1.0); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { build_polar_mesh(4, 8, 0.1); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of([] { build_polar_mesh(4, 8, 1.5); }), ErrorCode::InvalidParameter);
}

TEST(PolarMesh, InvariantsHoldAcrossSizes) {
  for (auto [r, s, g] : {std::tuple{2, 8, 1.0}, {5, 16, 0.5}, {12, 48, 0.2}, {24, 96, 1.0}}) {
    const MeshPtr m = build_polar_mesh(r, s, g);
    EXPECT_EQ(m->num_nodes(), static_cast<std::size_t>(1 + r * s));
    double area = 0.0;
    for (std::size_t t = 0; t < m->num_triangles(); ++t) {
      EXPECT_GE(m->area(t), 1e-14);
      area += m->area(t);
    }
    // Inscribed polygon area.
    EXPECT_NEAR(area, 0.5 * s * std::sin(2.0 * kPi / s), 1e-12);
    EXPECT_EQ(m->boundary_cycle().size(), static_cast<std::size_t>(s));
    for (int b : m->boundary_cycle()) EXPECT_NEAR(m->nodes()[b].norm(), 1.0, 1e-12);
  }
}

TEST(PolarMesh, RejectsNonConformingInput) {
  // Two triangles sharing only a vertex with a boundary list that ignores one of them.
  std::vector<Point2> nodes{{0, 0}, {1, 0}, {0, 1}, {-1, 0}};
  std::vector<Triangle> tris{{0, 1, 2}, {0, 2, 3}};
  std::vector<Edge> bnd{{1, 2}, {2, 3}, {3, 1}};
  EXPECT_EQ(code_of([&] { DiscMesh(nodes, tris, bnd); }), ErrorCode::InvalidParameter);
  std::vector<Triangle> flipped{{0, 2, 1}};
  EXPECT_EQ(code_of([&] { DiscMesh(nodes, flipped, {}); }), ErrorCode::InvalidParameter);
}

TEST(ElementGradient, ExactOnAffineFields) {
  const MeshPtr m = build_polar_mesh(6, 24, 0.7);
  std::vector<double> x, c;
  for (const Point2& p : m->nodes()) {
    x.push_back(p.x());
    c.push_back(3.0);
  }
  const auto gx = element_gradient(*m, x);
  const auto gc = element_gradient(*m, c);
  for (std::size_t t = 0; t < m->num_triangles(); ++t) {
    EXPECT_NEAR(gx[t].dx, 1.0, 1e-12);
    EXPECT_NEAR(gx[t].dy, 0.0, 1e-12);
    EXPECT_NEAR(gc[t].dx, 0.0, 1e-12);
    EXPECT_NEAR(gc[t].dy, 0.0, 1e-12);
  }
}

TEST(ElementGradient, QuadraticFieldConvergesAtFirstOrder) {
  std::vector<double> hs, errs;
  for (int n : {8, 16, 32}) {
    const MeshPtr m = build_polar_mesh(n, 4 * n, 1.0);
    std::vector<double> f;
    for (const Point2& p : m->nodes()) f.push_back(p.x() * p.x());
    const auto g = element_gradient(*m, f);
    double err = 0.0;
    for (std::size_t t = 0; t < m->num_triangles(); ++t) {
      // Compare against the exact gradient at the worst vertex of the triangle.
      for (int k : m->triangles()[t]) {
        const Point2& v = m->nodes()[k];
        err = std::max(err, std::hypot(g[t].dx - 2.0 * v.x(), g[t].dy));
      }
    }
    hs.push_back(m->h());
    errs.push_back(err);
  }
  EXPECT_GE(fitted_order(hs, errs), 0.9);
}

TEST(WeakDivergence, ConstantFieldIsDivergenceFree) {
  const MeshPtr m = build_polar_mesh(8, 32, 1.0);
  const ElementField w(m->num_triangles(), Point2(0.3, -1.2));
  const WeakResidual r = weak_divergence_residual(*m, w);
  EXPECT_LE(r.value, 1e-14);
  EXPECT_GT(r.tested, 0u);
}

TEST(WeakDivergence, RadialFieldIsDetected) {
  for (int n : {5, 10, 20}) {
    const MeshPtr m = build_polar_mesh(n, 4 * n, 1.0);
    ASSERT_LE(m->h(), 0.45);
    const ElementField w = element_centroid_field(*m, [](const Point2& x) { return x; });
    EXPECT_GE(weak_divergence_residual(*m, w).value, 0.1);
  }
}

TEST(WeakDivergence, EmptyTestSetIsFlagged) {
  const MeshPtr m = build_polar_mesh(2, 8, 1.0);
  const ElementField w(m->num_triangles(), Point2(1.0, 0.0));
  const WeakResidual r = weak_divergence_residual(*m, w, {Ball2{Point2::Zero(), 0.9}});
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r.value, 0.0);
}

TEST(WeakDivergence, ConeAngleFieldConverges) {
  const ExampleMap e = sw_cone(1, 2);
  std::vector<double> hs, vals;
  for (int n : {12, 24, 48}) {
    const MeshPtr m = build_polar_mesh(n, 4 * n, 1.0);
    const ElementField w = element_centroid_field(*m, e.angle_flux);
    hs.push_back(m->h());
    vals.push_back(weak_divergence_residual(*m, w, {Ball2{Point2::Zero(), 0.1}}).value);
  }
  EXPECT_GE(fitted_order(hs, vals), 1.0);
}

TEST(WeakDivergence, RefinementReducesSmoothSolenoidalResidual) {
  // w = rot grad psi with psi = sin(2x) cos(3y).
  const PlaneField w = [](const Point2& p) {
    return Point2(3.0 * std::sin(2 * p.x()) * std::sin(3 * p.y()), 2.0 * std::cos(2 * p.x()) * std::cos(3 * p.y()));
  };
  double prev = -1.0;
  for (int n : {8, 16, 32}) {
    const MeshPtr m = build_polar_mesh(n, 4 * n, 1.0);
    const double v = weak_divergence_residual(*m, element_centroid_field(*m, w)).value;
    if (prev > 0) {
      EXPECT_GE(prev / v, 1.8);
    }
    prev = v;
  }
}

TEST(BoundaryPairing, ConstantFieldHasNoFlux) {
  const MeshPtr m = build_polar_mesh(16, 64, 1.0);
  const ElementField w(m->num_triangles(), Point2(1.0, 0.0));
  EXPECT_NEAR(boundary_trace_pairing(*m, w, [](double) { return 1.0; }, 0.5), 0.0, 1e-12);
}

TEST(BoundaryPairing, ConeFieldIsTangential) {
  const ExampleMap e = sw_cone(2, 3);
  const MeshPtr m = build_polar_mesh(48, 192, 1.0);
  const ElementField w = element_average_field(*m, e.angle_flux);
  const std::vector<std::function<double(double)>> phis{[](double) { return 1.0; },
                                                        [](double t) { return std::cos(t); },
                                                        [](double t) { return std::sin(3 * t); }};
  for (const auto& phi : phis) {
    for (double r0 : {0.5, 0.7, 0.9}) {
      EXPECT_LE(std::abs(boundary_trace_pairing(*m, w, phi, r0, {Ball2{Point2::Zero(), 0.1}})), 1e-8);
    }
  }
}

TEST(BoundaryPairing, NonminimalFieldPairsToMinusPi) {
  const ExampleMap e = nonminimal_map();
  std::vector<double> hs, errs;
  for (int n : {8, 16, 32}) {
    const MeshPtr m = build_polar_mesh(n, 4 * n, 1.0);
    const ElementField w = element_centroid_field(*m, e.angle_flux);
    const double v = boundary_trace_pairing(*m, w, [](double t) { return std::cos(t); }, 0.6);
    hs.push_back(m->h());
    errs.push_back(std::abs(v + kPi));
  }
  EXPECT_LE(errs.back(), 1e-2);
  EXPECT_GE(fitted_order(hs, errs), 1.8);
}

TEST(BoundaryPairing, RejectsBadCollar) {
  const MeshPtr m = build_polar_mesh(4, 16, 1.0);
  const ElementField w(m->num_triangles(), Point2(1.0, 0.0));
  auto one = [](double) { return 1.0; };
  EXPECT_EQ(code_of([&] { boundary_trace_pairing(*m, w, one, 0.0); }), ErrorCode::InvalidCollar);
  EXPECT_EQ(code_of([&] { boundary_trace_pairing(*m, w, one, 1.0); }), ErrorCode::InvalidCollar);
  EXPECT_EQ(code_of([&] { boundary_trace_pairing(*m, w, one, 0.5, {Ball2{Point2(0.45, 0), 0.1}}); }),
            ErrorCode::InvalidCollar);
}

TEST(LoopIntegrals, LogarithmGradient) {
  const PlaneField w = [](const Point2& x) { return Point2(x / x.squaredNorm()); };
  const LoopIntegrals li = loop_integrals(w, Point2::Zero(), 0.5, 64);
  EXPECT_NEAR(li.flux, 2.0 * kPi, 1e-10);
  EXPECT_NEAR(li.circulation, 0.0, 1e-10);
}

TEST(LoopIntegrals, RotatedLogGradientIsRadiusIndependent) {
  const PlaneField w = [](const Point2& x) { return Point2(-x.y() / x.squaredNorm(), x.x() / x.squaredNorm()); };
  for (double r : {0.2, 0.4, 0.8}) {
    EXPECT_NEAR(loop_integrals(w, Point2::Zero(), r, 64).circulation, 2.0 * kPi, 1e-10);
  }
}

TEST(LoopIntegrals, ConeAngleFieldCirculation) {
  // i conj(g) grad g = (p - q) grad theta, so the circulation is 2 pi (p - q).
  const ExampleMap e = sw_cone(1, 2);
  const LoopIntegrals li = loop_integrals(e.angle_flux, Point2::Zero(), 0.5, 64);
  EXPECT_NEAR(li.flux, 0.0, 1e-10);
  EXPECT_NEAR(li.circulation, -2.0 * kPi, 1e-10);
}

TEST(LoopIntegrals, ConstantField) {
  const LoopIntegrals li = loop_integrals([](const Point2&) { return Point2(1.0, 0.0); }, Point2(0.1, 0.2), 0.3, 32);
  EXPECT_NEAR(li.flux, 0.0, 1e-12);
  EXPECT_NEAR(li.circulation, 0.0, 1e-12);
}

TEST(LoopIntegrals, RejectsCircleLeavingDisc) {
  const PlaneField w = [](const Point2&) { return Point2(1.0, 0.0); };
  EXPECT_EQ(code_of([&] { loop_integrals(w, Point2(0.5, 0.0), 0.6, 16); }), ErrorCode::InvalidLoop);
}
