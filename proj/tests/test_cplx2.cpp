#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lagfree/cplx2.hpp"
#include "lagfree/examples.hpp"
#include "test_util.hpp"

using namespace lagfree;
using lagfree::testing::random_vector;

namespace {

void expect_near(const AmbientVector& a, const AmbientVector& b, double tol) {
  EXPECT_LE(norm(a - b), tol) << "(" << a.x1 << "," << a.y1 << "," << a.x2 << "," << a.y2 << ") vs ("
                              << b.x1 << "," << b.y1 << "," << b.x2 << "," << b.y2 << ")";
}

}  // namespace

TEST(ComplexStructure, IOnBasisVectors) {
  expect_near(apply_I({1, 0, 0, 0}), {0, 1, 0, 0}, 0.0);
  expect_near(apply_I({0, 0, 1, 0}), {0, 0, 0, 1}, 0.0);
}

TEST(ComplexStructure, JOnBasisVector) { expect_near(apply_J({0, 0, 1, 0}), {1, 0, 0, 0}, 0.0); }

TEST(ComplexStructure, QuaternionRelations) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 1000; ++k) {
    const AmbientVector v = random_vector(rng);
    expect_near(apply_I(apply_I(v)), -v, 1e-14);
    expect_near(apply_J(apply_J(v)), -v, 1e-14);
    expect_near(apply_I(apply_J(v)) + apply_J(apply_I(v)), {}, 1e-14);
    expect_near(apply_K(apply_K(v)), -v, 1e-14);
  }
}

TEST(ComplexStructure, JAnticommutesWithIByExpansion) {
  // I J v = I (conj z2, -conj z1) = (i conj z2, -i conj z1);
  // J I v = J (i z1, i z2) = (conj(i z2), -conj(i z1)) = (-i conj z2, i conj z1).
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const AmbientVector v = random_vector(rng);
    const cplx i(0, 1);
    const AmbientVector ij = AmbientVector::from_complex(i * std::conj(v.z2()), -i * std::conj(v.z1()));
    const AmbientVector ji = AmbientVector::from_complex(-i * std::conj(v.z2()), i * std::conj(v.z1()));
    expect_near(apply_I(apply_J(v)), ij, 1e-15);
    expect_near(apply_J(apply_I(v)), ji, 1e-15);
  }
}

TEST(Symplectic, BasisValues) {
  EXPECT_EQ(symplectic({1, 0, 0, 0}, {0, 1, 0, 0}), 1.0);
  EXPECT_EQ(symplectic({1, 0, 0, 0}, {0, 0, 1, 0}), 0.0);
}

TEST(Symplectic, AntisymmetricAndEqualsIPairing) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 1000; ++k) {
    const AmbientVector a = random_vector(rng), b = random_vector(rng);
    EXPECT_EQ(symplectic(a, a), 0.0);
    EXPECT_NEAR(symplectic(a, b), dot(apply_I(a), b), 1e-14);
    EXPECT_NEAR(symplectic(a, b), -symplectic(b, a), 1e-14);
  }
}

TEST(HolomorphicArea, BasisAndAntisymmetry) {
  const cplx v = holomorphic_area({1, 0, 0, 0}, {0, 0, 1, 0});
  EXPECT_EQ(v, cplx(1.0, 0.0));
  std::mt19937_64 rng(10);
  for (int k = 0; k < 100; ++k) {
    const AmbientVector a = random_vector(rng);
    EXPECT_EQ(std::abs(holomorphic_area(a, a)), 0.0);
  }
}

TEST(HolomorphicArea, ConeFrameAtQuarterTurn) {
  // e^{2 lambda} conj(g) = pq r^{2(sqrt(pq)-1)} e^{i(p-q) theta} = 2 e^{-i pi/2}.
  const ExampleMap e = sw_cone(1, 2);
  const TangentFrame f = e.polar_frame(1.0, std::numbers::pi / 2);
  const cplx v = holomorphic_area(f.e_x, f.e_y);
  EXPECT_NEAR(v.real(), 0.0, 1e-14);
  EXPECT_NEAR(v.imag(), -2.0, 1e-14);
}

TEST(LagrangianAngle, FlatFrame) {
  const AngleData d = lagrangian_angle({{1, 0, 0, 0}, {0, 0, 1, 0}});
  EXPECT_EQ(d.conformal_factor, 1.0);
  EXPECT_EQ(d.angle.re, 1.0);
  EXPECT_EQ(d.angle.im, 0.0);
}

TEST(LagrangianAngle, ConeFrameMatchesPaperAngle) {
  const ExampleMap e = sw_cone(1, 2);
  const AngleData d = lagrangian_angle(e.polar_frame(1.0, std::numbers::pi / 2));
  EXPECT_NEAR(d.conformal_factor, 2.0, 1e-14);
  EXPECT_NEAR(d.angle.re, 0.0, 1e-14);
  EXPECT_NEAR(d.angle.im, -1.0, 1e-14);
}

TEST(LagrangianAngle, NonminimalFrame) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const ExampleMap e = nonminimal_map();
  for (int k = 0; k < 20; ++k) {
    const double x = U(rng), y = U(rng);
    const AngleData d = lagrangian_angle(e.frame(Point2(x, y)));
    EXPECT_NEAR(d.conformal_factor, 1.0, 1e-15);
    EXPECT_NEAR(d.angle.re, std::cos(x), 1e-15);
    EXPECT_NEAR(d.angle.im, -std::sin(x), 1e-15);
  }
}

TEST(LagrangianAngle, DegenerateFrameThrows) {
  try {
    lagrangian_angle(TangentFrame{});
    FAIL() << "expected DegenerateFrame";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateFrame);
  }
}

TEST(LagrangianAngle, HolomorphicFrameIsNotLagrangian) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const AmbientVector a = random_vector(rng);
    const AmbientVector b = apply_I(a);
    EXPECT_NEAR(std::abs(holomorphic_area(a, b)), 0.0, 1e-14);
    EXPECT_NEAR(symplectic(a, b), norm_sq(a), 1e-13);
  }
}

TEST(LagrangianAngle, UnitModulus) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const AngleData d = lagrangian_angle({random_vector(rng), random_vector(rng)});
    EXPECT_NEAR(d.angle.re * d.angle.re + d.angle.im * d.angle.im, 1.0, 1e-12);
  }
}

TEST(Realify, MatchesComplexAction) {
  std::mt19937_64 rng(14);
  const Eigen::Matrix2cd U = lagfree::testing::random_unitary(rng);
  for (int k = 0; k < 20; ++k) {
    const AmbientVector v = random_vector(rng);
    const Eigen::Vector2cd z(v.z1(), v.z2());
    const Eigen::Vector2cd w = U * z;
    expect_near(AmbientVector::from_eigen(realify(U) * v.eigen()), AmbientVector::from_complex(w(0), w(1)), 1e-14);
  }
}

TEST(Realify, UnitaryPreservesOmega) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix2cd U = lagfree::testing::random_unitary(rng);
    const AmbientVector a = random_vector(rng), b = random_vector(rng);
    EXPECT_NEAR(symplectic(apply(U, a), apply(U, b)), symplectic(a, b), 1e-13);
  }
}
