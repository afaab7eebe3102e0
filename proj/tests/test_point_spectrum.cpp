#include <algorithm>
#include <cmath>
#include <tuple>

#include <gtest/gtest.h>

#include "mkslab/essential.hpp"
#include "mkslab/point_spectrum.hpp"

using namespace mkslab;

namespace {

Matrix4cd sample_matrix() {
  Matrix4cd A;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) A(i, j) = cdouble(std::sin(1.0 + 3 * i + j), std::cos(2.0 * i - j));
  }
  return A;
}

Vector4cd sample_vector(double seed) {
  Vector4cd v;
  for (int i = 0; i < 4; ++i) v[i] = cdouble(std::sin(seed + i), std::cos(seed * i + 0.5));
  return v;
}

const Profile& front0() {
  static const Profile p = compute_front(0.0, -2.388);
  return p;
}

Profile constant_profile(double value, double s) {
  Profile p;
  p.kind = WaveKind::Front;
  p.s = s;
  p.mu = -value * value * value - s * value;
  p.L = 20.0;
  p.N = 200;
  const int n = 2 * p.N + 1;
  p.z = Eigen::VectorXd::LinSpaced(n, -p.L, p.L);
  p.phi = Eigen::VectorXd::Constant(n, value);
  p.dphi = Eigen::VectorXd::Zero(n);
  p.ddphi = Eigen::VectorXd::Zero(n);
  p.phi_minus = value;
  p.phi_plus = value;
  return p;
}

}  // namespace

TEST(Compound, ActsAsDerivationOnWedges) {
  const Matrix4cd A = sample_matrix();
  const Vector4cd u = sample_vector(0.3), v = sample_vector(1.9);
  const Vector6cd lhs = compound_matrix(A) * wedge(u, v);
  const Vector6cd rhs = wedge(A * u, v) + wedge(u, A * v);
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
}

TEST(Compound, TraceIsThriceTheTrace) {
  const Matrix4cd A = sample_matrix();
  EXPECT_LT(std::abs(compound_matrix(A).trace() - 3.0 * A.trace()), 1e-12);
}

TEST(Wedge, DecomposableHasZeroPluckerDefect) {
  EXPECT_LT(std::abs(plucker_defect(wedge(sample_vector(0.1), sample_vector(2.2)))), 1e-14);
  Vector6cd e = Vector6cd::Zero();
  e[0] = 1.0;  // e12 + e34 is not decomposable
  e[5] = 1.0;
  EXPECT_NEAR(std::abs(plucker_defect(e)), 1.0, 1e-15);
}

TEST(Wedge, PairingIsDeterminant) {
  const Vector4cd u1 = sample_vector(0.1), u2 = sample_vector(0.7), w1 = sample_vector(1.3),
                  w2 = sample_vector(2.9);
  Matrix4cd M;
  M << u1, u2, w1, w2;
  EXPECT_LT(std::abs(wedge_pairing(wedge(u1, u2), wedge(w1, w2)) - M.determinant()), 1e-12);
}

TEST(Spatial, EigenvaluesSolveSymbolAndSplit) {
  const double phi_sq = 2.388, s = -2.388, a = 0.3;
  const cdouble lambda{0.4, 1.2};
  const SpatialEigs e = asymptotic_spatial_eigs(phi_sq, s, a, lambda);
  ASSERT_EQ(e.stable.size(), 2u);
  ASSERT_EQ(e.unstable.size(), 2u);
  const Matrix4cd A = asymptotic_matrix(std::sqrt(phi_sq), s, a, lambda);
  for (const auto& [mus, vecs, sign] :
       {std::tuple{e.stable, e.stable_vectors, -1.0}, std::tuple{e.unstable, e.unstable_vectors, 1.0}}) {
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_GT(sign * mus[k].real(), 0.0);
      EXPECT_LT(std::abs(dispersion_symbol(s + 3 * phi_sq, mus[k] - a) - lambda), 1e-10);
      EXPECT_LT((A * vecs[k] - mus[k] * vecs[k]).norm(), 1e-9 * (1 + vecs[k].norm()));
    }
  }
}

TEST(Evans, ConjugateSymmetry) {
  const cdouble lambda{0.7, 1.4};
  const cdouble d = evans_eval(front0(), 0.3, lambda);
  const cdouble dc = evans_eval(front0(), 0.3, std::conj(lambda));
  EXPECT_LT(std::abs(dc - std::conj(d)), 1e-7 * std::abs(d));
}

TEST(Evans, VanishesAtTranslationEigenvalue) {
  const double d0 = std::abs(evans_eval(front0(), 0.3, 0.0));
  const double d1 = std::abs(evans_eval(front0(), 0.3, 1.0));
  EXPECT_LT(d0, 1e-6 * d1);
  const EvansSample smp = evans_sample(front0(), 0.3, cdouble(0.5, 0.5));
  EXPECT_LT(smp.plucker, 1e-8);
}

TEST(Evans, ConstantProfileHasNoZeros) {
  const Profile c = constant_profile(std::sqrt(2.388), -2.388);
  const EvansResult r = winding_number(c, 0.3, ContourSpec::half_disk(0.01, 9.39));
  EXPECT_EQ(r.winding, 0);
  EXPECT_LT(r.closure_defect, 1e-8);
}

TEST(Contour, HalfDiskIsClosedAndPositive) {
  const ContourSpec c = ContourSpec::half_disk(0.01, 5.0);
  EXPECT_LT(std::abs(c.at(0.0) - c.at(1.0 - 1e-12)), 1e-9);
  double area = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const cdouble p = c.at(double(i) / n), q = c.at(double(i + 1) / n);
    area += 0.5 * (p.real() * q.imag() - q.real() * p.imag());
  }
  EXPECT_NEAR(area, 0.5 * M_PI * 25.0, 0.05);
}

TEST(Bounds, CoefficientsAndFiniteRadius) {
  const EnergyBound b = energy_bounds(front0(), 0.3);
  EXPECT_NEAR(b.alpha0, 0.09 + 0.0081, 1e-14);
  EXPECT_NEAR(b.alpha1, 0.6 + 4 * 0.027, 1e-14);
  EXPECT_NEAR(b.alpha2, 6 * 0.09 + 1, 1e-14);
  EXPECT_NEAR(b.alpha3, 1.2, 1e-14);
  EXPECT_FALSE(b.second_applicable);
  EXPECT_TRUE(std::isnan(b.bound_re_plus_abs_im));
  EXPECT_TRUE(std::isfinite(b.R));
  EXPECT_GT(b.R, b.re_bound);
}
