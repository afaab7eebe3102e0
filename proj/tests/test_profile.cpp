#include <cmath>

#include <gtest/gtest.h>

#include "mkslab/profile.hpp"

using namespace mkslab;

namespace {

const Profile& front0() {
  static const Profile p = compute_front(0.0, -2.388);
  return p;
}

}  // namespace

TEST(Equilibria, RootsOfTheCubic) {
  const Equilibria eq = equilibria(-2.0, 0.3);
  ASSERT_TRUE(eq.three_real);
  for (const auto& r : eq.roots) {
    EXPECT_NEAR(r.phi * r.phi * r.phi - 2.0 * r.phi + 0.3, 0.0, 1e-12);
    EXPECT_NEAR(r.hyperbolicity, -2.0 + 3 * r.phi * r.phi, 1e-12);
    EXPECT_NEAR(r.lambda1 * r.lambda1 * r.lambda1 + r.lambda1 - r.hyperbolicity, 0.0, 1e-12);
  }
  EXPECT_LT(eq.minus().phi, eq.zero().phi);
  EXPECT_LT(eq.zero().phi, eq.plus().phi);
  EXPECT_FALSE(equilibria(1.0, 0.3).three_real);
}

TEST(Equilibria, SubspacesOrthonormalAndInvariant) {
  const double s = -2.388;
  const Equilibria eq = equilibria(s, 0.0);
  for (Root r : {Root::Minus, Root::Plus}) {
    const SubspaceBasis b = subspaces(eq, r);
    ASSERT_TRUE(b.orthonormal);
    EXPECT_EQ(b.unstable.size() + b.stable.size(), 3u);
    const Eigen::Matrix3d J = ProfileField{s, 0.0}.jacobian(Eigen::Vector3d(b.phi, 0, 0));
    // J maps each subspace into itself: no component along the complement.
    for (const auto& u : b.unstable) {
      for (const auto& c : b.unstable_complement) EXPECT_NEAR(c.dot(J * u), 0.0, 1e-10);
    }
    for (const auto& v : b.stable) {
      for (const auto& c : b.stable_complement) EXPECT_NEAR(c.dot(J * v), 0.0, 1e-10);
    }
  }
}

TEST(Front, SpeedAtZeroMu) {
  const Profile& p = front0();
  EXPECT_NEAR(p.s, -2.388, 5e-3);
  EXPECT_NEAR(p.phi_plus, std::sqrt(-p.s), 1e-10);
  EXPECT_NEAR(p.phi_minus, -std::sqrt(-p.s), 1e-10);
  EXPECT_LT(p.residual, 1e-8);
  EXPECT_LT(collocation_defect(p), 1e-8);
  EXPECT_NEAR(p.sample(0.0).phi, 0.5, 1e-10);
}

TEST(Front, SampleMatchesGridAndEnds) {
  const Profile& p = front0();
  const Eigen::Index i = p.size() / 3;
  EXPECT_NEAR(p.sample(p.z[i]).phi, p.phi[i], 1e-12);
  EXPECT_NEAR(p.sample(0.5 * (p.z[i] + p.z[i + 1])).dphi, 0.5 * (p.dphi[i] + p.dphi[i + 1]), 1e-4);
  EXPECT_EQ(p.sample(-1e3).phi, p.phi_minus);
  EXPECT_EQ(p.sample(1e3).phi, p.phi_plus);
}

TEST(Symmetry, BackFromFrontIsInvolutionBitExact) {
  const Profile& p = front0();
  const Profile b = back_from_front(p);
  EXPECT_EQ(b.kind, WaveKind::Back);
  EXPECT_EQ(b.mu, -p.mu);
  const Profile pp = back_from_front(b);
  EXPECT_EQ(pp.kind, p.kind);
  EXPECT_EQ(pp.s, p.s);
  EXPECT_EQ(pp.mu, p.mu);
  EXPECT_TRUE((pp.phi.array() == p.phi.array()).all());
  EXPECT_TRUE((pp.dphi.array() == p.dphi.array()).all());
  EXPECT_TRUE((pp.ddphi.array() == p.ddphi.array()).all());
  EXPECT_TRUE((pp.z.array() == p.z.array()).all());
}

TEST(Symmetry, BackSpeedMatchesFrontSpeed) {
  ContinuationOptions copt;
  const std::vector<double> grid{-0.5, 0.2};
  const ContinuationResult r = continue_in_mu(grid, front0(), copt);
  ASSERT_EQ(r.profiles.size(), 2u);
  for (const Profile& f : r.profiles) {
    const Profile seed = back_from_front(f);
    const Profile b = collocate(WaveKind::Back, -f.mu, seed.s, seed_from_profile(seed));
    EXPECT_EQ(b.kind, WaveKind::Back);
    EXPECT_NEAR(b.s, f.s, 1e-6) << "mu = " << f.mu;
  }
}

// Shooting only seeds collocation; it should get close to the target state.
TEST(Shooting, OptimizedEpsilonBeatsScanEnds) {
  const ShootingResult r = shoot_front(front0().s, 0.0, 7.0, 10.0);
  EXPECT_LT(r.mismatch, 0.05);
  EXPECT_LT(r.mismatch, shooting_mismatch(WaveKind::Front, front0().s, 0.0, 1e-1, 7.0, 10.0));
  EXPECT_LT(r.mismatch, shooting_mismatch(WaveKind::Front, front0().s, 0.0, 1e-16, 7.0, 10.0));
}

TEST(Continuation, TracksReferenceSpeeds) {
  const std::vector<double> grid{-1.0, 0.2};
  const ContinuationResult r = continue_in_mu(grid, front0());
  ASSERT_EQ(r.profiles.size(), 2u);
  EXPECT_NEAR(r.profiles[0].s, -4.69, 0.01 * 4.69);
  EXPECT_NEAR(r.profiles[1].s, -1.508, 0.01 * 1.508);
}

TEST(Names, WaveKindRoundTrip) {
  EXPECT_EQ(wave_kind_from_string(to_string(WaveKind::Back)), WaveKind::Back);
  EXPECT_THROW(wave_kind_from_string("sideways"), Error);
}
