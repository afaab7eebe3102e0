#include <cmath>

#include <gtest/gtest.h>

#include "mkslab/evolution.hpp"

using namespace mkslab;

namespace {

EvolutionState periodic_bump(int n, double length, double s) {
  EvolutionState st;
  st.z = Eigen::VectorXd::LinSpaced(n, 0.0, length * (n - 1) / n);
  st.p.resize(n);
  for (int j = 0; j < n; ++j) {
    const double x = 2 * M_PI * st.z[j] / length;
    st.p[j] = 0.4 * std::sin(x) + 0.2 * std::cos(2 * x) + 0.1;
  }
  st.s = s;
  return st;
}

}  // namespace

TEST(Operator, JacobianMatchesFiniteDifferences) {
  for (Boundary bc : {Boundary::Periodic, Boundary::Clamped}) {
    const int n = 30;
    const SpatialOperator op(n, 0.3, -1.7, bc, -0.8, 1.1);
    Eigen::VectorXd p(n);
    for (int j = 0; j < n; ++j) p[j] = std::sin(0.4 * j) + 0.1 * j / n;
    const Eigen::MatrixXd J = op.jacobian(p);
    const Eigen::MatrixXd F =
        finite_difference_jacobian([&](const Eigen::VectorXd& x) { return op.apply(x); }, p);
    EXPECT_LT((J - F).cwiseAbs().maxCoeff(), 1e-6 * (1 + J.cwiseAbs().maxCoeff()));
    const Eigen::VectorXd ds = (SpatialOperator(n, 0.3, -1.7 + 1e-6, bc, -0.8, 1.1).apply(p) -
                                SpatialOperator(n, 0.3, -1.7 - 1e-6, bc, -0.8, 1.1).apply(p)) /
                               2e-6;
    EXPECT_LT((op.speed_derivative(p) - ds).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Operator, ConstantIsSteady) {
  const SpatialOperator op(20, 0.1, -2.0, Boundary::Periodic);
  EXPECT_LT(op.apply(Eigen::VectorXd::Constant(20, 0.7)).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(CrankNicolson, PeriodicMassConserved) {
  const EvolutionState st = periodic_bump(128, 20.0, -1.0);
  EvolveOptions o;
  o.dt = 0.01;
  o.T = 2.0;
  const EvolutionResult r = evolve(st, o);
  const double drift = std::abs(r.final_state.mass(Boundary::Periodic) - st.mass(Boundary::Periodic));
  EXPECT_LT(drift / o.T, 1e-8);
  EXPECT_NEAR(r.final_state.t, 2.0, 1e-12);
}

TEST(CrankNicolson, SecondOrderInTime) {
  const EvolutionState st = periodic_bump(64, 20.0, -1.0);
  auto run = [&](double dt) {
    EvolveOptions o;
    o.dt = dt;
    o.T = 0.8;
    o.newton = Tolerances{1e-13, 1e-15, 30};
    return evolve(st, o).final_state.p;
  };
  const Eigen::VectorXd a = run(0.04), b = run(0.02), c = run(0.01);
  const double factor = (a - b).cwiseAbs().maxCoeff() / (b - c).cwiseAbs().maxCoeff();
  EXPECT_NEAR(factor, 4.0, 0.5);
}

TEST(DiscreteFront, StationaryUnderEvolution) {
  const Profile p = compute_front(0.0, -2.388);
  const DiscreteFront f = discrete_front(p, -40, 40, 0.1);
  EXPECT_LT(f.residual, 1e-9);
  EXPECT_NEAR(f.s, p.s, 5e-3);
  EvolutionState st{f.z, f.phi, 0.0, f.s};
  EvolveOptions o;
  o.T = 2.0;
  o.bc = Boundary::Clamped;
  o.left = f.phi_left;
  o.right = f.phi_right;
  const EvolutionResult r = evolve(st, o);
  EXPECT_LT((r.final_state.p - f.phi).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(DiscreteFront, PhaseFitRecoversShift) {
  const Profile p = compute_front(0.0, -2.388);
  const DiscreteFront f = discrete_front(p, -40, 40, 0.1);
  Eigen::VectorXd shifted(f.z.size());
  for (Eigen::Index j = 0; j < f.z.size(); ++j) shifted[j] = interpolate_grid(f.z, f.phi, f.z[j] + 0.37);
  EXPECT_NEAR(fit_phase_shift(f, shifted, 0.0), 0.37, 1e-3);
}

TEST(Height, SlopeMapsInvert) {
  const double gamma = 0.8, v0 = 0.1;
  EvolutionState st;
  st.z = Eigen::VectorXd::LinSpaced(101, -5, 5);
  st.p = st.z.array().tanh();
  st.s = -2.0;
  st.t = 1.5;
  const std::vector<HeightFrame> h = slope_to_height({st}, gamma, v0);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_LT((height_slope_to_p(h[0].hx, gamma) - st.p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(h[0].x[0], st.z[0] + (st.s + 1 / (2 * gamma)) * st.t, 1e-12);
  EXPECT_NEAR(h[0].h[0], -v0 * st.t, 1e-12);
}

TEST(LinearDecay, KernelDataRecoversUnitPhase) {
  CollocationOptions co;
  co.N = 1600;
  const Profile p = compute_front(0.0, -2.388, co);
  LinearDecayOptions o;
  o.n = 256;
  o.T = 4.0;
  const WeightedOperator W = weighted_operator(p, 0.3, o.n, p.L);
  EXPECT_LT(std::abs(W.kernel_eigenvalue), 1e-4);
  const LinearDecayReport r = linear_weighted_evolve(p, 0.3, weighted_derivative(p, 0.3, W.z), o);
  EXPECT_NEAR(r.gamma_inf, 1.0, 1e-6);
}
