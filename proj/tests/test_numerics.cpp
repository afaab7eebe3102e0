#include <atomic>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "mkslab/eig.hpp"
#include "mkslab/minimize.hpp"
#include "mkslab/newton.hpp"
#include "mkslab/ode.hpp"
#include "mkslab/parallel.hpp"
#include "mkslab/polynomial.hpp"

using namespace mkslab;

TEST(Horner, MatchesDirectEvaluation) {
  const std::vector<double> c{2.0, -3.0, 0.5, 7.0};
  for (double x : {-2.0, -0.3, 0.0, 1.7}) {
    EXPECT_NEAR(horner(std::span<const double>(c), x), 2 * x * x * x - 3 * x * x + 0.5 * x + 7, 1e-12);
  }
  const cdouble z{0.3, -1.1};
  EXPECT_LT(std::abs(horner(std::span<const double>(c), z) -
                     (2.0 * z * z * z - 3.0 * z * z + 0.5 * z + 7.0)),
            1e-12);
}

TEST(Cubic, ThreeRealRootsSortedAndExact) {
  // (x + 2)(x - 0.5)(x - 3)
  const auto r = real_cubic_roots(-1.5, -5.5, 3.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], -2.0, 1e-13);
  EXPECT_NEAR(r[1], 0.5, 1e-13);
  EXPECT_NEAR(r[2], 3.0, 1e-13);
}

TEST(Cubic, ComplexPairFollowsRealRoot) {
  // (x - 1)(x^2 + 1)
  const auto r = solve_cubic_real(-1.0, 1.0, -1.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].imag(), 0.0);
  EXPECT_NEAR(r[0].real(), 1.0, 1e-13);
  EXPECT_NEAR(std::abs(r[1].imag()), 1.0, 1e-13);
  EXPECT_NEAR(std::abs(r[1] - std::conj(r[2])), 0.0, 1e-13);
  EXPECT_EQ(real_cubic_roots(-1.0, 1.0, -1.0).size(), 1u);
}

TEST(Cubic, ResidualsSmallOnRandomCoefficients) {
  for (int i = 0; i < 50; ++i) {
    const double c2 = std::sin(1.3 * i) * 4, c1 = std::cos(0.7 * i) * 5, c0 = std::sin(2.1 * i + 1) * 3;
    for (const cdouble& x : solve_cubic_real(c2, c1, c0)) {
      EXPECT_LT(std::abs(x * x * x + c2 * x * x + c1 * x + c0), 1e-10 * (1 + std::norm(x) * std::abs(x)));
    }
  }
}

TEST(Companion, RecoversKnownRoots) {
  const std::vector<cdouble> roots{{1, 2}, {-0.5, 0}, {3, -1}, {0, 0.25}};
  std::vector<cdouble> coeffs{1.0};
  for (const cdouble& r : roots) {
    std::vector<cdouble> next(coeffs.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      next[k] += coeffs[k];
      next[k + 1] -= r * coeffs[k];
    }
    coeffs = next;
  }
  const auto found = companion_roots(coeffs);
  ASSERT_EQ(found.size(), roots.size());
  for (const cdouble& r : roots) {
    double best = 1e300;
    for (const cdouble& f : found) best = std::min(best, std::abs(f - r));
    EXPECT_LT(best, 1e-11);
  }
}

TEST(Eig, SortedAndSatisfiesDefinition) {
  Eigen::MatrixXcd A(3, 3);
  A << 1.0, 2.0, 0.0,
       -2.0, 1.0, 0.5,
       0.0, 0.3, -4.0;
  const EigenDecomposition d = eig_dense(A);
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT((A * d.vectors.col(k) - d.values[k] * d.vectors.col(k)).norm(), 1e-12);
    EXPECT_NEAR(d.vectors.col(k).norm(), 1.0, 1e-12);
  }
  for (int k = 0; k + 1 < 3; ++k) EXPECT_LE(d.values[k].real(), d.values[k + 1].real());
  EXPECT_LT((eigenvalues_dense(A) - d.values).norm(), 1e-12);
}

TEST(Minimize, BrentFindsInteriorMinimum) {
  const ScalarMinimum m = minimize_scalar([](double x) { return (x - 1.3) * (x - 1.3) + 0.2; }, 0, 3);
  EXPECT_TRUE(m.interior);
  EXPECT_NEAR(m.x, 1.3, 1e-7);
  EXPECT_NEAR(m.fx, 0.2, 1e-13);
}

TEST(Minimize, MonotoneReturnsEndpoint) {
  const ScalarMinimum m = minimize_scalar([](double x) { return x; }, 0, 1);
  EXPECT_FALSE(m.interior);
  EXPECT_NEAR(m.x, 0.0, 1e-8);
}

TEST(Bisect, RootAndMissingBracket) {
  EXPECT_NEAR(bisect_root([](double x) { return std::cos(x); }, 0, 3), M_PI / 2, 1e-11);
  EXPECT_THROW(bisect_root([](double x) { return x * x + 1; }, -1, 1), Error);
}

TEST(Rk45, ExponentialForwardAndBackward) {
  auto field = [](double, const Eigen::Vector2d& y) { return Eigen::Vector2d(y[1], -y[0]); };
  const auto fwd = integrate_rk45(field, Eigen::Vector2d(1, 0), 0.0, 2 * M_PI);
  ASSERT_TRUE(fwd.ok());
  EXPECT_NEAR(fwd.back()[0], 1.0, 1e-8);
  EXPECT_NEAR(fwd.back()[1], 0.0, 1e-8);
  const auto bwd = integrate_rk45(field, Eigen::Vector2d(1, 0), 0.0, -1.0);
  ASSERT_TRUE(bwd.ok());
  EXPECT_LT(bwd.z.front(), bwd.z.back());
  EXPECT_NEAR(terminal_value(bwd, 0.0, -1.0)[0], std::cos(1.0), 1e-8);
}

TEST(Rk45, EscapeStopsEarly) {
  Rk45Options o;
  o.escape_norm = 10;
  const auto t = integrate_rk45([](double, const Eigen::Matrix<double, 1, 1>& y) { return y; },
                                Eigen::Matrix<double, 1, 1>(1.0), 0.0, 100.0, o);
  EXPECT_EQ(t.status, IntegrationStatus::Escaped);
  EXPECT_LT(t.z.back(), 5.0);
}

TEST(Newton, DenseAndSparseAgree) {
  const ResidualFn F = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(2);
    r << x[0] * x[0] + x[1] * x[1] - 4, x[0] - x[1];
    return r;
  };
  const DenseJacobianFn J = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(2, 2);
    j << 2 * x[0], 2 * x[1], 1, -1;
    return j;
  };
  const SparseJacobianFn Js = [&](const Eigen::VectorXd& x) {
    Eigen::SparseMatrix<double> s = J(x).sparseView();
    return s;
  };
  const Eigen::VectorXd x0 = Eigen::Vector2d(3, 0.5);
  const NewtonResult d = newton_solve(F, J, x0);
  const NewtonResult s = newton_solve_sparse(F, Js, x0);
  ASSERT_TRUE(d.converged);
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(d.x[0], std::sqrt(2.0), 1e-10);
  EXPECT_LT((d.x - s.x).norm(), 1e-12);
}

TEST(Newton, FiniteDifferenceJacobianMatchesAnalytic) {
  const ResidualFn F = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(3);
    r << std::sin(x[0]) * x[1], x[2] * x[2] - x[0], std::exp(x[1]);
    return r;
  };
  const Eigen::Vector3d x(0.4, -0.2, 1.5);
  Eigen::Matrix3d J;
  J << std::cos(x[0]) * x[1], std::sin(x[0]), 0,
       -1, 0, 2 * x[2],
       0, std::exp(x[1]), 0;
  EXPECT_LT((finite_difference_jacobian(F, x) - J).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_GE(thread_count(), 1u);
}

TEST(Parallel, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(64, [](std::size_t i) {
                 if (i == 17) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
