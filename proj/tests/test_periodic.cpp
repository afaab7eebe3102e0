#include <cmath>

#include <gtest/gtest.h>

#include "mkslab/essential.hpp"
#include "mkslab/periodic.hpp"

using namespace mkslab;

namespace {

const Profile& front0() {
  static const Profile p = compute_front(0.0, -2.388);
  return p;
}

struct Pair {
  Segment front;
  Segment back;
};

Pair pair(double tol) {
  return {truncate_profile(front0(), tol), truncate_profile(back_from_front(front0()), tol)};
}

}  // namespace

TEST(Truncation, WindowShrinksAsToleranceLoosens) {
  const Segment tight = truncate_profile(front0(), 1e-4);
  const Segment loose = truncate_profile(front0(), 1e-2);
  EXPECT_GT(tight.length(), loose.length());
  EXPECT_LT(tight.z_lo, 0.0);
  EXPECT_GT(tight.z_hi, 0.0);
  EXPECT_LE(std::abs(front0().sample(tight.z_hi).phi - front0().phi_plus), 1e-4);
  EXPECT_LE(std::abs(front0().sample(tight.z_lo).phi - front0().phi_minus), 1e-4);
}

TEST(CellBlock, LayoutAndLength) {
  const Pair sg = pair(2e-3);
  const CellBlock b = build_cell_block(sg.front, sg.back, {1.0, 2.0, 3.0, 4.0}, 2);
  ASSERT_EQ(b.pieces.size(), 8u);
  EXPECT_EQ(b.pieces[0].region, 'A');
  EXPECT_EQ(b.pieces[1].region, 'B');
  EXPECT_EQ(b.pieces[2].region, 'C');
  EXPECT_EQ(b.pieces[3].region, 'D');
  EXPECT_DOUBLE_EQ(b.total_spacing(), 10.0);
  EXPECT_NEAR(b.length(), 10.0 + 2 * (sg.front.length() + sg.back.length()), 1e-12);
  EXPECT_THROW(build_cell_block(sg.front, sg.back, {1.0}, 2), Error);
  EXPECT_THROW(build_cell_block(sg.front, sg.back, {-1.0, 1.0}, 1), Error);
}

TEST(CellBlock, IncompatibleEndStatesRejected) {
  ContinuationOptions copt;
  const std::vector<double> grid{-0.1};
  const Profile f = continue_in_mu(grid, front0(), copt).profiles.at(0);
  // A back of the opposite mu has different end states.
  EXPECT_THROW(build_cell_block(truncate_profile(f), truncate_profile(back_from_front(f)), {1.0, 1.0}, 1),
               Error);
}

TEST(Allocation, PoliciesSumToTotal) {
  for (int n : {1, 2, 3}) {
    for (Allocation a : {Allocation::Equal, Allocation::SingleGap}) {
      const auto v = allocate_spacing(12.0, n, a);
      ASSERT_EQ(v.size(), 2u * n);
      double sum = 0.0;
      for (double x : v) sum += x;
      EXPECT_NEAR(sum, 12.0, 1e-12);
    }
  }
  const auto single = allocate_spacing(9.0, 2, Allocation::SingleGap);
  EXPECT_DOUBLE_EQ(single.back(), 9.0);
  EXPECT_EQ(allocation_from_string(to_string(Allocation::SingleGap)), Allocation::SingleGap);
  EXPECT_THROW(allocation_from_string("lumpy"), Error);
}

TEST(Periodize, PeriodAndEvenGrid) {
  const Pair sg = pair(2e-3);
  const CellBlock b = build_cell_block(sg.front, sg.back, allocate_spacing(7.0, 1, Allocation::Equal), 1);
  const PeriodicPattern p = periodize(b);
  EXPECT_NEAR(p.X, b.length(), 1e-12);
  EXPECT_EQ(p.z.size() % 2, 0);
  EXPECT_NEAR(p.dz() * p.z.size(), p.X, 1e-12);
  EXPECT_EQ(p.layer_centers.size(), 2u);
  EXPECT_DOUBLE_EQ(p.s, front0().s);
}

TEST(Hill, ConstantPatternMatchesDispersion) {
  const double phi = std::sqrt(-front0().s), s = front0().s;
  const PeriodicPattern c = constant_pattern(phi, s, 12.0, 0.025);
  HillOptions o;
  o.N = 64;
  o.M = 16;
  const HillSpectrum h = hill_spectrum(c, o);
  double worst = 0.0;
  for (std::size_t j = 0; j < h.floquet.size(); ++j) {
    for (const cdouble& lam : h.eigenvalues[j]) {
      // Each eigenvalue is the unweighted symbol at some Bloch wavenumber.
      double best = 1e300;
      for (int r = -o.N; r <= o.N; ++r) {
        const double q = 2 * M_PI * r / c.X + h.floquet[j];
        best = std::min(best, std::abs(lam - dispersion_symbol(s + 3 * phi * phi, cdouble(0, q))));
      }
      worst = std::max(worst, best);
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Hill, ConjugateSymmetricInFloquet) {
  const Pair sg = pair(2e-3);
  const PeriodicPattern p =
      periodize(build_cell_block(sg.front, sg.back, allocate_spacing(7.0, 1, Allocation::Equal), 1));
  HillOptions o;
  o.N = 32;
  o.M = 16;
  const HillSpectrum h = hill_spectrum(p, o);
  ASSERT_EQ(h.floquet.size(), 16u);
  // xi_j and xi_{M-j} are mirror images: their spectra are complex conjugates.
  for (int j = 1; j < 8; ++j) {
    EXPECT_NEAR(h.floquet[j], -h.floquet[16 - j], 1e-12);
    for (const cdouble& lam : h.eigenvalues[j]) {
      double best = 1e300;
      for (const cdouble& mu : h.eigenvalues[16 - j]) best = std::min(best, std::abs(std::conj(lam) - mu));
      EXPECT_LT(best, 1e-8 * (1 + std::abs(lam)));
    }
  }
}

TEST(Hill, StableAtSevenUnstableAtFourteen) {
  const Pair sg = pair(2e-3);
  const CriticalSpacingOptions o;
  EXPECT_LT(spacing_max_re(sg.front, sg.back, 7.0, 1, o), o.stability_tol);
  EXPECT_GT(spacing_max_re(sg.front, sg.back, 14.0, 1, o), o.stability_tol);
}

TEST(Hill, ConvergedInModeCount) {
  const Pair sg = pair(2e-3);
  const PeriodicPattern p =
      periodize(build_cell_block(sg.front, sg.back, allocate_spacing(14.0, 1, Allocation::Equal), 1));
  HillOptions a, b;
  a.N = 48;
  a.M = b.M = 16;
  b.N = 64;
  EXPECT_LT(std::abs(hill_spectrum(p, a).max_re - hill_spectrum(p, b).max_re), 1e-4);
}

TEST(Hill, FourierCoefficientsOfCosine) {
  const int n = 32;
  Eigen::VectorXd v(n);
  for (int j = 0; j < n; ++j) v[j] = 1.0 + 2.0 * std::cos(2 * M_PI * 3 * j / n);
  const auto c = fourier_coefficients(v, 4);
  ASSERT_EQ(c.size(), 9u);
  EXPECT_NEAR(std::abs(c[4] - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(c[7] - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(c[1] - 1.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(c[5]), 0.0, 1e-13);
}

TEST(Refine, ConstantPatternIsFixed) {
  const double phi = std::sqrt(-front0().s);
  const PeriodicPattern c = constant_pattern(phi, front0().s, 10.0, 0.1);
  const RefinedPattern r = refine_periodic_bvp(c);
  EXPECT_LT(r.residual, 1e-10);
  EXPECT_LT(r.sup_distance, 1e-8);
}

TEST(Refine, ZeroSpacingSeedConverges) {
  const Pair sg = pair(2e-3);
  const PeriodicPattern seed =
      periodize(build_cell_block(sg.front, sg.back, {0.0, 0.0}, 1), PeriodizeOptions{0.05, 0.0});
  const RefinedPattern r = refine_periodic_bvp(seed);
  EXPECT_LT(r.residual, 1e-8);
  EXPECT_LT(r.sup_distance, 0.1);
}

TEST(Stabilization, UnperturbedPatternStaysPut) {
  const Pair sg = pair(2e-3);
  const PeriodicPattern p = periodize(build_cell_block(sg.front, sg.back, {0.0, 0.0}, 1));
  StabilizationOptions o;
  o.amplitude = 0.0;
  o.T = 2.0;
  const StabilizationReport r = stabilization_experiment(p, o);
  for (double d : r.deviation) EXPECT_LT(d, 1e-8);
  for (double s : r.shifts.back()) EXPECT_LT(std::abs(s), 1e-6);
}
