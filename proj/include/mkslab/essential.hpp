#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mkslab/profile.hpp"

namespace mkslab {

/// Samples of the dispersion relation lambda = p(ik - a) of the weighted
/// constant-coefficient operator at one end state,
/// p(nu) = -nu^2 - nu^4 + (s + 3 phi^2) nu.
struct SpectralCurve {
  std::vector<double> params;  // wavenumbers k
  std::vector<cdouble> values;
  std::vector<double> real_closed_form;
  std::string label;
  double max_re = 0.0;
};

/// p(nu) for hyperbolicity coefficient c = s + 3 phi^2.
inline cdouble dispersion_symbol(double c, cdouble nu) {
  const cdouble nu2 = nu * nu;
  return -nu2 - nu2 * nu2 + c * nu;
}

/// Re p(ik - a) = -a^4 + a^2 (6k^2 - 1) - a c - k^4 + k^2.
double dispersion_real_part(double phi_sq, double s, double a, double k);

/// Uniform grid on [-5, 5] with 4001 points.
std::vector<double> default_k_grid();
std::vector<double> uniform_grid(double lo, double hi, int n);

SpectralCurve dispersion_curve(double phi_sq, double s, double a,
                               std::span<const double> k_grid);

/// RHS of the weight criterion, (32 a^4 + 8 a^2 + 1) / (4a).
double weight_rhs(double a);

/// True when s + 3 phi_sq > weight_rhs(a), i.e. the weighted border at this
/// end state lies strictly in the left half-plane.
bool weight_admissible(double s, double phi_sq, double a);

struct WeightWindow {
  double s = 0.0;
  double phi_sq = 0.0;
  double a_min = 0.0;
  double a_max = 0.0;
  bool admissible = false;
};

WeightWindow weight_interval(double s, double phi_sq);

struct CriticalSpeed {
  double s_star = 0.0;
  double a_star = 0.0;
  double min_rhs = 0.0;
  double reference = -0.83104;  // literature value
  bool discrepancy = false;     // |s_star - reference| > 0.01
};

/// Smallest speed magnitude of the mu = 0 family (phi^2 = -s) for which a
/// weight exists: -2 s = min_a weight_rhs(a).
CriticalSpeed critical_speed_sstar();

/// min(s + 3 phi_-^2, s + 3 phi_+^2) along a family.
double existence_margin(const Profile& p);

enum class CriticalMuMethod { SignChange, Fold };

struct CriticalMu {
  double mu_star = 0.0;
  CriticalMuMethod method = CriticalMuMethod::SignChange;
  double last_mu = 0.0;      // last family member on the approached side
  double last_margin = 0.0;  // existence_margin there
};

/// Root in mu of existence_margin over a continuation family, by secant on
/// the data. When the margin stays positive the family ends at a fold of
/// s(mu) (the continuation breaks down there); the fold is then located by
/// fitting s = s_f - C sqrt(mu_f - mu) through the last three members.
CriticalMu critical_mu_star(std::span<const Profile> family,
                            double max_extrapolation = 0.02);

struct FredholmBorders {
  SpectralCurve minus;
  SpectralCurve plus;
  double max_re = 0.0;
  bool coincide = false;  // phi_-^2 == phi_+^2: curve-type spectrum
};

FredholmBorders fredholm_borders(const Profile& p, double a,
                                 std::span<const double> k_grid);

}  // namespace mkslab
