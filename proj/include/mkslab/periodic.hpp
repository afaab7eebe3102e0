#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mkslab/profile.hpp"

namespace mkslab {

/// A profile restricted to the window [z_lo, z_hi] outside which it is
/// within `tol` of its end states.
struct Segment {
  Profile profile;
  double z_lo = 0.0;
  double z_hi = 0.0;
  double tol = 0.0;

  double length() const { return z_hi - z_lo; }
  double left_value() const { return profile.phi_minus; }
  double right_value() const { return profile.phi_plus; }
};

Segment truncate_profile(const Profile& p, double tol = 1e-3);

/// One region of a cell block: a truncated layer or a constant spacer.
struct BlockPiece {
  enum class Kind { Layer, Spacer };
  Kind kind = Kind::Spacer;
  int segment = -1;    // index into CellBlock::segments for layers
  double value = 0.0;  // spacer value
  double length = 0.0;
  char region = 'A';   // A: spacer at phi_-, B: front, C: spacer at phi_+, D: back
};

struct CellBlock {
  std::vector<Segment> segments;  // [front, back]
  std::vector<BlockPiece> pieces;
  double junction_tol = 0.0;
  int n_pairs = 0;

  double length() const;
  double total_spacing() const;
  std::vector<double> layout() const;  // piece lengths in order
};

/// Layout A_1 B C_1 D A_2 B C_2 D ...; spacings = (A_1, C_1, A_2, C_2, ...),
/// 2 n_pairs non-negative values.
CellBlock build_cell_block(const Segment& front, const Segment& back,
                           const std::vector<double>& spacings, int n_pairs);

enum class Allocation { Equal, SingleGap };

std::string to_string(Allocation a);
Allocation allocation_from_string(const std::string& text);

/// Spreads a total spacing over the 2 n_pairs spacer slots.
std::vector<double> allocate_spacing(double total, int n_pairs, Allocation policy);

struct PeriodicPattern {
  double X = 0.0;
  double s = 0.0;
  double mu = 0.0;
  double total_spacing = 0.0;
  std::vector<double> layout;
  Eigen::VectorXd z;  // n uniform nodes on [0, X), n even
  Eigen::VectorXd phi;
  Eigen::VectorXd dphi;
  Eigen::VectorXd ddphi;
  std::vector<double> layer_centers;  // z of each transition's phase anchor
  double blend_width = 0.0;

  double dz() const { return z.size() > 1 ? z[1] - z[0] : 0.0; }
};

struct PeriodizeOptions {
  double dz = 0.05;
  /// Width of a C-infinity blend of each layer's truncated tail into the
  /// adjacent spacer value; 0 keeps the raw C0 concatenation.
  double blend_width = 0.0;
};

PeriodicPattern periodize(const CellBlock& block, const PeriodizeOptions& options = {});

/// Constant pattern of period X.
PeriodicPattern constant_pattern(double value, double s, double X, double dz = 0.05);

struct HillSpectrum {
  std::vector<double> floquet;                   // xi samples in [-pi/X, pi/X)
  std::vector<std::vector<cdouble>> eigenvalues;  // per xi
  double max_re = 0.0;
  double max_re_xi = 0.0;
  int modes = 0;  // N
  double coefficient_tail = 0.0;  // max |c_k| / |c_0| for N < |k| <= 2N
};

struct HillOptions {
  int N = 64;
  int M = 64;
  // Relative Fourier tail of 3 Phi^2 allowed before truncation-insufficient.
  // A C0 concatenation with 1e-3 junction jumps sits near 1e-5.
  double decay_tol = 1e-4;
  bool check_decay = true;
};

/// Spectrum of L[Phi] v = -v'' - v'''' + s v' + 3 (Phi^2 v)' in the Bloch
/// basis e^{i(2 pi n / X + xi) z}, |n| <= N.
HillSpectrum hill_spectrum(const PeriodicPattern& pattern, const HillOptions& options = {});

/// Fourier coefficients c_k, |k| <= K, of samples on a period.
std::vector<cdouble> fourier_coefficients(const Eigen::VectorXd& samples, int K);

struct CriticalSpacingOptions {
  Allocation allocation = Allocation::Equal;
  PeriodizeOptions periodize;
  HillOptions hill{32, 32};
  double stability_tol = 1e-3;  // max_re above this counts as unstable
  double spacing_tol = 2e-2;    // bracket width at termination
  double modes_per_length = 1.0;  // N grows with the period: N >= this * X
};

struct CriticalSpacing {
  double total = 0.0;
  double lo = 0.0;  // last stable total spacing
  double hi = 0.0;  // last unstable total spacing
  double max_re_lo = 0.0;
  double max_re_hi = 0.0;
  int iterations = 0;
};

/// Hill truncation used for a pattern under the options.
HillOptions hill_options_for(const PeriodicPattern& pattern, const CriticalSpacingOptions& o);

/// max_re of the pattern with the given total spacing.
double spacing_max_re(const Segment& front, const Segment& back, double total, int n_pairs,
                      const CriticalSpacingOptions& options);

CriticalSpacing critical_spacing(const Segment& front, const Segment& back, double lo, double hi,
                                 int n_pairs, const CriticalSpacingOptions& options = {});

struct RefinedPattern {
  PeriodicPattern pattern;
  double mu = 0.0;
  double residual = 0.0;       // Hermite-Simpson defect, max-norm
  double sup_distance = 0.0;   // max |Phi_refined - Phi_seed|
  int newton_iterations = 0;
};

/// Periodic Hermite-Simpson collocation of phi''' = s phi - phi' + phi^3 + mu
/// on the pattern grid with X and s fixed, mu free, and phase
/// integral (Phi - seed) seed' = 0.
RefinedPattern refine_periodic_bvp(const PeriodicPattern& seed);

/// Discrete steady state of the evolution operator on the pattern grid
/// (periodic), with the mass of the seed and speed as unknown.
struct DiscretePattern {
  Eigen::VectorXd z;
  Eigen::VectorXd phi;
  double s = 0.0;
  double residual = 0.0;
};

DiscretePattern discrete_periodic_steady(const PeriodicPattern& pattern, double dz);

struct StabilizationOptions {
  double dz = 0.1;
  double dt = 0.01;
  double T = 20.0;
  double record_every = 1.0;
  double center = 0.0;  // Gaussian centre, pattern coordinate
  double width = 1.0;
  double amplitude = 0.01;
  double fit_half_width = 3.0;
};

struct StabilizationReport {
  std::vector<double> times;
  std::vector<double> layer_centers;
  std::vector<std::vector<double>> shifts;  // [time][layer]
  std::vector<double> deviation;            // max |p - steady(. + shift)| per time
  double s_discrete = 0.0;
  bool decaying = false;  // final deviation below a tenth of the initial one
};

StabilizationReport stabilization_experiment(const PeriodicPattern& pattern,
                                             const StabilizationOptions& options = {});

}  // namespace mkslab
