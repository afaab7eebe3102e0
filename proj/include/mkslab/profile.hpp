#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mkslab/newton.hpp"
#include "mkslab/ode.hpp"

namespace mkslab {

using cdouble = std::complex<double>;

// Traveling-wave ODE  phi''' = s phi - phi' + phi^3 + mu  as y' = F(y),
// y = (phi, phi', phi'').
struct ProfileField {
  double s = 0.0;
  double mu = 0.0;

  Eigen::Vector3d operator()(const Eigen::Vector3d& y) const {
    return {y[1], y[2], s * y[0] - y[1] + y[0] * y[0] * y[0] + mu};
  }
  Eigen::Matrix3d jacobian(const Eigen::Vector3d& y) const {
    Eigen::Matrix3d j;
    j << 0, 1, 0,
         0, 0, 1,
         s + 3 * y[0] * y[0], -1, 0;
    return j;
  }
  /// dF/ds
  Eigen::Vector3d d_speed(const Eigen::Vector3d& y) const { return {0, 0, y[0]}; }
};

struct EquilibriumPoint {
  double phi = 0.0;
  double hyperbolicity = 0.0;  // s + 3 phi^2
  double lambda1 = 0.0;        // the real root of l^3 + l - (s + 3 phi^2)
  cdouble lambda_complex;      // the remaining pair, Im > 0 member
  bool hyperbolic = false;
  bool exist_ineq = false;  // s + 3 phi^2 > 0
};

enum class Root { Minus, Zero, Plus };

struct Equilibria {
  double mu = 0.0;
  double s = 0.0;
  bool three_real = false;  // false: single real root, no heteroclinic
  std::vector<EquilibriumPoint> roots;  // ascending in phi

  const EquilibriumPoint& at(Root r) const;
  const EquilibriumPoint& minus() const { return at(Root::Minus); }
  const EquilibriumPoint& zero() const { return at(Root::Zero); }
  const EquilibriumPoint& plus() const { return at(Root::Plus); }
};

Equilibria equilibria(double s, double mu);

/// Hyperbolicity data for a single rest state phi of speed s.
EquilibriumPoint classify_equilibrium(double phi, double s);

struct SubspaceBasis {
  Root at = Root::Minus;
  double phi = 0.0;
  std::vector<Eigen::Vector3d> unstable;  // E^u, orthonormal
  std::vector<Eigen::Vector3d> stable;    // E^s, orthonormal
  /// Orthonormal basis of (E^u)^perp and (E^s)^perp: Gram-Schmidt of
  /// (E^u, E^s) and (E^s, E^u) respectively. These are the rows of the
  /// projective boundary conditions.
  std::vector<Eigen::Vector3d> unstable_complement;
  std::vector<Eigen::Vector3d> stable_complement;
  bool orthonormal = false;
};

SubspaceBasis subspaces(const Equilibria& eq, Root root);
SubspaceBasis subspaces_at(double phi, double s);

/// Critical weighted decay rate of phi' toward a rest state: lambda1 / 2.
double decay_rate_aplus(const EquilibriumPoint& point);

enum class WaveKind { Front, Back };

std::string to_string(WaveKind kind);
WaveKind wave_kind_from_string(const std::string& text);

struct ProfileSample {
  double phi = 0.0;
  double dphi = 0.0;
  double ddphi = 0.0;
};

/// A computed front (phi_minus -> phi_plus, ascending) or back (descending)
/// on a uniform grid over [-L, L]. phi_minus/phi_plus are the limits at
/// z -> -inf and z -> +inf respectively.
struct Profile {
  WaveKind kind = WaveKind::Front;
  double mu = 0.0;
  double s = 0.0;
  double L = 0.0;
  int N = 0;  // mesh intervals per half-line
  Eigen::VectorXd z;
  Eigen::VectorXd phi;
  Eigen::VectorXd dphi;
  Eigen::VectorXd ddphi;
  double phi_minus = 0.0;
  double phi_plus = 0.0;
  double a_plus = 0.0;
  double phase_anchor = 0.5;
  double residual = 0.0;  // collocation residual max-norm

  double step() const { return z.size() > 1 ? z[1] - z[0] : 0.0; }
  Eigen::Index size() const { return z.size(); }

  /// Quintic Hermite interpolation from (phi, phi', phi''); constant end
  /// states outside [-L, L].
  ProfileSample sample(double zq) const;

};

/// Max-norm of the Hermite-Simpson (Lobatto IIIA) defect of the stored
/// samples against the traveling-wave ODE with the profile's (s, mu).
double collocation_defect(const Profile& p);

/// (phi, s, mu) -> (-phi, s, -mu): a front of mu becomes a back of -mu.
Profile back_from_front(const Profile& p);

// ---------------------------------------------------------------- shooting

struct ShootingOptions {
  double log10_eps_lo = -16.0;
  double log10_eps_hi = -1.0;
  int scan_points = 61;
  double mismatch_threshold = 1e-2;
  Rk45Options ode{Tolerances{1e-11, 1e-11, 100}};
};

struct ShootingResult {
  WaveKind kind = WaveKind::Front;
  double s = 0.0;
  double mu = 0.0;
  double epsilon = 0.0;
  double mismatch = 0.0;
  double z_left = 0.0;
  double z_right = 0.0;
  Trajectory<Eigen::Vector3d> trajectory;
  bool success = false;
};

/// Trajectory from origin + eps * e^u over [-L_left, L_right]; origin is
/// phi_minus for fronts and phi_plus for backs.
Trajectory<Eigen::Vector3d> shoot_trajectory(WaveKind kind, double s, double mu,
                                             double eps, double L_left,
                                             double L_right,
                                             const Rk45Options& ode = {});

/// Distance of the terminal state from the target rest state.
double shooting_mismatch(WaveKind kind, double s, double mu, double eps,
                         double L_left, double L_right,
                         const Rk45Options& ode = {});

/// Optimizes eps (on a log scale) to land on the target rest state.
ShootingResult shoot_front(double s, double mu, double L_left, double L_right,
                           const ShootingOptions& options = {});
ShootingResult shoot(WaveKind kind, double s, double mu, double L_left,
                     double L_right, const ShootingOptions& options = {});

// -------------------------------------------------------------- collocation

struct CollocationOptions {
  double L = 40.0;
  int N = 800;  // mesh intervals on [0, L]
  std::optional<double> phase_anchor;  // default +1/2 fronts, -1/2 backs
  double tail_tol = 1e-8;  // |phi(+-L) - phi_+-| acceptance
  NewtonOptions newton{Tolerances{1e-10, 1e-13, 40}, true, 1.0 / 256.0};
};

struct CollocationDiagnostics {
  int newton_iterations = 0;
  std::vector<double> residual_history;
  double tail_mismatch = 0.0;
};

/// Seed as a function of z returning (phi, phi', phi'').
using SeedFunction = std::function<Eigen::Vector3d(double)>;

/// Heteroclinic BVP on the doubled system over [0, L]: y(zeta) = Y(zeta),
/// y~(zeta) = Y(-zeta), with y(0) = y~(0), phi(0) = anchor, and projective
/// conditions at zeta = L. The speed s is an unknown of the Newton solve.
Profile collocate(WaveKind kind, double mu, double s_guess, const SeedFunction& seed,
                  const CollocationOptions& options = {},
                  CollocationDiagnostics* diagnostics = nullptr);

/// Seeds collocation with a shooting trajectory: shifted so the anchor
/// crossing sits at z = 0, padded by its end values.
Profile collocate_front(const ShootingResult& seed, double mu,
                        const CollocationOptions& options = {},
                        CollocationDiagnostics* diagnostics = nullptr);
Profile collocate_front(const Profile& seed, double mu,
                        const CollocationOptions& options = {},
                        CollocationDiagnostics* diagnostics = nullptr);

SeedFunction seed_from_trajectory(const Trajectory<Eigen::Vector3d>& t,
                                  double anchor);
SeedFunction seed_from_profile(const Profile& p);

/// Front at mu=0 (or any mu) by shooting from s_guess over [-7, 10] and
/// collocating.
Profile compute_front(double mu, double s_guess,
                      const CollocationOptions& options = {});

// ------------------------------------------------------------- continuation

struct ContinuationOptions {
  CollocationOptions collocation;
  double max_step = 0.1;
  double min_step = 1e-4;
};

struct ContinuationResult {
  std::vector<Profile> profiles;  // converged at requested grid points, sorted by mu
  std::vector<Profile> path;      // every converged step, in order of computation
  bool terminated = false;
  double last_mu = 0.0;           // last converged mu in the failing direction
  std::string diagnostics;
};

/// Natural-parameter continuation from the seed toward each grid value,
/// with secant prediction of s and step bisection on failure.
ContinuationResult continue_in_mu(std::span<const double> mu_grid,
                                  const Profile& seed,
                                  const ContinuationOptions& options = {});

}  // namespace mkslab
