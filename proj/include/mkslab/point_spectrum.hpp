#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mkslab/profile.hpp"

namespace mkslab {

using Matrix4cd = Eigen::Matrix<cdouble, 4, 4>;
using Vector4cd = Eigen::Matrix<cdouble, 4, 1>;
using Matrix6cd = Eigen::Matrix<cdouble, 6, 6>;
using Vector6cd = Eigen::Matrix<cdouble, 6, 1>;

// ------------------------------------------------------------ energy bounds

struct EnergyBound {
  double a = 0.0;
  double alpha0 = 0.0;  // a^2 + a^4
  double alpha1 = 0.0;  // 2a + 4a^3
  double alpha2 = 0.0;  // 6a^2 + 1
  double alpha3 = 0.0;  // 4a

  /// The two classical estimates in their original form (phi^2 coefficients of the
  /// reduced eigenvalue equation). bound_re_plus_abs_im is NaN when
  /// 4 - 6 alpha3 <= 0, with `second_applicable` false.
  double bound_re = 0.0;
  double bound_re_plus_abs_im = 0.0;
  bool second_applicable = false;

  /// Estimates re-derived for the weighted linearization itself
  /// (coefficients 3 phi^2, 6 phi phi'), valid for every a > 0:
  ///   Re lambda <= alpha2^2/4 + gamma,
  ///   Re lambda + |Im lambda| <= max_{0 <= P <= P_max}
  ///       (-P^2 + alpha2 P + gamma + alpha3 P^{3/2} + beta P^{1/2}),
  /// gamma = sup(3 phi phi' - 3a phi^2) - alpha0 - a s, beta = ||alpha1 + s + 3 phi^2||,
  /// P = ||w''|| / ||w|| and P_max from Re lambda >= -eta.
  double re_bound = 0.0;
  double re_plus_abs_im_bound = 0.0;

  /// Radius of the half-disk centred at -eta that contains every eigenvalue
  /// with Re lambda >= -eta allowed by the re-derived estimates.
  double R = 0.0;
  double eta = 0.01;
};

EnergyBound energy_bounds(const Profile& p, double a, double eta = 0.01);

// ------------------------------------------------------------ first-order system

/// Companion matrix of the weighted eigenvalue ODE for Y = (w, w', w'', w''').
Matrix4cd system_matrix(const Profile& p, double a, cdouble lambda, double z);

/// Limit of system_matrix at an end state phi_end.
Matrix4cd asymptotic_matrix(double phi_end, double s, double a, cdouble lambda);

struct SpatialEigs {
  std::vector<cdouble> stable;    // Re mu < 0, two entries
  std::vector<cdouble> unstable;  // Re mu > 0, two entries
  std::vector<Vector4cd> stable_vectors;    // (1, mu, mu^2, mu^3)
  std::vector<Vector4cd> unstable_vectors;
};

/// Roots of the symbol p(mu - a) = lambda at an end state, split 2/2.
SpatialEigs asymptotic_spatial_eigs(double phi_sq, double s, double a, cdouble lambda);

/// Exterior square of a 4x4 matrix on the basis e12, e13, e14, e23, e24, e34.
Matrix6cd compound_matrix(const Matrix4cd& A);

/// Wedge u ^ v in the same basis.
Vector6cd wedge(const Vector4cd& u, const Vector4cd& v);

/// u ^ w for two 2-vectors, i.e. det[u1 u2 w1 w2].
cdouble wedge_pairing(const Vector6cd& u, const Vector6cd& w);

/// Decomposability defect p12 p34 - p13 p24 + p14 p23.
cdouble plucker_defect(const Vector6cd& u);

// ------------------------------------------------------------ Evans function

struct EvansOptions {
  Tolerances tol{1e-10, 1e-10, 100};
  double match_point = 0.0;
  /// Integration half-length; 0 uses the profile's L.
  double L = 0.0;
};

struct EvansSample {
  cdouble value;
  double plucker = 0.0;  // worst relative decomposability defect seen at the match point
};

/// D_a(lambda): unstable 2-vector from z = -L (trace removed, initialized
/// by the wedge of the unstable eigenvectors divided by mu2 - mu1) paired
/// with the stable 2-vector from z = +L.
EvansSample evans_sample(const Profile& p, double a, cdouble lambda,
                         const EvansOptions& options = {});
cdouble evans_eval(const Profile& p, double a, cdouble lambda,
                   const EvansOptions& options = {});

// ------------------------------------------------------------ contours

struct ContourSpec {
  enum class Shape { Circle, HalfDisk };
  Shape shape = Shape::Circle;
  cdouble center{0.0, 0.0};  // circle centre; half-disk uses (-eta, 0)
  double radius = 0.01;
  double eta = 0.01;

  static ContourSpec circle(cdouble center, double radius);
  /// Boundary of {Re lambda >= -eta, |lambda + eta| <= R}.
  static ContourSpec half_disk(double eta, double R);

  /// Positively oriented point at parameter t in [0, 1).
  cdouble at(double t) const;
};

struct WindingOptions {
  int initial_points = 64;
  double max_increment = 0.5;  // radians, between consecutive samples
  int max_depth = 14;
  int max_points = 20000;
  double floor = 1e-300;
  EvansOptions evans;
};

struct EvansResult {
  std::vector<double> params;
  std::vector<cdouble> contour;
  std::vector<cdouble> values;
  int winding = 0;
  double winding_real = 0.0;  // total argument change / 2 pi
  int refinement_depth = 0;
  double closure_defect = 0.0;  // |D(end) - D(start)| / |D(start)|
};

EvansResult winding_number(const Profile& p, double a, const ContourSpec& contour,
                           const WindingOptions& options = {});

/// Weighted essential-spectrum check that the contour lies to its right.
double essential_max_re(const Profile& p, double a);

struct ObservationReport {
  double mu = 0.0;
  double s = 0.0;
  double a = 0.0;
  double eta = 0.01;
  double R = 0.0;
  int winding_total = 0;
  int winding_origin = 0;
  bool pass = false;
  EvansResult total;
  EvansResult origin;
};

struct ObservationOptions {
  double eta = 0.01;
  double R = 0.0;  // 0: from energy_bounds
  cdouble origin_center{-0.005, 0.0};
  double origin_radius = 0.01;
  WindingOptions winding;
};

ObservationReport verify_numerical_observation(const Profile& p, double a,
                                               const ObservationOptions& options = {});

}  // namespace mkslab
