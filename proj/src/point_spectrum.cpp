#include "mkslab/point_spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "mkslab/essential.hpp"
#include "mkslab/minimize.hpp"
#include "mkslab/ode.hpp"
#include "mkslab/parallel.hpp"
#include "mkslab/polynomial.hpp"

namespace mkslab {

// ------------------------------------------------------------ energy bounds

EnergyBound energy_bounds(const Profile& p, double a, double eta) {
  if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "energy_bounds: need a > 0");
  if (p.size() < 2) fail(ErrorCode::InvalidArgument, "energy_bounds: empty profile");
  EnergyBound b;
  b.a = a;
  b.eta = eta;
  b.alpha0 = a * a + a * a * a * a;
  b.alpha1 = 2.0 * a + 4.0 * a * a * a;
  b.alpha2 = 6.0 * a * a + 1.0;
  b.alpha3 = 4.0 * a;
  const double s = p.s;

  double sup_dp2 = 0, sup_A = 0, sup_B = 0, sup_C = 0;
  double gamma_sup = -std::numeric_limits<double>::infinity(), beta = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double f = p.phi[i], df = p.dphi[i];
    const double p2 = f * f, dp2 = 2.0 * f * df;
    sup_dp2 = std::max(sup_dp2, std::abs(dp2));
    sup_A = std::max(sup_A, std::abs(b.alpha1 + p2 + s));
    sup_B = std::max(sup_B, std::abs(dp2 - b.alpha0 - 2.0 * a * p2 - a * s));
    sup_C = std::max(sup_C, std::abs(dp2 - a * s + 0.5 * b.alpha2));
    gamma_sup = std::max(gamma_sup, 3.0 * f * df - 3.0 * a * p2);
    beta = std::max(beta, std::abs(b.alpha1 + s + 3.0 * p2));
  }

  b.bound_re = 0.5 * sup_dp2 + 0.25 * b.alpha2 * b.alpha2 - b.alpha0 - a * s;
  const double den = 4.0 - 6.0 * b.alpha3;
  b.second_applicable = den > 0.0;
  b.bound_re_plus_abs_im = b.second_applicable
                               ? sup_A * sup_A / den + sup_B + 0.5 * (1.0 - b.alpha3) + 0.5 * sup_C
                               : std::numeric_limits<double>::quiet_NaN();

  const double gamma = gamma_sup - b.alpha0 - a * s;
  b.re_bound = 0.25 * b.alpha2 * b.alpha2 + gamma;
  const double disc = b.alpha2 * b.alpha2 + 4.0 * (gamma + eta);
  if (disc < 0.0) {
    // No eigenvalue can reach Re lambda >= -eta.
    b.re_plus_abs_im_bound = -eta;
    b.R = 0.0;
    return b;
  }
  const double p_max = 0.5 * (b.alpha2 + std::sqrt(disc));
  auto f = [&](double P) {
    return -P * P + b.alpha2 * P + gamma + b.alpha3 * std::pow(P, 1.5) + beta * std::sqrt(P);
  };
  // Coarse scan then Brent on the best bracket.
  const int n = 400;
  int best = 0;
  double fbest = f(0.0);
  for (int k = 1; k <= n; ++k) {
    const double v = f(p_max * k / n);
    if (v > fbest) {
      fbest = v;
      best = k;
    }
  }
  const ScalarMinimum m = minimize_scalar(
      [&](double P) { return -f(P); }, p_max * std::max(0, best - 1) / n,
      p_max * std::min(n, best + 1) / n, 1e-12);
  b.re_plus_abs_im_bound = std::max(fbest, -m.fx);

  const double S = b.re_plus_abs_im_bound, B1 = b.re_bound;
  b.R = S >= B1 ? std::max(S + eta, std::hypot(B1 + eta, S - B1)) : S + eta;
  return b;
}

// ------------------------------------------------------------ first-order system

namespace {

Matrix4cd companion_row(double c0, double c1, double a, cdouble lambda) {
  Matrix4cd A = Matrix4cd::Zero();
  A(0, 1) = A(1, 2) = A(2, 3) = 1.0;
  A(3, 0) = c0 - lambda;
  A(3, 1) = c1;
  A(3, 2) = -(6.0 * a * a + 1.0);
  A(3, 3) = 4.0 * a;
  return A;
}

}  // namespace

Matrix4cd system_matrix(const Profile& p, double a, cdouble lambda, double z) {
  const ProfileSample q = p.sample(z);
  const double f2 = q.phi * q.phi;
  const double c0 = 6.0 * q.phi * q.dphi - a * a - a * a * a * a - 3.0 * a * f2 - a * p.s;
  const double c1 = 2.0 * a + 4.0 * a * a * a + 3.0 * f2 + p.s;
  return companion_row(c0, c1, a, lambda);
}

Matrix4cd asymptotic_matrix(double phi_end, double s, double a, cdouble lambda) {
  const double f2 = phi_end * phi_end;
  return companion_row(-a * a - a * a * a * a - 3.0 * a * f2 - a * s,
                       2.0 * a + 4.0 * a * a * a + 3.0 * f2 + s, a, lambda);
}

SpatialEigs asymptotic_spatial_eigs(double phi_sq, double s, double a, cdouble lambda) {
  // nu = mu - a solves nu^4 + nu^2 - c nu + lambda = 0.
  const double c = s + 3.0 * phi_sq;
  const std::array<cdouble, 5> coeffs{1.0, 0.0, 1.0, -c, lambda};
  const std::vector<cdouble> nu = companion_roots(coeffs);
  SpatialEigs out;
  double scale = 1.0;
  for (const cdouble& v : nu) scale = std::max(scale, std::abs(v + a));
  for (const cdouble& v : nu) {
    const cdouble m = v + a;
    if (std::abs(m.real()) <= 1e-12 * scale) {
      fail(ErrorCode::SplittingFailure,
           "asymptotic_spatial_eigs: spatial root on the imaginary axis (lambda in the "
           "weighted essential spectrum)");
    }
    Vector4cd vec(1.0, m, m * m, m * m * m);
    if (m.real() < 0.0) {
      out.stable.push_back(m);
      out.stable_vectors.push_back(vec);
    } else {
      out.unstable.push_back(m);
      out.unstable_vectors.push_back(vec);
    }
  }
  if (out.stable.size() != 2) {
    fail(ErrorCode::SplittingFailure,
         "asymptotic_spatial_eigs: splitting is " + std::to_string(out.stable.size()) + "/" +
             std::to_string(out.unstable.size()) + ", expected 2/2");
  }
  return out;
}

namespace {

constexpr std::array<std::array<int, 2>, 6> kPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

int pair_index(int i, int j) {
  for (int k = 0; k < 6; ++k) {
    if (kPairs[k][0] == i && kPairs[k][1] == j) return k;
  }
  return -1;
}

}  // namespace

Matrix6cd compound_matrix(const Matrix4cd& A) {
  Matrix6cd C = Matrix6cd::Zero();
  // d/dz (u ^ v) = Au ^ v + u ^ Av; on e_k ^ e_l the image is
  // sum_i A_ik e_i ^ e_l + sum_j A_jl e_k ^ e_j.
  for (int col = 0; col < 6; ++col) {
    const int k = kPairs[col][0], l = kPairs[col][1];
    for (int i = 0; i < 4; ++i) {
      if (i != l) {
        const int r = i < l ? pair_index(i, l) : pair_index(l, i);
        C(r, col) += (i < l ? 1.0 : -1.0) * A(i, k);
      }
      if (i != k) {
        const int r = k < i ? pair_index(k, i) : pair_index(i, k);
        C(r, col) += (k < i ? 1.0 : -1.0) * A(i, l);
      }
    }
  }
  return C;
}

Vector6cd wedge(const Vector4cd& u, const Vector4cd& v) {
  Vector6cd w;
  for (int k = 0; k < 6; ++k) {
    const int i = kPairs[k][0], j = kPairs[k][1];
    w[k] = u[i] * v[j] - u[j] * v[i];
  }
  return w;
}

cdouble wedge_pairing(const Vector6cd& u, const Vector6cd& w) {
  return u[0] * w[5] - u[1] * w[4] + u[2] * w[3] + u[3] * w[2] - u[4] * w[1] + u[5] * w[0];
}

cdouble plucker_defect(const Vector6cd& u) { return u[0] * u[5] - u[1] * u[4] + u[2] * u[3]; }

// ------------------------------------------------------------ Evans function

namespace {

// Wedge of the Vandermonde vectors of mu1, mu2 divided by (mu2 - mu1):
// symmetric in the pair, hence analytic in lambda.
Vector6cd analytic_wedge(cdouble m1, cdouble m2) {
  const cdouble e1 = m1 + m2, e2 = m1 * m2;
  Vector6cd w;
  w << 1.0, e1, e1 * e1 - e2, e2, e2 * e1, e2 * e2;
  return w;
}

Vector6cd propagate(const Profile& p, double a, cdouble lambda, cdouble sigma,
                    const Vector6cd& start, double z0, double z1, const EvansOptions& opt) {
  auto field = [&](double z, const Vector6cd& y) -> Vector6cd {
    Matrix6cd C = compound_matrix(system_matrix(p, a, lambda, z));
    C.diagonal().array() -= sigma;
    return C * y;
  };
  Rk45Options ro;
  ro.tol = opt.tol;
  ro.store_nodes = false;
  ro.max_steps = 1000000;
  const auto t = integrate_rk45(field, start, z0, z1, ro);
  if (t.status != IntegrationStatus::Ok) {
    fail(ErrorCode::IntegrationFailure, "evans: wedge integration failed");
  }
  return terminal_value(t, z0, z1);
}

}  // namespace

EvansSample evans_sample(const Profile& p, double a, cdouble lambda, const EvansOptions& options) {
  const double L = options.L > 0.0 ? options.L : p.L;
  const SpatialEigs left =
      asymptotic_spatial_eigs(p.phi_minus * p.phi_minus, p.s, a, lambda);
  const SpatialEigs right = asymptotic_spatial_eigs(p.phi_plus * p.phi_plus, p.s, a, lambda);
  const cdouble sigma_l = left.unstable[0] + left.unstable[1];
  const cdouble sigma_r = right.stable[0] + right.stable[1];
  const Vector6cd u = propagate(p, a, lambda, sigma_l,
                                analytic_wedge(left.unstable[0], left.unstable[1]), -L,
                                options.match_point, options);
  const Vector6cd w = propagate(p, a, lambda, sigma_r,
                                analytic_wedge(right.stable[0], right.stable[1]), L,
                                options.match_point, options);
  EvansSample out;
  out.value = wedge_pairing(u, w);
  out.plucker = std::max(std::abs(plucker_defect(u)) / u.squaredNorm(),
                         std::abs(plucker_defect(w)) / w.squaredNorm());
  return out;
}

cdouble evans_eval(const Profile& p, double a, cdouble lambda, const EvansOptions& options) {
  return evans_sample(p, a, lambda, options).value;
}

// ------------------------------------------------------------ contours

ContourSpec ContourSpec::circle(cdouble center, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "contour: radius must be positive");
  ContourSpec c;
  c.shape = Shape::Circle;
  c.center = center;
  c.radius = radius;
  return c;
}

ContourSpec ContourSpec::half_disk(double eta, double R) {
  if (!(R > 0.0) || !(eta >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "contour: need R > 0 and eta >= 0");
  }
  ContourSpec c;
  c.shape = Shape::HalfDisk;
  c.center = {-eta, 0.0};
  c.radius = R;
  c.eta = eta;
  return c;
}

cdouble ContourSpec::at(double t) const {
  using std::numbers::pi;
  if (shape == Shape::Circle) return center + std::polar(radius, 2.0 * pi * t);
  // Arc from -pi/2 to pi/2, then the segment on Re = -eta downward.
  const double arc = pi * radius, seg = 2.0 * radius;
  const double d = t * (arc + seg);
  if (d <= arc) return center + std::polar(radius, -0.5 * pi + d / radius);
  const double y = radius - (d - arc);
  return center + cdouble(0.0, y);
}

double essential_max_re(const Profile& p, double a) {
  const auto k = default_k_grid();
  return fredholm_borders(p, a, k).max_re;
}

EvansResult winding_number(const Profile& p, double a, const ContourSpec& contour,
                           const WindingOptions& options) {
  using std::numbers::pi;
  if (options.initial_points < 4) {
    fail(ErrorCode::InvalidArgument, "winding_number: need at least 4 initial points");
  }
  struct Node {
    double t;
    cdouble lambda;
    cdouble value;
  };
  auto evaluate = [&](std::vector<Node>& nodes) {
    parallel_for(nodes.size(), [&](std::size_t i) {
      nodes[i].lambda = contour.at(nodes[i].t);
      nodes[i].value = evans_eval(p, a, nodes[i].lambda, options.evans);
    });
  };

  std::vector<Node> nodes(static_cast<std::size_t>(options.initial_points));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].t = static_cast<double>(i) / options.initial_points;
  }
  evaluate(nodes);

  auto increment = [](const cdouble& from, const cdouble& to) { return std::arg(to / from); };
  int depth = 0;
  for (; depth < options.max_depth; ++depth) {
    std::vector<Node> fresh;
    const std::size_t n = nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Node& x = nodes[i];
      const Node& y = nodes[(i + 1) % n];
      if (std::abs(increment(x.value, y.value)) >= options.max_increment) {
        const double t1 = i + 1 == n ? 1.0 : y.t;
        fresh.push_back({0.5 * (x.t + t1), {}, {}});
      }
    }
    if (fresh.empty()) break;
    if (nodes.size() + fresh.size() > static_cast<std::size_t>(options.max_points)) {
      fail(ErrorCode::ContourDegenerate,
           "winding_number: refinement budget exhausted; a zero may lie on the contour");
    }
    evaluate(fresh);
    nodes.insert(nodes.end(), fresh.begin(), fresh.end());
    std::sort(nodes.begin(), nodes.end(), [](const Node& l, const Node& r) { return l.t < r.t; });
  }
  if (depth == options.max_depth) {
    fail(ErrorCode::ContourDegenerate,
         "winding_number: argument increments did not resolve; perturb eta or the radius");
  }

  double vmax = 0.0;
  for (const Node& x : nodes) vmax = std::max(vmax, std::abs(x.value));
  EvansResult out;
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& x = nodes[i];
    if (!(std::abs(x.value) > options.floor) || std::abs(x.value) < 1e-13 * vmax) {
      fail(ErrorCode::ContourDegenerate,
           "winding_number: Evans function vanishes on the contour; perturb eta or the radius");
    }
    out.params.push_back(x.t);
    out.contour.push_back(x.lambda);
    out.values.push_back(x.value);
    total += increment(x.value, nodes[(i + 1) % nodes.size()].value);
  }
  const cdouble closing = evans_eval(p, a, contour.at(1.0), options.evans);
  out.closure_defect = std::abs(closing - nodes.front().value) / std::abs(nodes.front().value);
  out.winding_real = total / (2.0 * pi);
  out.winding = static_cast<int>(std::lround(out.winding_real));
  out.refinement_depth = depth;
  return out;
}

ObservationReport verify_numerical_observation(const Profile& p, double a,
                                               const ObservationOptions& options) {
  if (!(a > 0.0) || !weight_admissible(p.s, p.phi_minus * p.phi_minus, a) ||
      !weight_admissible(p.s, p.phi_plus * p.phi_plus, a)) {
    fail(ErrorCode::WeightInadmissible,
         "verify_numerical_observation: weight a is outside the admissible window");
  }
  ObservationReport r;
  r.mu = p.mu;
  r.s = p.s;
  r.a = a;
  r.eta = options.eta;
  r.R = options.R > 0.0 ? options.R : energy_bounds(p, a, options.eta).R;
  const double leftmost =
      std::min(-options.eta, options.origin_center.real() - options.origin_radius);
  if (essential_max_re(p, a) >= leftmost) {
    fail(ErrorCode::ContourDegenerate,
         "verify_numerical_observation: contour intersects the weighted essential spectrum");
  }
  r.total = winding_number(p, a, ContourSpec::half_disk(options.eta, r.R), options.winding);
  r.origin = winding_number(p, a, ContourSpec::circle(options.origin_center, options.origin_radius),
                            options.winding);
  r.winding_total = r.total.winding;
  r.winding_origin = r.origin.winding;
  r.pass = r.winding_total == 1 && r.winding_origin == 1;
  return r;
}

}  // namespace mkslab
