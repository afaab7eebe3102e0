#include "mkslab/profile.hpp"

#include <algorithm>
#include <cmath>

#include "mkslab/minimize.hpp"

namespace mkslab {

ProfileSample Profile::sample(double zq) const {
  const Eigen::Index n = z.size();
  if (zq <= z[0]) {
    if (zq < z[0]) return {phi_minus, 0.0, 0.0};
    return {phi[0], dphi[0], ddphi[0]};
  }
  if (zq >= z[n - 1]) {
    if (zq > z[n - 1]) return {phi_plus, 0.0, 0.0};
    return {phi[n - 1], dphi[n - 1], ddphi[n - 1]};
  }
  const double h = step();
  auto i = static_cast<Eigen::Index>(std::floor((zq - z[0]) / h));
  i = std::clamp<Eigen::Index>(i, 0, n - 2);
  const double t = (zq - z[i]) / h;

  const double c0 = phi[i];
  const double c1 = h * dphi[i];
  const double c2 = 0.5 * h * h * ddphi[i];
  const double A = phi[i + 1] - (c0 + c1 + c2);
  const double B = h * dphi[i + 1] - (c1 + 2.0 * c2);
  const double C = h * h * ddphi[i + 1] - 2.0 * c2;
  const double c3 = 10.0 * A - 4.0 * B + 0.5 * C;
  const double c4 = -15.0 * A + 7.0 * B - C;
  const double c5 = 6.0 * A - 3.0 * B + 0.5 * C;

  const double p = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
  const double dp = c1 + t * (2 * c2 + t * (3 * c3 + t * (4 * c4 + t * 5 * c5)));
  const double ddp = 2 * c2 + t * (6 * c3 + t * (12 * c4 + t * 20 * c5));
  return {p, dp / h, ddp / (h * h)};
}

double collocation_defect(const Profile& p) {
  const ProfileField F{p.s, p.mu};
  const double h = p.step();
  double worst = 0.0;
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    const Eigen::Vector3d y0{p.phi[i], p.dphi[i], p.ddphi[i]};
    const Eigen::Vector3d y1{p.phi[i + 1], p.dphi[i + 1], p.ddphi[i + 1]};
    const Eigen::Vector3d f0 = F(y0), f1 = F(y1);
    const Eigen::Vector3d ym = 0.5 * (y0 + y1) + h / 8.0 * (f0 - f1);
    const Eigen::Vector3d r = y1 - y0 - h / 6.0 * (f0 + 4.0 * F(ym) + f1);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

Profile back_from_front(const Profile& p) {
  Profile b = p;
  b.kind = p.kind == WaveKind::Front ? WaveKind::Back : WaveKind::Front;
  b.mu = -p.mu;
  b.phi = -p.phi;
  b.dphi = -p.dphi;
  b.ddphi = -p.ddphi;
  b.phi_minus = -p.phi_minus;
  b.phi_plus = -p.phi_plus;
  b.phase_anchor = -p.phase_anchor;
  return b;
}

// ---------------------------------------------------------------- shooting

namespace {

struct ShootingSetup {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;
  Eigen::Vector3d target;
  double escape = 0.0;
};

ShootingSetup shooting_setup(WaveKind kind, double s, double mu) {
  const Equilibria eq = equilibria(s, mu);
  const Root from = kind == WaveKind::Front ? Root::Minus : Root::Plus;
  const Root to = kind == WaveKind::Front ? Root::Plus : Root::Minus;
  const SubspaceBasis basis = subspaces(eq, from);
  if (basis.unstable.size() != 1) {
    fail(ErrorCode::DegenerateEquilibrium,
         "shoot: source rest state must have a one-dimensional unstable manifold");
  }
  ShootingSetup setup;
  setup.origin = {eq.at(from).phi, 0.0, 0.0};
  setup.target = {eq.at(to).phi, 0.0, 0.0};
  Eigen::Vector3d d = basis.unstable.front();
  const double toward = setup.target[0] - setup.origin[0];
  if (d[0] * toward < 0.0) d = -d;
  setup.direction = d;
  setup.escape = 10.0 * (1.0 + std::max(std::abs(setup.origin[0]), std::abs(setup.target[0])));
  return setup;
}

}  // namespace

Trajectory<Eigen::Vector3d> shoot_trajectory(WaveKind kind, double s, double mu,
                                             double eps, double L_left,
                                             double L_right, const Rk45Options& ode) {
  const ShootingSetup setup = shooting_setup(kind, s, mu);
  const ProfileField F{s, mu};
  Rk45Options opt = ode;
  opt.escape_norm = std::min(opt.escape_norm, setup.escape);
  const Eigen::Vector3d y0 = setup.origin + eps * setup.direction;
  return integrate_rk45([&](double, const Eigen::Vector3d& y) { return F(y); }, y0,
                        -L_left, L_right, opt);
}

double shooting_mismatch(WaveKind kind, double s, double mu, double eps,
                         double L_left, double L_right, const Rk45Options& ode) {
  const ShootingSetup setup = shooting_setup(kind, s, mu);
  Rk45Options opt = ode;
  opt.store_nodes = false;
  const auto t = shoot_trajectory(kind, s, mu, eps, L_left, L_right, opt);
  if (t.status != IntegrationStatus::Ok) return 1e3;
  return (t.back() - setup.target).norm();
}

ShootingResult shoot(WaveKind kind, double s, double mu, double L_left,
                     double L_right, const ShootingOptions& options) {
  if (!(L_left > 0.0) || !(L_right > 0.0)) {
    fail(ErrorCode::InvalidArgument, "shoot: interval lengths must be positive");
  }
  auto objective = [&](double log_eps) {
    return shooting_mismatch(kind, s, mu, std::pow(10.0, log_eps), L_left, L_right,
                             options.ode);
  };
  const int n = std::max(3, options.scan_points);
  const double lo = options.log10_eps_lo, hi = options.log10_eps_hi;
  const double dx = (hi - lo) / (n - 1);
  int best = 0;
  double best_val = objective(lo);
  for (int k = 1; k < n; ++k) {
    const double v = objective(lo + k * dx);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  const double a = lo + std::max(0, best - 1) * dx;
  const double b = lo + std::min(n - 1, best + 1) * dx;
  const ScalarMinimum m = minimize_scalar(objective, a, b, 1e-10);

  ShootingResult out;
  out.kind = kind;
  out.s = s;
  out.mu = mu;
  out.epsilon = std::pow(10.0, m.fx <= best_val ? m.x : lo + best * dx);
  out.mismatch = std::min(m.fx, best_val);
  out.z_left = -L_left;
  out.z_right = L_right;
  out.trajectory = shoot_trajectory(kind, s, mu, out.epsilon, L_left, L_right, options.ode);
  out.success = out.mismatch < options.mismatch_threshold;
  return out;
}

ShootingResult shoot_front(double s, double mu, double L_left, double L_right,
                           const ShootingOptions& options) {
  return shoot(WaveKind::Front, s, mu, L_left, L_right, options);
}

}  // namespace mkslab
