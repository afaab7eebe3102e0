#include <cmath>
#include <limits>
#include <numbers>

#include "mkslab/essential.hpp"
#include "mkslab/evolution.hpp"
#include "mkslab/point_spectrum.hpp"

namespace mkslab {

namespace {

// Fourier differentiation matrices on n equispaced nodes of a period P.
void fourier_matrices(int n, double P, Eigen::MatrixXd& D1, Eigen::MatrixXd& D2) {
  using std::numbers::pi;
  const double hs = 2.0 * pi / n;
  const double k = 2.0 * pi / P;
  D1 = Eigen::MatrixXd::Zero(n, n);
  D2 = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      if (j == l) {
        D2(j, l) = -pi * pi / (3.0 * hs * hs) - 1.0 / 6.0;
        continue;
      }
      const double sign = ((j - l) % 2 == 0) ? 1.0 : -1.0;
      const double x = (j - l) * hs / 2.0;
      D1(j, l) = 0.5 * sign / std::tan(x);
      D2(j, l) = -0.5 * sign / (std::sin(x) * std::sin(x));
    }
  }
  D1 *= k;
  D2 *= k * k;
}

}  // namespace

Eigen::VectorXd weighted_derivative(const Profile& p, double a, const Eigen::VectorXd& z) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) out[j] = std::exp(a * z[j]) * p.sample(z[j]).dphi;
  return out;
}

WeightedOperator weighted_operator(const Profile& p, double a, int n, double L) {
  if (n < 16 || n % 2 != 0) {
    fail(ErrorCode::InvalidArgument, "weighted_operator: need an even n >= 16");
  }
  if (std::abs(p.phi_minus * p.phi_minus - p.phi_plus * p.phi_plus) > 1e-10) {
    fail(ErrorCode::InvalidArgument,
         "weighted_operator: periodic box needs equal coefficients at both ends (mu = 0)");
  }
  WeightedOperator W;
  const double P = 2.0 * L;
  W.h = P / n;
  W.z = Eigen::VectorXd::LinSpaced(n, -L, -L + (n - 1) * W.h);
  fourier_matrices(n, P, W.D1, W.D2);
  const Eigen::MatrixXd D3 = W.D1 * W.D2;
  const Eigen::MatrixXd D4 = W.D2 * W.D2;
  const double a2 = a * a;
  const double alpha0 = a2 + a2 * a2, alpha1 = 2.0 * a + 4.0 * a2 * a, alpha2 = 6.0 * a2 + 1.0;
  Eigen::VectorXd b(n), c(n);
  for (int j = 0; j < n; ++j) {
    const ProfileSample q = p.sample(W.z[j]);
    const double f2 = q.phi * q.phi;
    b[j] = alpha1 + p.s + 3.0 * f2;
    c[j] = 6.0 * q.phi * q.dphi - alpha0 - a * p.s - 3.0 * a * f2;
  }
  W.L = -D4 + 4.0 * a * D3 - alpha2 * W.D2 + b.asDiagonal() * W.D1;
  W.L.diagonal() += c;

  // Inverse iteration toward the eigenvalue nearest zero, seeded by e^{az} phi'.
  const Eigen::VectorXd psi = weighted_derivative(p, a, W.z);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(W.L);
  Eigen::VectorXd x = psi.normalized();
  for (int it = 0; it < 6; ++it) x = lu.solve(x).normalized();
  W.kernel_eigenvalue = x.dot(W.L * x);
  W.kernel = x * (x.dot(psi) / x.squaredNorm());
  return W;
}

LinearDecayReport linear_weighted_evolve(const Profile& p, double a, const Eigen::VectorXd& w0,
                                         const LinearDecayOptions& o) {
  if (!(a > 0.0) || !weight_admissible(p.s, p.phi_minus * p.phi_minus, a) ||
      !weight_admissible(p.s, p.phi_plus * p.phi_plus, a)) {
    fail(ErrorCode::WeightInadmissible, "linear_weighted_evolve: weight a is not admissible");
  }
  if (!(o.dt > 0.0) || !(o.T > 0.0)) {
    fail(ErrorCode::InvalidArgument, "linear_weighted_evolve: need dt > 0 and T > 0");
  }
  const double L = o.L > 0.0 ? o.L : p.L;
  const WeightedOperator W = weighted_operator(p, a, o.n, L);
  if (w0.size() != W.z.size()) {
    fail(ErrorCode::InvalidArgument, "linear_weighted_evolve: w0 has the wrong length");
  }
  const Eigen::Index n = W.z.size();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd step =
      (I - 0.5 * o.dt * W.L).partialPivLu().solve(I + 0.5 * o.dt * W.L);

  const auto steps = static_cast<int>(std::llround(o.T / o.dt));
  const int every = std::max(1, static_cast<int>(std::llround(o.record_every / o.dt)));
  // Rannacher start: the first step as implicit-Euler half steps, which damps
  // the stiff Fourier modes that CN alone only flips in sign.
  const Eigen::MatrixXd euler =
      o.startup_half_steps > 0 ? Eigen::MatrixXd((I - 0.25 * o.dt * W.L).partialPivLu().inverse())
                               : Eigen::MatrixXd();
  std::vector<std::pair<double, Eigen::VectorXd>> states;
  Eigen::VectorXd w = w0;
  states.emplace_back(0.0, w);
  for (int k = 1; k <= steps; ++k) {
    if (k <= o.startup_half_steps / 2) {
      w = euler * (euler * w);
    } else {
      w = step * w;
    }
    if (k % every == 0 || k == steps) states.emplace_back(k * o.dt, w);
  }

  LinearDecayReport rep;
  rep.a = a;
  rep.kernel_eigenvalue = W.kernel_eigenvalue;
  rep.gamma_inf = w.dot(W.kernel) / W.kernel.squaredNorm();
  for (const auto& [t, v] : states) {
    const Eigen::VectorXd r = v - rep.gamma_inf * W.kernel;
    const double h2 = r.squaredNorm() + (W.D1 * r).squaredNorm() + (W.D2 * r).squaredNorm();
    rep.residual_history.emplace_back(t, std::sqrt(W.h * h2));
  }

  // Log-linear fit over the second half, above the round-off floor.
  const double floor = 1e-11 * std::max(1e-300, rep.residual_history.front().second);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& [t, r] : rep.residual_history) {
    if (t < 0.5 * o.T || !(r > floor)) continue;
    const double y = std::log(r);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++m;
  }
  rep.fitted_rate = m >= 5 ? -(m * sxy - sx * sy) / (m * sxx - sx * sx)
                           : std::numeric_limits<double>::quiet_NaN();
  rep.omega_est = -essential_max_re(p, a);
  rep.pass = rep.fitted_rate > 0.0 && rep.fitted_rate >= 0.8 * rep.omega_est;
  return rep;
}

LinearDecayReport linear_weighted_evolve(const Profile& p, double a,
                                         const std::function<double(double)>& w0,
                                         const LinearDecayOptions& o) {
  const double L = o.L > 0.0 ? o.L : p.L;
  const double h = 2.0 * L / o.n;
  Eigen::VectorXd v(o.n);
  for (int j = 0; j < o.n; ++j) v[j] = w0(-L + j * h);
  return linear_weighted_evolve(p, a, v, o);
}

}  // namespace mkslab
