#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>

#include "mkslab/profile.hpp"

namespace mkslab {
namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Boundary data at zeta = L for a given speed: rest states and the rows of
// the projective conditions.
struct FarField {
  Eigen::Vector3d source;  // y~(L) -> source rest state, on its E^u
  Eigen::Vector3d target;  // y(L)  -> target rest state, on its E^s
  std::vector<Eigen::Vector3d> source_rows;  // (E^u)^perp at source
  std::vector<Eigen::Vector3d> target_rows;  // (E^s)^perp at target
};

FarField far_field(WaveKind kind, double s, double mu) {
  const Equilibria eq = equilibria(s, mu);
  const Root from = kind == WaveKind::Front ? Root::Minus : Root::Plus;
  const Root to = kind == WaveKind::Front ? Root::Plus : Root::Minus;
  const SubspaceBasis src = subspaces(eq, from);
  const SubspaceBasis dst = subspaces(eq, to);
  if (src.unstable.size() != 1 || dst.stable.size() != 2) {
    fail(ErrorCode::CollocationFailure,
         "collocate: rest states violate s + 3 phi^2 > 0 (wrong manifold dimensions)");
  }
  FarField ff;
  ff.source = {eq.at(from).phi, 0.0, 0.0};
  ff.target = {eq.at(to).phi, 0.0, 0.0};
  ff.source_rows = src.unstable_complement;
  ff.target_rows = dst.stable_complement;
  return ff;
}

// The three far-field condition values for (y(L), y~(L)).
Eigen::Vector3d far_conditions(const FarField& ff, const Eigen::Vector3d& yL,
                               const Eigen::Vector3d& ytL) {
  return {ff.target_rows[0].dot(yL - ff.target), ff.source_rows[0].dot(ytL - ff.source),
          ff.source_rows[1].dot(ytL - ff.source)};
}

class DoubledProblem {
 public:
  DoubledProblem(WaveKind kind, double mu, double L, int N, double anchor)
      : kind_(kind), mu_(mu), N_(N), h_(L / N), anchor_(anchor) {}

  Eigen::Index unknowns() const { return 6 * (N_ + 1) + 1; }

  Vec6 G(const Vec6& Y, double s) const {
    const ProfileField F{s, mu_};
    Vec6 g;
    g.head<3>() = F(Eigen::Vector3d(Y.head<3>()));
    g.tail<3>() = -F(Eigen::Vector3d(Y.tail<3>()));
    return g;
  }
  Mat6 dG(const Vec6& Y, double s) const {
    const ProfileField F{s, mu_};
    Mat6 j = Mat6::Zero();
    j.topLeftCorner<3, 3>() = F.jacobian(Eigen::Vector3d(Y.head<3>()));
    j.bottomRightCorner<3, 3>() = -F.jacobian(Eigen::Vector3d(Y.tail<3>()));
    return j;
  }
  Vec6 dGds(const Vec6& Y) const {
    Vec6 g = Vec6::Zero();
    g[2] = Y[0];
    g[5] = -Y[3];
    return g;
  }

  Vec6 node(const Eigen::VectorXd& x, int i) const { return x.segment<6>(6 * i); }
  double speed(const Eigen::VectorXd& x) const { return x[6 * (N_ + 1)]; }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const double s = speed(x);
    Eigen::VectorXd r(unknowns());
    const Vec6 Y0 = node(x, 0);
    r.segment<3>(0) = Y0.head<3>() - Y0.tail<3>();
    r[3] = Y0[0] - anchor_;
    for (int i = 0; i < N_; ++i) {
      const Vec6 Ya = node(x, i), Yb = node(x, i + 1);
      const Vec6 ga = G(Ya, s), gb = G(Yb, s);
      const Vec6 Ym = 0.5 * (Ya + Yb) + h_ / 8.0 * (ga - gb);
      r.segment<6>(4 + 6 * i) = Yb - Ya - h_ / 6.0 * (ga + 4.0 * G(Ym, s) + gb);
    }
    const Vec6 YL = node(x, N_);
    r.segment<3>(4 + 6 * N_) = far_conditions(far_field(kind_, s, mu_), YL.head<3>(),
                                              YL.tail<3>());
    return r;
  }

  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& x) const {
    const double s = speed(x);
    const Eigen::Index sc = 6 * (N_ + 1);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(N_) * 6 * 19 + 64);

    for (int j = 0; j < 3; ++j) {
      t.emplace_back(j, j, 1.0);
      t.emplace_back(j, j + 3, -1.0);
    }
    t.emplace_back(3, 0, 1.0);

    const Mat6 I = Mat6::Identity();
    for (int i = 0; i < N_; ++i) {
      const Vec6 Ya = node(x, i), Yb = node(x, i + 1);
      const Vec6 ga = G(Ya, s), gb = G(Yb, s);
      const Vec6 Ym = 0.5 * (Ya + Yb) + h_ / 8.0 * (ga - gb);
      const Mat6 Ja = dG(Ya, s), Jb = dG(Yb, s), Jm = dG(Ym, s);
      const Mat6 dYm_a = 0.5 * I + h_ / 8.0 * Ja;
      const Mat6 dYm_b = 0.5 * I - h_ / 8.0 * Jb;
      const Mat6 dRa = -I - h_ / 6.0 * (Ja + 4.0 * Jm * dYm_a);
      const Mat6 dRb = I - h_ / 6.0 * (Jb + 4.0 * Jm * dYm_b);
      const Vec6 sa = dGds(Ya), sb = dGds(Yb);
      const Vec6 dYm_s = h_ / 8.0 * (sa - sb);
      const Vec6 dRs = -h_ / 6.0 * (sa + 4.0 * (dGds(Ym) + Jm * dYm_s) + sb);
      const Eigen::Index row = 4 + 6 * i;
      for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
          if (dRa(r, c) != 0.0) t.emplace_back(row + r, 6 * i + c, dRa(r, c));
          if (dRb(r, c) != 0.0) t.emplace_back(row + r, 6 * (i + 1) + c, dRb(r, c));
        }
        t.emplace_back(row + r, sc, dRs[r]);
      }
    }

    // Far-field rows: analytic in the state, central difference in s.
    const Eigen::Index row = 4 + 6 * N_;
    const FarField ff = far_field(kind_, s, mu_);
    for (int c = 0; c < 3; ++c) {
      t.emplace_back(row, 6 * N_ + c, ff.target_rows[0][c]);
      t.emplace_back(row + 1, 6 * N_ + 3 + c, ff.source_rows[0][c]);
      t.emplace_back(row + 2, 6 * N_ + 3 + c, ff.source_rows[1][c]);
    }
    const Vec6 YL = node(x, N_);
    const double ds = 1e-7 * std::max(1.0, std::abs(s));
    const Eigen::Vector3d fp =
        far_conditions(far_field(kind_, s + ds, mu_), YL.head<3>(), YL.tail<3>());
    const Eigen::Vector3d fm =
        far_conditions(far_field(kind_, s - ds, mu_), YL.head<3>(), YL.tail<3>());
    const Eigen::Vector3d dfs = (fp - fm) / (2.0 * ds);
    for (int r = 0; r < 3; ++r) t.emplace_back(row + r, sc, dfs[r]);

    Eigen::SparseMatrix<double> J(unknowns(), unknowns());
    J.setFromTriplets(t.begin(), t.end());
    return J;
  }

  double h() const { return h_; }
  int N() const { return N_; }

 private:
  WaveKind kind_;
  double mu_;
  int N_;
  double h_;
  double anchor_;
};

}  // namespace

SeedFunction seed_from_trajectory(const Trajectory<Eigen::Vector3d>& t, double anchor) {
  // Locate the anchor crossing and recentre there.
  std::size_t k = 0;
  double zc = 0.0;
  bool found = false;
  for (k = 0; k + 1 < t.size(); ++k) {
    const double a = t.y[k][0] - anchor, b = t.y[k + 1][0] - anchor;
    if (a == 0.0 || (a < 0.0) != (b < 0.0)) {
      const double w = a == 0.0 ? 0.0 : a / (a - b);
      zc = t.z[k] + w * (t.z[k + 1] - t.z[k]);
      found = true;
      break;
    }
  }
  if (!found) {
    fail(ErrorCode::CollocationFailure, "seed trajectory never crosses the phase anchor");
  }
  auto z = t.z;
  auto y = t.y;
  return [z, y, zc](double zq) -> Eigen::Vector3d {
    const double x = zq + zc;
    if (x <= z.front()) return y.front();
    if (x >= z.back()) return y.back();  // right padding by the last value
    const auto it = std::upper_bound(z.begin(), z.end(), x);
    const auto i = static_cast<std::size_t>(it - z.begin()) - 1;
    const double w = (x - z[i]) / (z[i + 1] - z[i]);
    return (1.0 - w) * y[i] + w * y[i + 1];
  };
}

SeedFunction seed_from_profile(const Profile& p) {
  return [p](double zq) -> Eigen::Vector3d {
    const ProfileSample q = p.sample(zq);
    return {q.phi, q.dphi, q.ddphi};
  };
}

Profile collocate(WaveKind kind, double mu, double s_guess, const SeedFunction& seed,
                  const CollocationOptions& options, CollocationDiagnostics* diagnostics) {
  if (options.N < 200) fail(ErrorCode::InvalidArgument, "collocate: need N >= 200");
  if (!(options.L > 0.0)) fail(ErrorCode::InvalidArgument, "collocate: need L > 0");
  const double anchor =
      options.phase_anchor.value_or(kind == WaveKind::Front ? 0.5 : -0.5);
  DoubledProblem prob(kind, mu, options.L, options.N, anchor);

  Eigen::VectorXd x(prob.unknowns());
  for (int i = 0; i <= options.N; ++i) {
    const double zeta = i * prob.h();
    x.segment<3>(6 * i) = seed(zeta);
    x.segment<3>(6 * i + 3) = seed(-zeta);
  }
  x[6 * (options.N + 1)] = s_guess;

  NewtonResult res;
  try {
    res = newton_solve_sparse([&](const Eigen::VectorXd& v) { return prob.residual(v); },
                              [&](const Eigen::VectorXd& v) { return prob.jacobian(v); },
                              x, options.newton);
  } catch (const Error& e) {
    fail(ErrorCode::CollocationFailure, std::string("collocate: ") + e.what());
  }
  if (diagnostics) {
    diagnostics->newton_iterations = res.iterations;
    diagnostics->residual_history = res.residual_history;
  }
  if (!res.converged) {
    fail(ErrorCode::CollocationFailure,
         "collocate: Newton did not converge (residual " +
             std::to_string(res.residual()) + " after " +
             std::to_string(res.iterations) + " iterations)");
  }

  const Eigen::VectorXd& sol = res.x;
  const double s = prob.speed(sol);
  const Equilibria eq = equilibria(s, mu);
  const int N = options.N;

  Profile p;
  p.kind = kind;
  p.mu = mu;
  p.s = s;
  p.L = options.L;
  p.N = N;
  p.phase_anchor = anchor;
  p.residual = res.residual();
  p.z.resize(2 * N + 1);
  p.phi.resize(2 * N + 1);
  p.dphi.resize(2 * N + 1);
  p.ddphi.resize(2 * N + 1);
  for (int i = 0; i <= 2 * N; ++i) {
    const int k = i - N;  // z = k h
    const Vec6 Y = prob.node(sol, std::abs(k));
    const Eigen::Vector3d y = k >= 0 ? Eigen::Vector3d(Y.head<3>()) : Eigen::Vector3d(Y.tail<3>());
    p.z[i] = k * prob.h();
    p.phi[i] = y[0];
    p.dphi[i] = y[1];
    p.ddphi[i] = y[2];
  }
  if (kind == WaveKind::Front) {
    p.phi_minus = eq.minus().phi;
    p.phi_plus = eq.plus().phi;
    p.a_plus = decay_rate_aplus(eq.plus());
  } else {
    p.phi_minus = eq.plus().phi;
    p.phi_plus = eq.minus().phi;
    p.a_plus = decay_rate_aplus(eq.minus());
  }
  const double tail = std::max(std::abs(p.phi[0] - p.phi_minus),
                               std::abs(p.phi[2 * N] - p.phi_plus));
  if (diagnostics) diagnostics->tail_mismatch = tail;
  if (tail > options.tail_tol) {
    fail(ErrorCode::CollocationFailure,
         "collocate: tail mismatch " + std::to_string(tail) +
             " exceeds tolerance; increase L");
  }
  return p;
}

Profile collocate_front(const ShootingResult& seed, double mu,
                        const CollocationOptions& options,
                        CollocationDiagnostics* diagnostics) {
  const double anchor =
      options.phase_anchor.value_or(seed.kind == WaveKind::Front ? 0.5 : -0.5);
  return collocate(seed.kind, mu, seed.s, seed_from_trajectory(seed.trajectory, anchor),
                   options, diagnostics);
}

Profile collocate_front(const Profile& seed, double mu, const CollocationOptions& options,
                        CollocationDiagnostics* diagnostics) {
  return collocate(seed.kind, mu, seed.s, seed_from_profile(seed), options, diagnostics);
}

Profile compute_front(double mu, double s_guess, const CollocationOptions& options) {
  const ShootingResult shot = shoot_front(s_guess, mu, 7.0, 10.0);
  return collocate_front(shot, mu, options);
}

}  // namespace mkslab
