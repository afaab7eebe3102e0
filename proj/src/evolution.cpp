#include "mkslab/evolution.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "mkslab/minimize.hpp"

namespace mkslab {

double EvolutionState::mass(Boundary bc) const {
  const Eigen::Index n = p.size();
  if (n == 0) return 0.0;
  const double h = dz();
  if (bc == Boundary::Periodic) return h * p.sum();
  if (n == 1) return 0.0;
  return h * (p.sum() - 0.5 * (p[0] + p[n - 1]));
}

SpatialOperator::SpatialOperator(Eigen::Index n, double dz, double s, Boundary bc, double left,
                                 double right)
    : n_(n), dz_(dz), s_(s), bc_(bc), left_(left), right_(right) {
  if (n < 5) fail(ErrorCode::InvalidArgument, "SpatialOperator: need at least 5 nodes");
  if (!(dz > 0.0)) fail(ErrorCode::InvalidArgument, "SpatialOperator: need dz > 0");
}

double SpatialOperator::at(const Eigen::VectorXd& p, Eigen::Index j) const {
  if (bc_ == Boundary::Periodic) return p[((j % n_) + n_) % n_];
  if (j < 0) return left_;
  if (j >= n_) return right_;
  return p[j];
}

Eigen::VectorXd SpatialOperator::apply(const Eigen::VectorXd& p) const {
  Eigen::VectorXd out(n_);
  const double h = dz_, h2 = dz_ * dz_, h4 = h2 * h2;
  for (Eigen::Index j = 0; j < n_; ++j) {
    const double pm2 = at(p, j - 2), pm1 = at(p, j - 1), p0 = p[j], pp1 = at(p, j + 1),
                 pp2 = at(p, j + 2);
    const double d1 = (pp1 - pm1) / (2.0 * h);
    const double c1 = (pp1 * pp1 * pp1 - pm1 * pm1 * pm1) / (2.0 * h);
    const double d2 = (pp1 - 2.0 * p0 + pm1) / h2;
    const double d4 = (pp2 - 4.0 * pp1 + 6.0 * p0 - 4.0 * pm1 + pm2) / h4;
    out[j] = s_ * d1 - d2 - d4 + c1;
  }
  return out;
}

Eigen::VectorXd SpatialOperator::speed_derivative(const Eigen::VectorXd& p) const {
  Eigen::VectorXd out(n_);
  for (Eigen::Index j = 0; j < n_; ++j) out[j] = (at(p, j + 1) - at(p, j - 1)) / (2.0 * dz_);
  return out;
}

Eigen::SparseMatrix<double> SpatialOperator::jacobian(const Eigen::VectorXd& p) const {
  const double h = dz_, h2 = dz_ * dz_, h4 = h2 * h2;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(5 * n_));
  auto add = [&](Eigen::Index row, Eigen::Index col, double v) {
    if (bc_ == Boundary::Periodic) {
      t.emplace_back(row, ((col % n_) + n_) % n_, v);
    } else if (col >= 0 && col < n_) {
      t.emplace_back(row, col, v);
    }
  };
  for (Eigen::Index j = 0; j < n_; ++j) {
    const double qm = 3.0 * at(p, j - 1) * at(p, j - 1);
    const double qp = 3.0 * at(p, j + 1) * at(p, j + 1);
    add(j, j - 2, -1.0 / h4);
    add(j, j - 1, -(s_ + qm) / (2.0 * h) - 1.0 / h2 + 4.0 / h4);
    add(j, j, 2.0 / h2 - 6.0 / h4);
    add(j, j + 1, (s_ + qp) / (2.0 * h) - 1.0 / h2 + 4.0 / h4);
    add(j, j + 2, -1.0 / h4);
  }
  Eigen::SparseMatrix<double> J(n_, n_);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

Eigen::VectorXd cn_residual(const SpatialOperator& op, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& p_old, double dt) {
  return p - p_old - 0.5 * dt * (op.apply(p) + op.apply(p_old));
}

Eigen::SparseMatrix<double> cn_jacobian(const SpatialOperator& op, const Eigen::VectorXd& p,
                                        double dt) {
  Eigen::SparseMatrix<double> I(op.size(), op.size());
  I.setIdentity();
  return I - 0.5 * dt * op.jacobian(p);
}

namespace {

class CnStepper {
 public:
  CnStepper(const SpatialOperator& op, const Tolerances& tol) : op_(op), tol_(tol) {}

  // One CN step; returns the Newton iteration count or -1 on failure.
  int step(Eigen::VectorXd& p, double dt) {
    const Eigen::VectorXd old = p;
    const Eigen::VectorXd n_old = op_.apply(old);
    Eigen::VectorXd x = old;
    for (int it = 0; it <= tol_.max_iter; ++it) {
      const Eigen::VectorXd r = x - old - 0.5 * dt * (op_.apply(x) + n_old);
      const double rn = r.cwiseAbs().maxCoeff();
      if (!std::isfinite(rn)) return -1;
      if (rn < tol_.abs_tol && it > 0) {
        p = x;
        return it;
      }
      if (it == tol_.max_iter) break;
      const Eigen::SparseMatrix<double> J = cn_jacobian(op_, x, dt);
      if (!analyzed_) {
        lu_.analyzePattern(J);
        analyzed_ = true;
      }
      lu_.factorize(J);
      if (lu_.info() != Eigen::Success) return -1;
      const Eigen::VectorXd dx = lu_.solve(-r);
      x += dx;
      if (dx.cwiseAbs().maxCoeff() < tol_.rel_tol * (1.0 + x.cwiseAbs().maxCoeff()) &&
          rn < 1e3 * tol_.abs_tol) {
        p = x;
        return it + 1;
      }
    }
    return -1;
  }

 private:
  const SpatialOperator& op_;
  Tolerances tol_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool analyzed_ = false;
};

StepDiagnostics diagnose(const EvolutionState& st, const EvolveOptions& o, int iters) {
  StepDiagnostics d;
  d.t = st.t;
  d.mass = st.mass(o.bc);
  d.newton_iterations = iters;
  if (o.reference) {
    const Eigen::VectorXd v = st.p - *o.reference;
    d.linf = v.cwiseAbs().maxCoeff();
    const Eigen::VectorXd wv = (o.weight_a * st.z.array()).exp() * v.array();
    d.weighted_norm = std::sqrt(st.dz() * wv.squaredNorm());
  } else {
    d.linf = st.p.cwiseAbs().maxCoeff();
  }
  return d;
}

}  // namespace

EvolutionResult evolve(const EvolutionState& initial, const EvolveOptions& o) {
  if (!(o.dt > 0.0)) fail(ErrorCode::InvalidArgument, "evolve: need dt > 0");
  if (!(o.T >= 0.0)) fail(ErrorCode::InvalidArgument, "evolve: need T >= 0");
  if (initial.z.size() != initial.p.size()) {
    fail(ErrorCode::InvalidArgument, "evolve: grid and samples differ in length");
  }
  if (o.reference && o.reference->size() != initial.p.size()) {
    fail(ErrorCode::InvalidArgument, "evolve: reference has the wrong length");
  }
  const SpatialOperator op(initial.p.size(), initial.dz(), initial.s, o.bc, o.left, o.right);
  CnStepper stepper(op, o.newton);

  EvolutionResult out;
  EvolutionState st = initial;
  out.snapshots.push_back(st);
  out.diagnostics.push_back(diagnose(st, o, 0));
  const auto steps = static_cast<int>(std::llround(o.T / o.dt));
  for (int k = 0; k < steps; ++k) {
    int iters = stepper.step(st.p, o.dt);
    if (iters < 0) {
      // Retry the step as 2^m substeps.
      int m = 1;
      for (; m <= o.max_halvings; ++m) {
        Eigen::VectorXd trial = st.p;
        const int sub = 1 << m;
        bool ok = true;
        iters = 0;
        for (int q = 0; q < sub && ok; ++q) {
          const int it = stepper.step(trial, o.dt / sub);
          ok = it >= 0;
          iters += it;
        }
        if (ok) {
          st.p = trial;
          out.halvings = std::max(out.halvings, m);
          break;
        }
      }
      if (m > o.max_halvings) {
        fail(ErrorCode::EvolutionFailure,
             "evolve: Newton failed at t=" + std::to_string(st.t) + " after step halving");
      }
    }
    st.t = initial.t + (k + 1) * o.dt;
    ++out.steps;
    out.diagnostics.push_back(diagnose(st, o, iters));
    if (o.snapshot_every > 0 && (k + 1) % o.snapshot_every == 0 && k + 1 < steps) {
      out.snapshots.push_back(st);
    }
  }
  if (steps > 0) out.snapshots.push_back(st);
  out.final_state = st;
  return out;
}

// ------------------------------------------------------------ fronts on a grid

namespace {

std::pair<double, double> rest_states(double s, double mu, double near_left, double near_right) {
  const Equilibria eq = equilibria(s, mu);
  auto nearest = [&](double target) {
    double best = eq.roots.front().phi;
    for (const auto& r : eq.roots) {
      if (std::abs(r.phi - target) < std::abs(best - target)) best = r.phi;
    }
    return best;
  };
  return {nearest(near_left), nearest(near_right)};
}

}  // namespace

DiscreteFront discrete_front(const Profile& p, double z_lo, double z_hi, double dz) {
  if (!(z_hi > z_lo) || !(dz > 0.0)) {
    fail(ErrorCode::InvalidArgument, "discrete_front: need z_lo < z_hi and dz > 0");
  }
  const auto n = static_cast<Eigen::Index>(std::llround((z_hi - z_lo) / dz)) + 1;
  DiscreteFront f;
  f.mu = p.mu;
  f.z = Eigen::VectorXd::LinSpaced(n, z_lo, z_lo + (n - 1) * dz);
  Eigen::Index j0 = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(f.z[j]) < std::abs(f.z[j0])) j0 = j;
  }
  const double anchor = p.sample(f.z[j0]).phi;

  Eigen::VectorXd x(n + 1);
  for (Eigen::Index j = 0; j < n; ++j) x[j] = p.sample(f.z[j]).phi;
  x[n] = p.s;

  auto op_for = [&](double s) {
    const auto [l, r] = rest_states(s, p.mu, p.phi_minus, p.phi_plus);
    return SpatialOperator(n, dz, s, Boundary::Clamped, l, r);
  };
  auto residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd r(n + 1);
    r.head(n) = op_for(v[n]).apply(v.head(n));
    r[n] = v[j0] - anchor;
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& v) {
    const double s = v[n];
    const Eigen::SparseMatrix<double> J = op_for(s).jacobian(v.head(n));
    const double ds = 1e-7 * std::max(1.0, std::abs(s));
    const Eigen::VectorXd col =
        (op_for(s + ds).apply(v.head(n)) - op_for(s - ds).apply(v.head(n))) / (2.0 * ds);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(J.nonZeros() + 2 * n + 1));
    for (int k = 0; k < J.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(J, k); it; ++it) {
        t.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) t.emplace_back(j, n, col[j]);
    t.emplace_back(n, j0, 1.0);
    Eigen::SparseMatrix<double> out(n + 1, n + 1);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  };
  // The residual scale grows like dz^-4; judge convergence relative to it.
  NewtonOptions no;
  no.tol = Tolerances{1e-9, 1e-14, 30};
  const NewtonResult res = newton_solve_sparse(residual, jacobian, x, no);
  if (!res.converged) {
    fail(ErrorCode::NoConvergence, "discrete_front: Newton did not converge (residual " +
                                       std::to_string(res.residual()) + ")");
  }
  f.phi = res.x.head(n);
  f.s = res.x[n];
  std::tie(f.phi_left, f.phi_right) = rest_states(f.s, p.mu, p.phi_minus, p.phi_plus);
  f.residual = res.residual();
  return f;
}

double interpolate_grid(const Eigen::VectorXd& z, const Eigen::VectorXd& v, double zq) {
  const Eigen::Index n = z.size();
  if (zq <= z[0]) return v[0];
  if (zq >= z[n - 1]) return v[n - 1];
  const double h = z[1] - z[0];
  auto i = static_cast<Eigen::Index>(std::floor((zq - z[0]) / h));
  i = std::clamp<Eigen::Index>(i, 0, n - 2);
  const double t = (zq - z[i]) / h;
  const double p0 = v[std::max<Eigen::Index>(i - 1, 0)], p1 = v[i], p2 = v[i + 1],
               p3 = v[std::min<Eigen::Index>(i + 2, n - 1)];
  return p1 + 0.5 * t *
                  (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                  t * (3.0 * (p1 - p2) + p3 - p0)));
}

double fit_phase_shift(const DiscreteFront& front, const Eigen::VectorXd& p, double center,
                       double half_width, double range) {
  auto objective = [&](double g) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < front.z.size(); ++j) {
      if (std::abs(front.z[j] - center) > half_width) continue;
      const double d = p[j] - interpolate_grid(front.z, front.phi, front.z[j] + g);
      acc += d * d;
    }
    return acc;
  };
  return minimize_scalar(objective, -range, range, 1e-10).x;
}

PerturbationReport perturbation_experiment(const Profile& prof, const Gaussian& g,
                                           const PerturbationOptions& o) {
  if (!(o.record_every > 0.0) || !(o.T > 0.0)) {
    fail(ErrorCode::InvalidArgument, "perturbation_experiment: need T > 0 and record_every > 0");
  }
  if (o.z_hi - o.z_lo < 4.0 * 20.0) {
    fail(ErrorCode::InvalidArgument, "perturbation_experiment: domain too short for the layer");
  }
  const DiscreteFront front = discrete_front(prof, o.z_lo, o.z_hi, o.dz);
  PerturbationReport rep;
  rep.s_discrete = front.s;

  EvolutionState st;
  st.z = front.z;
  st.s = front.s;
  st.p = front.phi;
  if (g.amplitude != 0.0) {
    st.p.array() += g.amplitude * (-((front.z.array() - g.center) / g.width).square()).exp();
  }
  EvolveOptions eo;
  eo.dt = o.dt;
  eo.bc = Boundary::Clamped;
  eo.left = front.phi_left;
  eo.right = front.phi_right;
  eo.weight_a = o.weight_a;
  eo.reference = front.phi;

  const Eigen::ArrayXd weight = (o.weight_a * front.z.array()).exp();
  auto record = [&](const EvolutionState& s) {
    const double gamma = g.amplitude == 0.0 ? 0.0 : fit_phase_shift(front, s.p, 0.0);
    const Eigen::VectorXd v = s.p - front.phi;
    Eigen::VectorXd aligned(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      aligned[j] = s.p[j] - interpolate_grid(front.z, front.phi, front.z[j] + gamma);
    }
    double packet = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (front.z[j] < -gamma - o.packet_gap) {
        packet = std::max(packet, std::abs(s.p[j] - front.phi_left));
      }
    }
    rep.times.push_back(s.t);
    rep.phase_shift.push_back(gamma);
    rep.weighted_norm.push_back(std::sqrt(o.dz * (weight * v.array()).square().sum()));
    rep.weighted_aligned.push_back(std::sqrt(o.dz * (weight * aligned.array()).square().sum()));
    rep.linf.push_back(v.cwiseAbs().maxCoeff());
    rep.packet_linf.push_back(packet);
    rep.evolution.snapshots.push_back(s);
  };

  record(st);
  const auto chunks = static_cast<int>(std::llround(o.T / o.record_every));
  for (int c = 0; c < chunks; ++c) {
    eo.T = o.record_every;
    EvolutionResult r = evolve(st, eo);
    rep.evolution.steps += r.steps;
    rep.evolution.halvings = std::max(rep.evolution.halvings, r.halvings);
    rep.evolution.diagnostics.insert(rep.evolution.diagnostics.end(), r.diagnostics.begin() + 1,
                                     r.diagnostics.end());
    st = r.final_state;
    record(st);
  }
  rep.evolution.final_state = st;
  const std::size_t from = rep.packet_linf.size() * 2 / 3;
  for (std::size_t i = from; i < rep.packet_linf.size(); ++i) {
    rep.saturation = std::max(rep.saturation, rep.packet_linf[i]);
  }
  return rep;
}

// ------------------------------------------------------------ physical height

Eigen::VectorXd height_slope_to_p(const Eigen::VectorXd& hx, double gamma_phys) {
  if (!(gamma_phys > 0.0)) fail(ErrorCode::InvalidArgument, "slope: need gamma > 0");
  return std::sqrt(gamma_phys / 6.0) * (hx.array() - 1.0 / gamma_phys).matrix();
}

std::vector<HeightFrame> slope_to_height(const std::vector<EvolutionState>& trajectory,
                                         double gamma_phys, double v0) {
  if (!(gamma_phys > 0.0)) fail(ErrorCode::InvalidArgument, "slope_to_height: need gamma > 0");
  std::vector<HeightFrame> out;
  out.reserve(trajectory.size());
  const double scale = std::sqrt(6.0 / gamma_phys);
  for (const EvolutionState& st : trajectory) {
    HeightFrame f;
    f.t = st.t;
    f.x = st.z.array() + (st.s + 0.5 / gamma_phys) * st.t;
    f.hx = scale * st.p.array() + 1.0 / gamma_phys;
    f.h.resize(st.p.size());
    double acc = 0.0;
    for (Eigen::Index j = 0; j < st.p.size(); ++j) {
      if (j > 0) acc += 0.5 * (f.hx[j] + f.hx[j - 1]) * (f.x[j] - f.x[j - 1]);
      f.h[j] = acc - v0 * st.t;
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace mkslab
