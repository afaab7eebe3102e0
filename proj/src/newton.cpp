#include "mkslab/newton.hpp"

#include <limits>

namespace mkslab {
namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

template <typename Solve>
NewtonResult iterate(const ResidualFn& F, Solve&& solve_step,
                     const Eigen::VectorXd& x0, const NewtonOptions& opt) {
  opt.tol.validate();
  NewtonResult out;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd fx = F(x);
  double r = inf_norm(fx);
  out.residual_history.push_back(r);
  Eigen::VectorXd best = x;
  double best_r = r;

  for (int it = 0; it < opt.tol.max_iter; ++it) {
    if (!std::isfinite(r)) break;
    if (r < opt.tol.abs_tol) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd dx = solve_step(x, fx);
    if (!dx.allFinite()) {
      fail(ErrorCode::SingularJacobian, "newton_solve: Jacobian is singular");
    }
    double damping = 1.0;
    Eigen::VectorXd xn = x - dx;
    Eigen::VectorXd fn = F(xn);
    double rn = inf_norm(fn);
    if (opt.line_search) {
      while ((!std::isfinite(rn) || rn > (1.0 - 1e-4 * damping) * r) &&
             damping > opt.min_damping) {
        damping *= 0.5;
        xn = x - damping * dx;
        fn = F(xn);
        rn = inf_norm(fn);
      }
    }
    x = std::move(xn);
    fx = std::move(fn);
    r = rn;
    out.iterations = it + 1;
    out.residual_history.push_back(r);
    if (r < best_r) {
      best_r = r;
      best = x;
    }
    const double step = damping * inf_norm(dx);
    if (r < opt.tol.abs_tol ||
        (damping == 1.0 && step < opt.tol.rel_tol * (1.0 + inf_norm(x)) &&
         r < 1e3 * opt.tol.abs_tol)) {
      out.converged = true;
      break;
    }
  }
  out.x = out.converged ? x : best;
  if (!out.converged && best_r < opt.tol.abs_tol) out.converged = true;
  return out;
}

}  // namespace

NewtonResult newton_solve(const ResidualFn& F, const DenseJacobianFn& jacobian,
                          const Eigen::VectorXd& x0, const NewtonOptions& options) {
  auto solve = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& fx) {
    const Eigen::MatrixXd J = jacobian(x);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) {
      fail(ErrorCode::SingularJacobian, "newton_solve: Jacobian is singular");
    }
    return Eigen::VectorXd(lu.solve(fx));
  };
  return iterate(F, solve, x0, options);
}

NewtonResult newton_solve_sparse(const ResidualFn& F,
                                 const SparseJacobianFn& jacobian,
                                 const Eigen::VectorXd& x0,
                                 const NewtonOptions& options) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  auto solve = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& fx) {
    Eigen::SparseMatrix<double> J = jacobian(x);
    J.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      fail(ErrorCode::SingularJacobian, "newton_solve: sparse Jacobian is singular");
    }
    return Eigen::VectorXd(lu.solve(fx));
  };
  return iterate(F, solve, x0, options);
}

Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& F,
                                           const Eigen::VectorXd& x, double step) {
  const Eigen::VectorXd f0 = F(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return J;
}

}  // namespace mkslab
