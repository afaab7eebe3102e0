#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mkslab/error.hpp"
#include "mkslab/tolerances.hpp"

namespace mkslab {

struct NewtonResult {
  Eigen::VectorXd x;
  std::vector<double> residual_history;  // max-norm of F at each iterate
  bool converged = false;
  int iterations = 0;

  double residual() const { return residual_history.back(); }
};

struct NewtonOptions {
  Tolerances tol{1e-10, 1e-12, 50};
  bool line_search = true;  // backtracking on the residual max-norm
  double min_damping = 1.0 / 64.0;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using DenseJacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using SparseJacobianFn =
    std::function<Eigen::SparseMatrix<double>(const Eigen::VectorXd&)>;

/// Damped Newton iteration with a dense Jacobian. Converged when
/// ||F||_inf < tol.abs_tol or the step is below tol.rel_tol * (1 + ||x||).
/// Returns the best iterate with converged=false after max_iter.
NewtonResult newton_solve(const ResidualFn& F, const DenseJacobianFn& jacobian,
                          const Eigen::VectorXd& x0,
                          const NewtonOptions& options = {});

/// Same iteration with a sparse Jacobian factorized by SparseLU.
NewtonResult newton_solve_sparse(const ResidualFn& F,
                                 const SparseJacobianFn& jacobian,
                                 const Eigen::VectorXd& x0,
                                 const NewtonOptions& options = {});

/// Central-difference Jacobian, for consistency checks.
Eigen::MatrixXd finite_difference_jacobian(const ResidualFn& F,
                                           const Eigen::VectorXd& x,
                                           double step = 1e-6);

}  // namespace mkslab
