#pragma once

#include <Eigen/Dense>

namespace mkslab {

struct EigenDecomposition {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // unit-norm columns
};

/// Dense complex eigendecomposition. Eigenvalues are sorted by real part,
/// then imaginary part, so subspace selection downstream is reproducible.
EigenDecomposition eig_dense(const Eigen::MatrixXcd& matrix);

/// Eigenvalues only (cheaper); same ordering.
Eigen::VectorXcd eigenvalues_dense(const Eigen::MatrixXcd& matrix);

}  // namespace mkslab
