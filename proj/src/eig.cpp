#include "mkslab/eig.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mkslab/error.hpp"

namespace mkslab {
namespace {

std::vector<Eigen::Index> lexicographic_order(const Eigen::VectorXcd& v) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (v[a].real() != v[b].real()) return v[a].real() < v[b].real();
    return v[a].imag() < v[b].imag();
  });
  return idx;
}

void check_input(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    fail(ErrorCode::InvalidArgument, "eig_dense: matrix must be square, n >= 1");
  }
  if (!m.allFinite()) fail(ErrorCode::InvalidArgument, "eig_dense: non-finite entry");
}

}  // namespace

EigenDecomposition eig_dense(const Eigen::MatrixXcd& matrix) {
  check_input(matrix);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, true);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::EigFailure, "eig_dense: QR iteration did not converge");
  }
  const auto order = lexicographic_order(solver.eigenvalues());
  EigenDecomposition out;
  out.values.resize(matrix.rows());
  out.vectors.resize(matrix.rows(), matrix.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    out.values[j] = solver.eigenvalues()[order[k]];
    out.vectors.col(j) = solver.eigenvectors().col(order[k]).normalized();
  }
  return out;
}

Eigen::VectorXcd eigenvalues_dense(const Eigen::MatrixXcd& matrix) {
  check_input(matrix);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, false);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::EigFailure, "eig_dense: QR iteration did not converge");
  }
  const auto order = lexicographic_order(solver.eigenvalues());
  Eigen::VectorXcd out(matrix.rows());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = solver.eigenvalues()[order[k]];
  }
  return out;
}

}  // namespace mkslab
