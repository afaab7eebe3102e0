#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mkslab {

using cdouble = std::complex<double>;

/// Horner evaluation; coefficients ordered from the leading term down.
template <typename Coeff, typename Scalar>
auto horner(std::span<const Coeff> coeffs, const Scalar& x) {
  using Result = decltype(Coeff{} * x);
  Result acc{};
  for (const auto& c : coeffs) acc = acc * x + c;
  return acc;
}

/// Roots of x^3 + c2 x^2 + c1 x + c0, closed form plus one Newton polish.
/// Real roots come back with an exactly zero imaginary part and are sorted
/// ascending; a complex pair (if any) follows the real root.
std::vector<cdouble> solve_cubic_real(double c2, double c1, double c0);

/// Real roots only, sorted ascending.
std::vector<double> real_cubic_roots(double c2, double c1, double c0);

/// Roots of a complex polynomial via companion-matrix eigenvalues, each
/// polished with Newton on the polynomial. Coefficients leading term first.
std::vector<cdouble> companion_roots(std::span<const cdouble> coeffs);

Eigen::MatrixXcd companion_matrix(std::span<const cdouble> coeffs);

}  // namespace mkslab
