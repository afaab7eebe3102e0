#include "mkslab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mkslab/eig.hpp"
#include "mkslab/error.hpp"

namespace mkslab {
namespace {

double polish_real(double x, double c2, double c1, double c0) {
  for (int it = 0; it < 3; ++it) {
    const double f = ((x + c2) * x + c1) * x + c0;
    const double df = (3.0 * x + 2.0 * c2) * x + c1;
    if (df == 0.0) break;
    const double step = f / df;
    const double next = x - step;
    const double fnext = ((next + c2) * next + c1) * next + c0;
    if (std::abs(fnext) >= std::abs(f)) break;
    x = next;
  }
  return x;
}

cdouble polish_complex(std::span<const cdouble> coeffs, cdouble x) {
  const std::size_t n = coeffs.size() - 1;
  for (int it = 0; it < 4; ++it) {
    cdouble f = 0.0, df = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      df = df * x + f;
      f = f * x + coeffs[k];
    }
    if (df == 0.0) break;
    const cdouble next = x - f / df;
    cdouble fn = horner(coeffs, next);
    if (std::abs(fn) >= std::abs(f)) break;
    x = next;
  }
  return x;
}

}  // namespace

std::vector<cdouble> solve_cubic_real(double c2, double c1, double c0) {
  if (!std::isfinite(c2) || !std::isfinite(c1) || !std::isfinite(c0)) {
    fail(ErrorCode::InvalidArgument, "solve_cubic_real: non-finite coefficient");
  }
  // Depressed cubic t^3 + p t + q with x = t - c2/3.
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  std::vector<cdouble> roots;
  const double scale = std::max({1.0, std::abs(p), std::abs(q)});
  if (p <= 0.0 && disc <= 1e-14 * scale * scale) {
    // Three real roots (trigonometric form); p <= 0 here.
    if (p == 0.0) {
      const double t = std::cbrt(-q);
      for (int k = 0; k < 3; ++k) roots.emplace_back(t - shift, 0.0);
    } else {
      const double m = 2.0 * std::sqrt(-p / 3.0);
      double arg = 3.0 * q / (p * m);
      arg = std::clamp(arg, -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k) {
        const double t = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
        roots.emplace_back(polish_real(t - shift, c2, c1, c0), 0.0);
      }
    }
    std::sort(roots.begin(), roots.end(),
              [](cdouble a, cdouble b) { return a.real() < b.real(); });
    return roots;
  }

  // One real root (Cardano), deflate for the complex pair.
  const double sq = std::sqrt(disc);
  const double u = std::cbrt(-q / 2.0 + sq);
  const double v = std::cbrt(-q / 2.0 - sq);
  const double x0 = polish_real(u + v - shift, c2, c1, c0);
  // x^3 + c2 x^2 + c1 x + c0 = (x - x0)(x^2 + b x + c)
  const double b = c2 + x0;
  const double c = c1 + b * x0;
  const double re = -b / 2.0;
  const double im = std::sqrt(std::max(0.0, c - b * b / 4.0));
  roots.emplace_back(x0, 0.0);
  roots.emplace_back(re, im);
  roots.emplace_back(re, -im);
  return roots;
}

std::vector<double> real_cubic_roots(double c2, double c1, double c0) {
  std::vector<double> out;
  for (const auto& r : solve_cubic_real(c2, c1, c0)) {
    if (r.imag() == 0.0) out.push_back(r.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXcd companion_matrix(std::span<const cdouble> coeffs) {
  const Eigen::Index n = static_cast<Eigen::Index>(coeffs.size()) - 1;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) c(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < n; ++j) c(n - 1, j) = -coeffs[n - j] / coeffs[0];
  return c;
}

std::vector<cdouble> companion_roots(std::span<const cdouble> coeffs) {
  if (coeffs.size() < 2) {
    fail(ErrorCode::InvalidArgument, "companion_roots: degree must be >= 1");
  }
  if (coeffs[0] == 0.0) {
    fail(ErrorCode::InvalidArgument, "companion_roots: zero leading coefficient");
  }
  for (const auto& c : coeffs) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      fail(ErrorCode::InvalidArgument, "companion_roots: non-finite coefficient");
    }
  }
  if (coeffs.size() == 2) return {-coeffs[1] / coeffs[0]};
  const Eigen::VectorXcd values = eigenvalues_dense(companion_matrix(coeffs));
  std::vector<cdouble> roots(values.data(), values.data() + values.size());
  for (auto& r : roots) r = polish_complex(coeffs, r);
  std::sort(roots.begin(), roots.end(), [](cdouble a, cdouble b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return roots;
}

}  // namespace mkslab
