#pragma once

#include <functional>

namespace mkslab {

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  bool interior = true;  // false: no interior decrease, best endpoint returned
  int evaluations = 0;
};

/// Brent's golden-section/parabolic minimization on [lo, hi].
ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo,
                              double hi, double tol = 1e-10, int max_iter = 200);

/// Bisection for a sign change of f on [lo, hi].
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol = 1e-12, int max_iter = 200);

}  // namespace mkslab
