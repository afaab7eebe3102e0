#include "mkslab/minimize.hpp"

#include <cmath>
#include <utility>

#include "mkslab/error.hpp"

namespace mkslab {

ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo,
                              double hi, double tol, int max_iter) {
  if (!(lo < hi)) fail(ErrorCode::InvalidArgument, "minimize_scalar: need lo < hi");
  constexpr double golden = 0.3819660112501051;
  int evals = 0;
  auto eval = [&](double x) {
    ++evals;
    return f(x);
  };

  double a = lo, b = hi;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = eval(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    const double tol1 = tol * 0.5 + 1e-15 * std::abs(x);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) break;

    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = mid > x ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x >= mid) ? a - x : b - x;
      d = golden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = eval(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  ScalarMinimum out{x, fx, true, evals};
  const double flo = eval(lo);
  const double fhi = eval(hi);
  out.evaluations = evals;
  if (flo <= out.fx || fhi <= out.fx) {
    out.interior = false;
    if (flo <= fhi) {
      out.x = lo;
      out.fx = flo;
    } else {
      out.x = hi;
      out.fx = fhi;
    }
  }
  return out;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol, int max_iter) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    fail(ErrorCode::BracketMissing, "bisect_root: no sign change in bracket");
  }
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mkslab
