#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mkslab/error.hpp"
#include "mkslab/tolerances.hpp"

namespace mkslab {

enum class IntegrationStatus { Ok, Escaped, StepUnderflow, MaxSteps };

/// Accepted nodes of an integration, stored with z strictly increasing
/// regardless of the direction of integration.
template <typename State>
struct Trajectory {
  std::vector<double> z;
  std::vector<State> y;
  IntegrationStatus status = IntegrationStatus::Ok;
  long steps = 0;
  long rejected = 0;

  bool ok() const { return status == IntegrationStatus::Ok; }
  std::size_t size() const { return z.size(); }
  const State& front() const { return y.front(); }
  const State& back() const { return y.back(); }
};

struct Rk45Options {
  Tolerances tol{1e-10, 1e-10, 100};
  double initial_step = 0.0;  // 0: pick from the field scale
  double min_step = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;
  /// Stop with IntegrationStatus::Escaped once the max-norm exceeds this.
  double escape_norm = std::numeric_limits<double>::infinity();
  bool store_nodes = true;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                        e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

template <typename State>
double scaled_error(const State& err, const State& y0, const State& y1,
                    const Tolerances& tol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        tol.abs_tol + tol.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

}  // namespace detail

/// Adaptive embedded Runge-Kutta 4(5) (Dormand-Prince, FSAL) for y' = f(z, y).
/// Integrates forward or backward depending on the sign of z1 - z0.
template <typename State, typename Field>
Trajectory<State> integrate_rk45(Field&& field, const State& y0, double z0,
                                 double z1, const Rk45Options& opt = {}) {
  using namespace detail;
  if (!(z0 != z1) || !std::isfinite(z0) || !std::isfinite(z1)) {
    fail(ErrorCode::InvalidArgument, "integrate_rk45: degenerate span");
  }
  opt.tol.validate();

  const double dir = z1 > z0 ? 1.0 : -1.0;
  const double span = std::abs(z1 - z0);

  Trajectory<State> out;
  State y = y0;
  double z = z0;
  out.z.push_back(z);
  out.y.push_back(y);

  State k1 = field(z, y);
  double h = opt.initial_step;
  if (h <= 0.0) {
    const double ynorm = std::max(1e-5, static_cast<double>(y.cwiseAbs().maxCoeff()));
    const double fnorm = std::max(1e-5, static_cast<double>(k1.cwiseAbs().maxCoeff()));
    h = std::min(0.01 * ynorm / fnorm, 0.1 * span);
    h = std::max(h, 1e-6 * span);
  }
  h = std::min({h, opt.max_step, span});

  while (dir * (z1 - z) > 0.0) {
    if (out.steps + out.rejected >= opt.max_steps) {
      out.status = IntegrationStatus::MaxSteps;
      break;
    }
    bool last = false;
    if (h >= std::abs(z1 - z)) {
      h = std::abs(z1 - z);
      last = true;
    }
    const double hs = dir * h;
    const State k2 = field(z + c2 * hs, State(y + hs * (a21 * k1)));
    const State k3 = field(z + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
    const State k4 =
        field(z + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 = field(
        z + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 = field(
        z + hs,
        State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const State ynew =
        y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const State k7 = field(z + hs, ynew);
    const State err =
        hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double ratio = scaled_error(err, y, ynew, opt.tol);
    if (!std::isfinite(ratio)) ratio = 1e10;

    if (ratio <= 1.0) {
      z = last ? z1 : z + hs;
      y = ynew;
      k1 = k7;
      ++out.steps;
      if (opt.store_nodes || last) {
        out.z.push_back(z);
        out.y.push_back(y);
      }
      if (static_cast<double>(y.cwiseAbs().maxCoeff()) > opt.escape_norm) {
        out.status = IntegrationStatus::Escaped;
        break;
      }
      const double grow = ratio == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(ratio, -0.2));
      h = std::min(h * grow, opt.max_step);
    } else {
      ++out.rejected;
      h *= std::max(0.1, 0.9 * std::pow(ratio, -0.25));
      if (h < opt.min_step) {
        out.status = IntegrationStatus::StepUnderflow;
        break;
      }
    }
  }

  if (out.z.back() != z) {
    out.z.push_back(z);
    out.y.push_back(y);
  }
  if (dir < 0.0) {
    std::reverse(out.z.begin(), out.z.end());
    std::reverse(out.y.begin(), out.y.end());
  }
  return out;
}

/// Value at the far end of the integration (the end reached last).
template <typename State>
const State& terminal_value(const Trajectory<State>& t, double z0, double z1) {
  return z1 > z0 ? t.y.back() : t.y.front();
}

}  // namespace mkslab
