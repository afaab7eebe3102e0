#include "mkslab/profile.hpp"

#include <cmath>

#include "mkslab/polynomial.hpp"

namespace mkslab {
namespace {

Eigen::Vector3d eigenvector(double lambda) { return {1.0, lambda, lambda * lambda}; }

std::vector<Eigen::Vector3d> gram_schmidt(const std::vector<Eigen::Vector3d>& in) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& v : in) {
    Eigen::Vector3d w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) w -= q.dot(w) * q;
    }
    out.push_back(w.normalized());
  }
  return out;
}

}  // namespace

const EquilibriumPoint& Equilibria::at(Root r) const {
  if (!three_real) {
    fail(ErrorCode::DegenerateEquilibrium,
         "equilibria: single real rest state, no heteroclinic connection");
  }
  switch (r) {
    case Root::Minus: return roots[0];
    case Root::Zero: return roots[1];
    case Root::Plus: return roots[2];
  }
  return roots[0];
}

EquilibriumPoint classify_equilibrium(double phi, double s) {
  EquilibriumPoint p;
  p.phi = phi;
  p.hyperbolicity = s + 3.0 * phi * phi;
  // l^3 + l - c is strictly increasing: exactly one real root.
  p.lambda1 = real_cubic_roots(0.0, 1.0, -p.hyperbolicity).front();
  const double l = p.lambda1;
  p.lambda_complex = {-0.5 * l, std::sqrt(1.0 + 0.75 * l * l)};
  p.hyperbolic = std::abs(p.hyperbolicity) > 1e-12;
  p.exist_ineq = p.hyperbolicity > 0.0;
  return p;
}

Equilibria equilibria(double s, double mu) {
  if (!std::isfinite(s) || !std::isfinite(mu)) {
    fail(ErrorCode::InvalidArgument, "equilibria: non-finite parameters");
  }
  Equilibria eq;
  eq.s = s;
  eq.mu = mu;
  const auto roots = solve_cubic_real(0.0, s, mu);
  eq.three_real = s < 0.0;
  for (const auto& r : roots) eq.three_real = eq.three_real && r.imag() == 0.0;
  for (const auto& r : roots) {
    if (r.imag() == 0.0) {
      eq.roots.push_back(classify_equilibrium(r.real(), s));
      if (!eq.three_real) break;
    }
  }
  return eq;
}

SubspaceBasis subspaces_at(double phi, double s) {
  const EquilibriumPoint p = classify_equilibrium(phi, s);
  if (!p.hyperbolic) {
    fail(ErrorCode::DegenerateEquilibrium, "subspaces: rest state is not hyperbolic");
  }
  const cdouble lc = p.lambda_complex;
  const cdouble lc2 = lc * lc;
  const Eigen::Vector3d re{1.0, lc.real(), lc2.real()};
  const Eigen::Vector3d im{0.0, lc.imag(), lc2.imag()};
  Eigen::Vector3d real_dir = eigenvector(p.lambda1).normalized();

  SubspaceBasis b;
  b.phi = phi;
  std::vector<Eigen::Vector3d> one{real_dir};
  std::vector<Eigen::Vector3d> two = gram_schmidt({re, im});
  if (p.lambda1 > 0.0) {
    b.unstable = one;
    b.stable = two;
  } else {
    b.unstable = two;
    b.stable = one;
  }
  std::vector<Eigen::Vector3d> us = b.unstable;
  us.insert(us.end(), b.stable.begin(), b.stable.end());
  std::vector<Eigen::Vector3d> su = b.stable;
  su.insert(su.end(), b.unstable.begin(), b.unstable.end());
  const auto q_us = gram_schmidt(us);
  const auto q_su = gram_schmidt(su);
  b.unstable_complement.assign(q_us.begin() + static_cast<long>(b.unstable.size()),
                               q_us.end());
  b.stable_complement.assign(q_su.begin() + static_cast<long>(b.stable.size()),
                             q_su.end());
  b.orthonormal = true;
  return b;
}

SubspaceBasis subspaces(const Equilibria& eq, Root root) {
  SubspaceBasis b = subspaces_at(eq.at(root).phi, eq.s);
  b.at = root;
  return b;
}

double decay_rate_aplus(const EquilibriumPoint& point) {
  if (!point.hyperbolic) {
    fail(ErrorCode::DegenerateEquilibrium, "decay_rate_aplus: non-hyperbolic rest state");
  }
  return 0.5 * point.lambda1;
}

std::string to_string(WaveKind kind) { return kind == WaveKind::Front ? "front" : "back"; }

WaveKind wave_kind_from_string(const std::string& text) {
  if (text == "front") return WaveKind::Front;
  if (text == "back") return WaveKind::Back;
  fail(ErrorCode::ParseError, "unknown wave kind '" + text + "'");
}

}  // namespace mkslab
