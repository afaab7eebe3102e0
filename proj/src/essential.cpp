#include "mkslab/essential.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <limits>

#include "mkslab/minimize.hpp"

namespace mkslab {

double dispersion_real_part(double phi_sq, double s, double a, double k) {
  const double c = s + 3.0 * phi_sq;
  const double a2 = a * a, k2 = k * k;
  return -a2 * a2 + a2 * (6.0 * k2 - 1.0) - a * c - k2 * k2 + k2;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "uniform_grid: need n >= 1");
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return g;
}

std::vector<double> default_k_grid() { return uniform_grid(-5.0, 5.0, 4001); }

SpectralCurve dispersion_curve(double phi_sq, double s, double a,
                               std::span<const double> k_grid) {
  if (k_grid.empty()) fail(ErrorCode::InvalidArgument, "dispersion_curve: empty k grid");
  const double c = s + 3.0 * phi_sq;
  SpectralCurve out;
  out.params.assign(k_grid.begin(), k_grid.end());
  out.values.reserve(k_grid.size());
  out.real_closed_form.reserve(k_grid.size());
  out.max_re = -std::numeric_limits<double>::infinity();
  for (double k : k_grid) {
    const cdouble v = dispersion_symbol(c, cdouble(-a, k));
    out.values.push_back(v);
    out.real_closed_form.push_back(dispersion_real_part(phi_sq, s, a, k));
    out.max_re = std::max(out.max_re, v.real());
  }
  return out;
}

double weight_rhs(double a) {
  const double a2 = a * a;
  return (32.0 * a2 * a2 + 8.0 * a2 + 1.0) / (4.0 * a);
}

bool weight_admissible(double s, double phi_sq, double a) {
  if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "weight_admissible: need a > 0");
  return s + 3.0 * phi_sq > weight_rhs(a);
}

WeightWindow weight_interval(double s, double phi_sq) {
  WeightWindow w;
  w.s = s;
  w.phi_sq = phi_sq;
  const double c = s + 3.0 * phi_sq;
  if (!(c > 0.0)) return w;
  // g(a) = 4ac - (32a^4 + 8a^2 + 1) is concave with g(0) < 0; its peak
  // solves 128 a^3 + 16 a = 4c.
  auto g = [c](double a) {
    const double a2 = a * a;
    return 4.0 * a * c - (32.0 * a2 * a2 + 8.0 * a2 + 1.0);
  };
  double hi = 1.0;
  while (128.0 * hi * hi * hi + 16.0 * hi < 4.0 * c) hi *= 2.0;
  const double peak =
      bisect_root([c](double a) { return 128.0 * a * a * a + 16.0 * a - 4.0 * c; }, 0.0, hi,
                  1e-14);
  if (!(g(peak) > 0.0)) return w;
  double right = 2.0 * peak + 1.0;
  while (g(right) > 0.0) right *= 2.0;
  w.a_min = bisect_root(g, 0.0, peak, 1e-13);
  w.a_max = bisect_root(g, peak, right, 1e-13);
  w.admissible = true;
  return w;
}

CriticalSpeed critical_speed_sstar() {
  CriticalSpeed out;
  // Stationarity of weight_rhs: 96 a^4 + 8 a^2 - 1 = 0, a quadratic in a^2.
  const double a2 = (-8.0 + std::sqrt(64.0 + 4.0 * 96.0)) / (2.0 * 96.0);
  out.a_star = std::sqrt(a2);
  out.min_rhs = weight_rhs(out.a_star);
  out.s_star = -0.5 * out.min_rhs;
  out.discrepancy = std::abs(out.s_star - out.reference) > 0.01;
  return out;
}

double existence_margin(const Profile& p) {
  return std::min(p.s + 3.0 * p.phi_minus * p.phi_minus, p.s + 3.0 * p.phi_plus * p.phi_plus);
}

namespace {

// mu_f of s = s_f - C sqrt(|mu_f - mu|) through three points approaching the
// fold from one side (dir = +1 from below, -1 from above).
std::optional<double> fold_fit(const std::array<std::pair<double, double>, 3>& pts, double dir,
                               double reach) {
  const auto [m1, s1] = pts[0];
  const auto [m2, s2] = pts[1];
  const auto [m3, s3] = pts[2];
  if (s3 == s2) return std::nullopt;
  const double target = (s1 - s2) / (s3 - s2);
  auto ratio = [&](double mf) {
    const double r1 = std::sqrt(dir * (mf - m1)), r2 = std::sqrt(dir * (mf - m2)),
                 r3 = std::sqrt(dir * (mf - m3));
    return (r1 - r2) / (r3 - r2) - target;
  };
  // ratio -> -inf as mu_f -> m3 and tends to the linear ratio far away.
  const double lo = m3 + dir * 1e-14 * std::max(1.0, std::abs(m3));
  const double hi = m3 + dir * reach;
  if ((ratio(lo) < 0.0) == (ratio(hi) < 0.0)) return std::nullopt;
  return bisect_root(ratio, std::min(lo, hi), std::max(lo, hi), 1e-14);
}

}  // namespace

CriticalMu critical_mu_star(std::span<const Profile> family, double max_extrapolation) {
  if (family.size() < 3) {
    fail(ErrorCode::BracketMissing, "critical_mu_star: need at least three profiles");
  }
  struct Row {
    double mu, s, margin;
  };
  std::vector<Row> rows;
  for (const Profile& p : family) rows.push_back({p.mu, p.s, existence_margin(p)});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.mu < b.mu; });

  CriticalMu out;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const Row& a = rows[i];
    const Row& b = rows[i + 1];
    if ((a.margin > 0.0) != (b.margin > 0.0)) {
      out.mu_star = a.mu - a.margin * (b.mu - a.mu) / (b.margin - a.margin);
      out.method = CriticalMuMethod::SignChange;
      out.last_mu = a.margin > 0.0 ? a.mu : b.mu;
      out.last_margin = a.margin > 0.0 ? a.margin : b.margin;
      return out;
    }
  }
  // Fold approached at the end where the margin is smallest.
  const bool at_hi = rows.back().margin <= rows.front().margin;
  const std::size_t n = rows.size();
  std::array<std::pair<double, double>, 3> pts;
  for (std::size_t k = 0; k < 3; ++k) {
    const Row& r = at_hi ? rows[n - 3 + k] : rows[2 - k];
    pts[k] = {r.mu, r.s};
  }
  const auto mf = fold_fit(pts, at_hi ? 1.0 : -1.0, max_extrapolation);
  if (!mf || !(rows.back().margin > 0.0)) {
    fail(ErrorCode::BracketMissing,
         "critical_mu_star: s + 3 phi^2 has no sign change and the family shows no fold");
  }
  out.mu_star = *mf;
  out.method = CriticalMuMethod::Fold;
  out.last_mu = at_hi ? rows.back().mu : rows.front().mu;
  out.last_margin = at_hi ? rows.back().margin : rows.front().margin;
  return out;
}

FredholmBorders fredholm_borders(const Profile& p, double a, std::span<const double> k_grid) {
  FredholmBorders out;
  out.minus = dispersion_curve(p.phi_minus * p.phi_minus, p.s, a, k_grid);
  out.minus.label = "phi_minus";
  out.plus = dispersion_curve(p.phi_plus * p.phi_plus, p.s, a, k_grid);
  out.plus.label = "phi_plus";
  out.max_re = std::max(out.minus.max_re, out.plus.max_re);
  out.coincide = p.phi_minus * p.phi_minus == p.phi_plus * p.phi_plus;
  return out;
}

}  // namespace mkslab
