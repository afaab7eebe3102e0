#include "mkslab/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Sparse>

#include "mkslab/eig.hpp"
#include "mkslab/evolution.hpp"
#include "mkslab/minimize.hpp"
#include "mkslab/newton.hpp"
#include "mkslab/parallel.hpp"

namespace mkslab {

namespace {

constexpr double kPi = std::numbers::pi;

// Catmull-Rom on a periodic grid z_j = j X / n.
double periodic_sample(const Eigen::VectorXd& v, double X, double zq) {
  const Eigen::Index n = v.size();
  const double h = X / static_cast<double>(n);
  double u = std::fmod(zq, X);
  if (u < 0.0) u += X;
  auto i = static_cast<Eigen::Index>(std::floor(u / h));
  const double t = u / h - static_cast<double>(i);
  auto at = [&](Eigen::Index j) { return v[((j % n) + n) % n]; };
  const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  return p1 + 0.5 * t *
                  (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                  t * (3.0 * (p1 - p2) + p3 - p0)));
}

// Raised-cosine weight rising from 0 at x <= 0 to 1 at x >= 1.
double cosine_ramp(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 - 0.5 * std::cos(kPi * x);
}

}  // namespace

Segment truncate_profile(const Profile& p, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "truncate_profile: need tol > 0");
  const Eigen::Index n = p.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "truncate_profile: empty profile");
  const double tail = std::max(std::abs(p.phi[0] - p.phi_minus),
                               std::abs(p.phi[n - 1] - p.phi_plus));
  if (tol <= tail) {
    fail(ErrorCode::TruncationTooTight,
         "truncate_profile: tol " + std::to_string(tol) + " below the profile tail mismatch " +
             std::to_string(tail));
  }
  Eigen::Index lo = 0;
  while (lo < n - 1 && std::abs(p.phi[lo] - p.phi_minus) < tol) ++lo;
  Eigen::Index hi = n - 1;
  while (hi > 0 && std::abs(p.phi[hi] - p.phi_plus) < tol) --hi;
  // The last node still inside the tolerance on each side closes the window.
  lo = std::max<Eigen::Index>(lo - 1, 0);
  hi = std::min<Eigen::Index>(hi + 1, n - 1);
  if (hi <= lo) {
    fail(ErrorCode::TruncationTooTight, "truncate_profile: empty window");
  }
  return Segment{p, p.z[lo], p.z[hi], tol};
}

double CellBlock::length() const {
  double acc = 0.0;
  for (const auto& piece : pieces) acc += piece.length;
  return acc;
}

double CellBlock::total_spacing() const {
  double acc = 0.0;
  for (const auto& piece : pieces) {
    if (piece.kind == BlockPiece::Kind::Spacer) acc += piece.length;
  }
  return acc;
}

std::vector<double> CellBlock::layout() const {
  std::vector<double> out;
  out.reserve(pieces.size());
  for (const auto& piece : pieces) out.push_back(piece.length);
  return out;
}

CellBlock build_cell_block(const Segment& front, const Segment& back,
                           const std::vector<double>& spacings, int n_pairs) {
  if (n_pairs < 1) fail(ErrorCode::InvalidArgument, "build_cell_block: need n_pairs >= 1");
  if (spacings.size() != static_cast<std::size_t>(2 * n_pairs)) {
    fail(ErrorCode::InvalidArgument, "build_cell_block: need 2 spacings per pair");
  }
  for (double sp : spacings) {
    if (!(sp >= 0.0)) fail(ErrorCode::InvalidArgument, "build_cell_block: spacings must be >= 0");
  }
  if (front.profile.kind != WaveKind::Front || back.profile.kind != WaveKind::Back) {
    fail(ErrorCode::InvalidArgument, "build_cell_block: expected a front and a back");
  }
  const double junction_tol = std::max(front.tol, back.tol);
  const double ds = std::abs(front.profile.s - back.profile.s);
  if (ds > 1e-8 * std::max(1.0, std::abs(front.profile.s))) {
    fail(ErrorCode::IncompatibleSegments,
         "build_cell_block: front and back speeds differ by " + std::to_string(ds));
  }
  const double gap_c = std::abs(front.right_value() - back.left_value());
  const double gap_a = std::abs(back.right_value() - front.left_value());
  if (gap_c > junction_tol || gap_a > junction_tol) {
    fail(ErrorCode::IncompatibleSegments,
         "build_cell_block: end states do not match (front " +
             std::to_string(front.left_value()) + " -> " + std::to_string(front.right_value()) +
             ", back " + std::to_string(back.left_value()) + " -> " +
             std::to_string(back.right_value()) + ")");
  }
  CellBlock b;
  b.segments = {front, back};
  b.junction_tol = junction_tol;
  b.n_pairs = n_pairs;
  for (int k = 0; k < n_pairs; ++k) {
    const auto i = static_cast<std::size_t>(2 * k);
    b.pieces.push_back({BlockPiece::Kind::Spacer, -1, front.left_value(), spacings[i], 'A'});
    b.pieces.push_back({BlockPiece::Kind::Layer, 0, 0.0, front.length(), 'B'});
    b.pieces.push_back({BlockPiece::Kind::Spacer, -1, front.right_value(), spacings[i + 1], 'C'});
    b.pieces.push_back({BlockPiece::Kind::Layer, 1, 0.0, back.length(), 'D'});
  }
  return b;
}

std::string to_string(Allocation a) { return a == Allocation::Equal ? "equal" : "single-gap"; }

Allocation allocation_from_string(const std::string& text) {
  if (text == "equal") return Allocation::Equal;
  if (text == "single-gap") return Allocation::SingleGap;
  fail(ErrorCode::InvalidArgument, "unknown allocation '" + text + "'");
}

std::vector<double> allocate_spacing(double total, int n_pairs, Allocation policy) {
  if (n_pairs < 1 || !(total >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "allocate_spacing: need n_pairs >= 1 and total >= 0");
  }
  const auto slots = static_cast<std::size_t>(2 * n_pairs);
  if (n_pairs == 1) return {0.0, total};
  if (policy == Allocation::Equal) return std::vector<double>(slots, total / static_cast<double>(slots));
  std::vector<double> out(slots, 0.0);
  out.back() = total;
  return out;
}

PeriodicPattern periodize(const CellBlock& block, const PeriodizeOptions& o) {
  if (!(o.dz > 0.0) || !(o.blend_width >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "periodize: need dz > 0 and blend_width >= 0");
  }
  const double X = block.length();
  if (!(X > 0.0)) fail(ErrorCode::InvalidArgument, "periodize: block has zero length");

  // End values of each piece, to check the wrap and the junctions.
  auto start_value = [&](const BlockPiece& pc) {
    return pc.kind == BlockPiece::Kind::Spacer
               ? pc.value
               : block.segments[static_cast<std::size_t>(pc.segment)].left_value();
  };
  auto end_value = [&](const BlockPiece& pc) {
    return pc.kind == BlockPiece::Kind::Spacer
               ? pc.value
               : block.segments[static_cast<std::size_t>(pc.segment)].right_value();
  };
  if (block.pieces.empty()) fail(ErrorCode::InvalidArgument, "periodize: empty block");
  const double wrap = std::abs(end_value(block.pieces.back()) - start_value(block.pieces.front()));
  if (wrap > block.junction_tol) {
    fail(ErrorCode::IncompatibleWrap,
         "periodize: last value differs from the first by " + std::to_string(wrap));
  }

  auto n = static_cast<Eigen::Index>(std::llround(X / o.dz));
  n = std::max<Eigen::Index>(n + (n % 2), 4);
  PeriodicPattern pat;
  pat.X = X;
  pat.total_spacing = block.total_spacing();
  pat.layout = block.layout();
  pat.blend_width = o.blend_width;
  if (!block.segments.empty()) {
    pat.s = block.segments.front().profile.s;
    pat.mu = block.segments.front().profile.mu;
  }
  pat.z = Eigen::VectorXd::LinSpaced(n, 0.0, X * static_cast<double>(n - 1) / static_cast<double>(n));
  pat.phi.resize(n);
  pat.dphi.resize(n);
  pat.ddphi.resize(n);

  std::vector<double> offsets;
  double acc = 0.0;
  for (const auto& pc : block.pieces) {
    offsets.push_back(acc);
    if (pc.kind == BlockPiece::Kind::Layer) {
      const Segment& seg = block.segments[static_cast<std::size_t>(pc.segment)];
      pat.layer_centers.push_back(acc - seg.z_lo);
    }
    acc += pc.length;
  }

  std::size_t k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double zj = pat.z[j];
    while (k + 1 < block.pieces.size() && zj >= offsets[k + 1]) ++k;
    const BlockPiece& pc = block.pieces[k];
    if (pc.kind == BlockPiece::Kind::Spacer || pc.length == 0.0) {
      pat.phi[j] = pc.value;
      pat.dphi[j] = 0.0;
      pat.ddphi[j] = 0.0;
      if (pc.kind == BlockPiece::Kind::Layer) pat.phi[j] = end_value(pc);
      continue;
    }
    const Segment& seg = block.segments[static_cast<std::size_t>(pc.segment)];
    const double local = zj - offsets[k];
    const ProfileSample ps = seg.profile.sample(seg.z_lo + local);
    double phi = ps.phi, dphi = ps.dphi, ddphi = ps.ddphi;
    if (o.blend_width > 0.0) {
      // Pull the tails onto the spacer values near each end of the layer.
      const double w = std::min(o.blend_width, 0.5 * pc.length);
      const double wl = 1.0 - cosine_ramp(local / w);
      const double wr = 1.0 - cosine_ramp((pc.length - local) / w);
      phi += wl * (seg.left_value() - phi) + wr * (seg.right_value() - phi);
    }
    pat.phi[j] = phi;
    pat.dphi[j] = dphi;
    pat.ddphi[j] = ddphi;
  }
  return pat;
}

PeriodicPattern constant_pattern(double value, double s, double X, double dz) {
  if (!(X > 0.0) || !(dz > 0.0)) {
    fail(ErrorCode::InvalidArgument, "constant_pattern: need X > 0 and dz > 0");
  }
  auto n = static_cast<Eigen::Index>(std::llround(X / dz));
  n = std::max<Eigen::Index>(n + (n % 2), 4);
  PeriodicPattern pat;
  pat.X = X;
  pat.s = s;
  pat.total_spacing = X;
  pat.layout = {X};
  pat.z = Eigen::VectorXd::LinSpaced(n, 0.0, X * static_cast<double>(n - 1) / static_cast<double>(n));
  pat.phi = Eigen::VectorXd::Constant(n, value);
  pat.dphi = Eigen::VectorXd::Zero(n);
  pat.ddphi = Eigen::VectorXd::Zero(n);
  return pat;
}

std::vector<cdouble> fourier_coefficients(const Eigen::VectorXd& samples, int K) {
  const Eigen::Index n = samples.size();
  std::vector<cdouble> c(static_cast<std::size_t>(2 * K + 1));
  for (int k = -K; k <= K; ++k) {
    cdouble acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double theta = -2.0 * kPi * k * static_cast<double>(j) / static_cast<double>(n);
      acc += samples[j] * cdouble(std::cos(theta), std::sin(theta));
    }
    c[static_cast<std::size_t>(k + K)] = acc / static_cast<double>(n);
  }
  return c;
}

HillSpectrum hill_spectrum(const PeriodicPattern& pat, const HillOptions& o) {
  if (o.N < 32 || o.M < 16) fail(ErrorCode::InvalidArgument, "hill_spectrum: need N >= 32 and M >= 16");
  const int N = o.N;
  if (pat.phi.size() <= 4 * N) {
    fail(ErrorCode::TruncationInsufficient,
         "hill_spectrum: pattern grid of " + std::to_string(pat.phi.size()) +
             " points cannot resolve Fourier order " + std::to_string(2 * N));
  }
  const Eigen::VectorXd c3 = 3.0 * pat.phi.array().square().matrix();
  const std::vector<cdouble> c = fourier_coefficients(c3, 2 * N);
  auto coef = [&](int k) { return c[static_cast<std::size_t>(k + 2 * N)]; };

  HillSpectrum out;
  out.modes = N;
  const double c0 = std::max(std::abs(coef(0)), 1e-300);
  for (int k = N + 1; k <= 2 * N; ++k) {
    out.coefficient_tail = std::max(out.coefficient_tail, std::abs(coef(k)) / c0);
  }
  if (o.check_decay && out.coefficient_tail > o.decay_tol) {
    fail(ErrorCode::TruncationInsufficient,
         "hill_spectrum: Fourier coefficients of 3 Phi^2 beyond order " + std::to_string(N) +
             " are " + std::to_string(out.coefficient_tail) + " relative to the mean");
  }

  const int M = o.M;
  const double X = pat.X;
  out.floquet.resize(static_cast<std::size_t>(M));
  out.eigenvalues.resize(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    out.floquet[static_cast<std::size_t>(j)] = -kPi / X + 2.0 * kPi * j / (M * X);
  }
  // Slices with xi < 0 are conjugates of those at -xi; xi = -pi/X is its own
  // partner modulo the lattice. Solve j = 0 and j >= M/2 only.
  std::vector<int> solve{0};
  for (int j = M / 2; j < M; ++j) solve.push_back(j);
  const int dim = 2 * N + 1;
  parallel_for(solve.size(), [&](std::size_t idx) {
    const int j = solve[idx];
    const double xi = out.floquet[static_cast<std::size_t>(j)];
    Eigen::MatrixXcd H(dim, dim);
    for (int r = -N; r <= N; ++r) {
      const double q = 2.0 * kPi * r / X + xi;
      for (int m = -N; m <= N; ++m) {
        H(r + N, m + N) = cdouble(0.0, q) * coef(r - m);
      }
      H(r + N, r + N) += cdouble(q * q - q * q * q * q, pat.s * q);
    }
    const Eigen::VectorXcd ev = eigenvalues_dense(H);
    out.eigenvalues[static_cast<std::size_t>(j)].assign(ev.data(), ev.data() + ev.size());
  });
  for (int j = 1; j < M / 2; ++j) {
    const auto& src = out.eigenvalues[static_cast<std::size_t>(M - j)];
    auto& dst = out.eigenvalues[static_cast<std::size_t>(j)];
    dst.resize(src.size());
    std::transform(src.begin(), src.end(), dst.begin(), [](cdouble v) { return std::conj(v); });
  }
  out.max_re = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < M; ++j) {
    for (const cdouble& v : out.eigenvalues[static_cast<std::size_t>(j)]) {
      if (v.real() > out.max_re) {
        out.max_re = v.real();
        out.max_re_xi = out.floquet[static_cast<std::size_t>(j)];
      }
    }
  }
  return out;
}

HillOptions hill_options_for(const PeriodicPattern& pat, const CriticalSpacingOptions& o) {
  HillOptions h = o.hill;
  h.N = std::max(h.N, static_cast<int>(std::ceil(o.modes_per_length * pat.X)));
  return h;
}

double spacing_max_re(const Segment& front, const Segment& back, double total, int n_pairs,
                      const CriticalSpacingOptions& o) {
  const CellBlock block =
      build_cell_block(front, back, allocate_spacing(total, n_pairs, o.allocation), n_pairs);
  const PeriodicPattern pat = periodize(block, o.periodize);
  return hill_spectrum(pat, hill_options_for(pat, o)).max_re;
}

CriticalSpacing critical_spacing(const Segment& front, const Segment& back, double lo, double hi,
                                 int n_pairs, const CriticalSpacingOptions& o) {
  if (!(hi > lo) || !(lo >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "critical_spacing: need 0 <= lo < hi");
  }
  CriticalSpacing out;
  out.lo = lo;
  out.hi = hi;
  out.max_re_lo = spacing_max_re(front, back, lo, n_pairs, o);
  out.max_re_hi = spacing_max_re(front, back, hi, n_pairs, o);
  // lambda = 0 sits in every spectrum (xi = 0, mean mode), and the junction
  // mismatch of an ad-hoc pattern moves the translation eigenvalue by a few
  // 1e-4, so "stable" means max_re below stability_tol rather than <= 0.
  const bool stable_lo = out.max_re_lo <= o.stability_tol;
  const bool stable_hi = out.max_re_hi <= o.stability_tol;
  if (!stable_lo || stable_hi) {
    fail(ErrorCode::BracketMissing,
         "critical_spacing: bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
             "] does not go from stable to unstable (max_re " + std::to_string(out.max_re_lo) +
             ", " + std::to_string(out.max_re_hi) + ")");
  }
  while (out.hi - out.lo > o.spacing_tol) {
    const double mid = 0.5 * (out.lo + out.hi);
    const double m = spacing_max_re(front, back, mid, n_pairs, o);
    ++out.iterations;
    if (m <= o.stability_tol) {
      out.lo = mid;
      out.max_re_lo = m;
    } else {
      out.hi = mid;
      out.max_re_hi = m;
    }
  }
  out.total = 0.5 * (out.lo + out.hi);
  return out;
}

// ------------------------------------------------------------- refinement

RefinedPattern refine_periodic_bvp(const PeriodicPattern& seed) {
  const Eigen::Index n = seed.z.size();
  if (n < 4) fail(ErrorCode::InvalidArgument, "refine_periodic_bvp: pattern too short");
  const double h = seed.X / static_cast<double>(n);
  // With a front and a back, their separation is only weakly tied to mu
  // (through exponentially small tail interactions), so each layer gets its
  // own phase condition and the speed joins mu as an unknown. Otherwise a
  // single global phase condition with mu free.
  const bool pinned = seed.layer_centers.size() == 2;
  const Eigen::Index np = pinned ? 2 : 1;
  const Eigen::Index nu = 3 * n + np;
  const Eigen::Index imu = 3 * n, is = 3 * n + 1;

  std::vector<Eigen::Index> owner(static_cast<std::size_t>(n), 0);
  if (pinned) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d0 = std::abs(std::remainder(seed.z[i] - seed.layer_centers[0], seed.X));
      const double d1 = std::abs(std::remainder(seed.z[i] - seed.layer_centers[1], seed.X));
      owner[static_cast<std::size_t>(i)] = d0 <= d1 ? 0 : 1;
    }
  }

  Eigen::VectorXd x0(nu);
  for (Eigen::Index i = 0; i < n; ++i) {
    x0[3 * i] = seed.phi[i];
    x0[3 * i + 1] = seed.dphi[i];
    x0[3 * i + 2] = seed.ddphi[i];
  }
  x0[imu] = seed.mu;
  if (pinned) x0[is] = seed.s;

  auto speed = [&](const Eigen::VectorXd& x) { return pinned ? x[is] : seed.s; };
  auto node = [&](const Eigen::VectorXd& x, Eigen::Index i) -> Eigen::Vector3d {
    const Eigen::Index k = 3 * (i % n);
    return {x[k], x[k + 1], x[k + 2]};
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    const ProfileField F{speed(x), x[imu]};
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nu);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector3d y0 = node(x, i), y1 = node(x, i + 1);
      const Eigen::Vector3d f0 = F(y0), f1 = F(y1);
      const Eigen::Vector3d ym = 0.5 * (y0 + y1) + h / 8.0 * (f0 - f1);
      r.segment<3>(3 * i) = y1 - y0 - h / 6.0 * (f0 + 4.0 * F(ym) + f1);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      r[3 * n + owner[static_cast<std::size_t>(i)]] += h * (x[3 * i] - seed.phi[i]) * seed.dphi[i];
    }
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& x) {
    const ProfileField F{speed(x), x[imu]};
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(22 * n));
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector3d y0 = node(x, i), y1 = node(x, i + 1);
      const Eigen::Vector3d f0 = F(y0), f1 = F(y1);
      const Eigen::Vector3d ym = 0.5 * (y0 + y1) + h / 8.0 * (f0 - f1);
      const Eigen::Matrix3d J0 = F.jacobian(y0), J1 = F.jacobian(y1), Jm = F.jacobian(ym);
      const Eigen::Matrix3d A = -I - h / 6.0 * (J0 + 4.0 * Jm * (0.5 * I + h / 8.0 * J0));
      const Eigen::Matrix3d B = I - h / 6.0 * (J1 + 4.0 * Jm * (0.5 * I - h / 8.0 * J1));
      const Eigen::Index c0 = 3 * i, c1 = 3 * ((i + 1) % n);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          t.emplace_back(3 * i + a, c0 + b, A(a, b));
          t.emplace_back(3 * i + a, c1 + b, B(a, b));
        }
      }
      t.emplace_back(3 * i + 2, imu, -h);
      if (pinned) {
        const Eigen::Vector3d s0 = F.d_speed(y0), s1 = F.d_speed(y1);
        const Eigen::Vector3d sm = F.d_speed(ym) + Jm * (h / 8.0 * (s0 - s1));
        const Eigen::Vector3d col = -h / 6.0 * (s0 + 4.0 * sm + s1);
        for (int a = 0; a < 3; ++a) t.emplace_back(3 * i + a, is, col[a]);
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      t.emplace_back(3 * n + owner[static_cast<std::size_t>(i)], 3 * i, h * seed.dphi[i]);
    }
    Eigen::SparseMatrix<double> J(nu, nu);
    J.setFromTriplets(t.begin(), t.end());
    return J;
  };

  NewtonOptions no;
  no.tol = Tolerances{1e-11, 1e-14, 40};
  const NewtonResult res = newton_solve_sparse(residual, jacobian, x0, no);
  if (!res.converged) {
    fail(ErrorCode::RefinementFailure, "refine_periodic_bvp: Newton did not converge (residual " +
                                           std::to_string(res.residual()) + ")");
  }
  RefinedPattern out;
  out.pattern = seed;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.pattern.phi[i] = res.x[3 * i];
    out.pattern.dphi[i] = res.x[3 * i + 1];
    out.pattern.ddphi[i] = res.x[3 * i + 2];
  }
  out.mu = res.x[imu];
  out.pattern.mu = out.mu;
  out.pattern.s = speed(res.x);
  const Eigen::VectorXd r = residual(res.x);
  out.residual = r.head(3 * n).cwiseAbs().maxCoeff();
  out.sup_distance = (out.pattern.phi - seed.phi).cwiseAbs().maxCoeff();
  out.newton_iterations = res.iterations;
  return out;
}

// ----------------------------------------------------------- time evolution

DiscretePattern discrete_periodic_steady(const PeriodicPattern& pat, double dz) {
  if (!(dz > 0.0)) fail(ErrorCode::InvalidArgument, "discrete_periodic_steady: need dz > 0");
  auto n = static_cast<Eigen::Index>(std::llround(pat.X / dz));
  n = std::max<Eigen::Index>(n + (n % 2), 8);
  const double h = pat.X / static_cast<double>(n);
  DiscretePattern out;
  out.z = Eigen::VectorXd::LinSpaced(n, 0.0, h * static_cast<double>(n - 1));
  Eigen::VectorXd seed(n), dseed(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    seed[j] = periodic_sample(pat.phi, pat.X, out.z[j]);
    dseed[j] = periodic_sample(pat.dphi, pat.X, out.z[j]);
  }
  // The rows of the conservative operator sum to zero; the first is replaced
  // by the mass of the seed, and a phase condition fixes the translate.
  auto residual = [&](const Eigen::VectorXd& v) {
    const SpatialOperator op(n, h, v[n], Boundary::Periodic);
    Eigen::VectorXd r(n + 1);
    r.head(n) = op.apply(v.head(n));
    r[0] = (v.head(n) - seed).sum();
    r[n] = (v.head(n) - seed).dot(dseed) * h;
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& v) {
    const SpatialOperator op(n, h, v[n], Boundary::Periodic);
    const Eigen::SparseMatrix<double> J = op.jacobian(v.head(n));
    const Eigen::VectorXd col = op.speed_derivative(v.head(n));
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < J.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(J, k); it; ++it) {
        if (it.row() != 0) t.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Eigen::Index j = 1; j < n; ++j) t.emplace_back(j, n, col[j]);
    for (Eigen::Index j = 0; j < n; ++j) {
      t.emplace_back(0, j, 1.0);
      t.emplace_back(n, j, h * dseed[j]);
    }
    Eigen::SparseMatrix<double> out_j(n + 1, n + 1);
    out_j.setFromTriplets(t.begin(), t.end());
    return out_j;
  };
  Eigen::VectorXd x(n + 1);
  x.head(n) = seed;
  x[n] = pat.s;
  NewtonOptions no;
  no.tol = Tolerances{1e-9, 1e-14, 40};
  const NewtonResult res = newton_solve_sparse(residual, jacobian, x, no);
  if (!res.converged) {
    fail(ErrorCode::NoConvergence, "discrete_periodic_steady: Newton did not converge (residual " +
                                       std::to_string(res.residual()) + ")");
  }
  out.phi = res.x.head(n);
  out.s = res.x[n];
  out.residual = res.residual();
  return out;
}

StabilizationReport stabilization_experiment(const PeriodicPattern& pat,
                                             const StabilizationOptions& o) {
  if (!(o.T > 0.0) || !(o.record_every > 0.0)) {
    fail(ErrorCode::InvalidArgument, "stabilization_experiment: need T > 0 and record_every > 0");
  }
  const DiscretePattern steady = discrete_periodic_steady(pat, o.dz);
  const Eigen::Index n = steady.z.size();
  StabilizationReport rep;
  rep.s_discrete = steady.s;
  rep.layer_centers = pat.layer_centers;

  EvolutionState st;
  st.z = steady.z;
  st.s = steady.s;
  st.p = steady.phi;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = std::remainder(steady.z[j] - o.center, pat.X);
    st.p[j] += o.amplitude * std::exp(-(d / o.width) * (d / o.width));
  }
  EvolveOptions eo;
  eo.dt = o.dt;
  eo.bc = Boundary::Periodic;

  auto shift_at = [&](const Eigen::VectorXd& p, double center) {
    auto objective = [&](double g) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(std::remainder(steady.z[j] - center, pat.X)) > o.fit_half_width) continue;
        const double d = p[j] - periodic_sample(steady.phi, pat.X, steady.z[j] + g);
        acc += d * d;
      }
      return acc;
    };
    return minimize_scalar(objective, -1.0, 1.0, 1e-10).x;
  };
  // Each node follows the shift of its nearest layer, so a settled phase
  // shift does not count as deviation.
  std::vector<std::size_t> owner(static_cast<std::size_t>(n), 0);
  for (Eigen::Index j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pat.layer_centers.size(); ++k) {
      const double d = std::abs(std::remainder(steady.z[j] - pat.layer_centers[k], pat.X));
      if (d < best) {
        best = d;
        owner[static_cast<std::size_t>(j)] = k;
      }
    }
  }
  auto record = [&](const EvolutionState& s) {
    rep.times.push_back(s.t);
    std::vector<double> shifts;
    for (double c : pat.layer_centers) shifts.push_back(shift_at(s.p, c));
    double dev = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double g = shifts.empty() ? 0.0 : shifts[owner[static_cast<std::size_t>(j)]];
      dev = std::max(dev, std::abs(s.p[j] - periodic_sample(steady.phi, pat.X, steady.z[j] + g)));
    }
    rep.shifts.push_back(std::move(shifts));
    rep.deviation.push_back(dev);
  };
  record(st);
  const auto chunks = static_cast<int>(std::llround(o.T / o.record_every));
  for (int c = 0; c < chunks; ++c) {
    eo.T = o.record_every;
    st = evolve(st, eo).final_state;
    record(st);
  }
  rep.decaying = rep.deviation.back() < 0.1 * rep.deviation.front();
  return rep;
}

}  // namespace mkslab
