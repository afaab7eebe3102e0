// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status
// non-zero only for failures that are not documented deviations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mkslab/essential.hpp"
#include "mkslab/evolution.hpp"
#include "mkslab/periodic.hpp"
#include "mkslab/point_spectrum.hpp"

using namespace mkslab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<double> kMu{-1.0, -0.9, -0.8, -0.7, -0.6, -0.5, -0.4,
                              -0.3, -0.2, -0.1, 0.0,  0.1,  0.2};
const std::vector<double> kSpeed{-4.69,  -4.507, -4.312, -4.121, -3.918, -3.704, -3.478,
                                 -3.24,  -2.983, -2.703, -2.388, -2.016, -1.508};
const std::vector<double> kRadius{16.39, 15.91, 15.4,  14.87, 14.29, 13.67, 13.0,
                                  12.27, 11.46, 10.55, 9.39,  7.98,  6.11};

struct Outcome {
  bool pass = false;
  std::string detail;
  bool known_deviation = false;
};

int failures = 0;
int deviations = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const Error& e) {
    o = {false, std::string("error ") + std::string(to_string(e.code())) + ": " + e.what()};
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const char* verdict = o.pass ? "PASS" : "FAIL";
  std::printf("[%s] %2d %s: %s (%.1f s)%s\n", verdict, id, name.c_str(), o.detail.c_str(),
              seconds_since(t0), !o.pass && o.known_deviation ? " [known deviation]" : "");
  std::fflush(stdout);
  if (!o.pass) (o.known_deviation ? deviations : failures)++;
}

template <typename... T>
std::string fmt(const char* f, T... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CollocationOptions collocation(double L, int N) {
  CollocationOptions co;
  co.L = L;
  co.N = N;
  return co;
}

const Profile& front0() {
  static const Profile p = compute_front(0.0, -2.388);
  return p;
}

const ContinuationResult& table_family() {
  static const ContinuationResult r = continue_in_mu(kMu, front0());
  return r;
}

const Profile& table_profile(double mu) {
  for (const Profile& p : table_family().profiles) {
    if (std::abs(p.mu - mu) < 1e-12) return p;
  }
  fail(ErrorCode::ContinuationTerminated, fmt("no front at mu = %g", mu));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome front_speed() {
  const auto t0 = Clock::now();
  const Profile p = compute_front(0.0, -2.388);
  const double t = seconds_since(t0);
  return {std::abs(p.s + 2.388) <= 5e-3 && t < 60.0, fmt("s = %.6f, %.2f s", p.s, t)};
}

Outcome speed_table() {
  const auto t0 = Clock::now();
  const ContinuationResult& r = table_family();
  const double t = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t i = 0; i < kMu.size(); ++i) {
    worst = std::max(worst, std::abs(table_profile(kMu[i]).s - kSpeed[i]) / std::abs(kSpeed[i]));
  }
  return {r.profiles.size() == kMu.size() && worst < 0.01 && t < 600.0,
          fmt("%zu rows, worst relative error %.2e, %.1f s", r.profiles.size(), worst, t)};
}

Outcome symmetry() {
  double worst = 0.0;
  bool exact = true;
  for (double mu : {-1.0, -0.5, 0.0, 0.2}) {
    const Profile& f = table_profile(mu);
    const Profile seed = back_from_front(f);
    const Profile b = collocate(WaveKind::Back, -mu, seed.s, seed_from_profile(seed));
    worst = std::max(worst, std::abs(b.s - f.s));
    const Profile ff = back_from_front(seed);
    exact = exact && ff.s == f.s && ff.mu == f.mu && ff.kind == f.kind &&
            (ff.phi.array() == f.phi.array()).all() && (ff.dphi.array() == f.dphi.array()).all() &&
            (ff.ddphi.array() == f.ddphi.array()).all();
  }
  return {worst < 1e-6 && exact,
          fmt("max |s_front(mu) - s_back(-mu)| = %.2e, involution %s", worst, exact ? "exact" : "inexact")};
}

Outcome mu_star() {
  ContinuationOptions copt;
  copt.collocation = collocation(80.0, 1600);
  const Profile seed = compute_front(0.0, -2.388, copt.collocation);
  const std::vector<double> grid{0.1, 0.2, 0.3};
  const ContinuationResult r = continue_in_mu(grid, seed, copt);
  const CriticalMu cm = critical_mu_star(r.path);
  return {std::abs(cm.mu_star - 0.24679) <= 5e-3,
          fmt("mu* = %.6f (%s), last member mu = %.5f with margin %.3f", cm.mu_star,
              cm.method == CriticalMuMethod::Fold ? "fold of s(mu)" : "sign change", cm.last_mu,
              cm.last_margin)};
}

Outcome weight_criterion() {
  const auto k = uniform_grid(0.0, 3.0, 30001);
  int agree = 0;
  for (int i = 0; i < 50; ++i) {
    const double a = 0.02 + 0.98 * i / 49.0;
    for (int j = 0; j < 50; ++j) {
      const double c = -1.0 + 7.0 * j / 49.0;  // s + 3 phi^2 with s = 0
      double mx = -1e300;
      for (double kk : k) mx = std::max(mx, dispersion_real_part(c / 3, 0.0, a, kk));
      agree += weight_admissible(0.0, c / 3, a) == (mx < 0.0);
    }
  }
  double dense = 1e300;
  for (int i = 1; i <= 200000; ++i) {
    const double a = 2.0 * i / 200000.0;
    dense = std::min(dense, (32 * std::pow(a, 4) + 8 * a * a + 1) / (4 * a));
  }
  const CriticalSpeed cs = critical_speed_sstar();
  const bool pass = agree == 2500 && std::abs(cs.min_rhs - 1.6221) <= 1e-3 &&
                    std::abs(cs.min_rhs - dense) <= 1e-3;
  std::string d = fmt("lattice agreement %d/2500, min RHS %.6f (grid %.6f), s* = %.6f vs reference %.5f",
                      agree, cs.min_rhs, dense, cs.s_star, cs.reference);
  if (cs.discrepancy) d += "; note: s* differs from the reference by more than 0.01";
  return {pass, d};
}

Outcome energy_radius() {
  const EnergyBound b0 = energy_bounds(table_profile(0.0), 0.3);
  const EnergyBound b1 = energy_bounds(table_profile(-1.0), 0.3);
  const bool pass = std::abs(b0.R - 9.39) <= 0.05 * 9.39 && std::abs(b1.R - 16.39) <= 0.05 * 16.39;
  return {pass,
          fmt("R(mu=0) = %.3f vs 9.39, R(mu=-1) = %.3f vs 16.39; the original second estimate is %s",
              b0.R, b1.R, b0.second_applicable ? "applicable" : "inapplicable at a = 0.3"),
          true};
}

Outcome evans_origin() {
  ObservationOptions o;
  o.R = 9.39;
  const ObservationReport rep = verify_numerical_observation(front0(), 0.3, o);
  std::vector<double> mags;
  for (const cdouble& d : rep.total.values) mags.push_back(std::abs(d));
  const double ratio = std::abs(evans_eval(front0(), 0.3, 0.0)) / median(mags);
  return {ratio < 1e-6 && rep.winding_origin == 1,
          fmt("|D(0)| / median |D| = %.2e, origin winding %d", ratio, rep.winding_origin)};
}

Outcome evans_sweep() {
  const auto t0 = Clock::now();
  int ok = 0;
  std::string bad;
  for (std::size_t i = 0; i < kMu.size(); ++i) {
    ObservationOptions o;
    o.R = kRadius[i];
    const ObservationReport rep = verify_numerical_observation(table_profile(kMu[i]), 0.3, o);
    if (rep.winding_total == 1) {
      ++ok;
    } else {
      bad += fmt(" mu=%g:%d", kMu[i], rep.winding_total);
    }
  }
  const double t = seconds_since(t0);
  return {ok == 13 && t < 1800.0, fmt("%d/13 rows with winding 1, %.1f s", ok, t) + bad};
}

Outcome constant_oracle() {
  const double s = front0().s, phi = std::sqrt(-s);
  Profile c;
  c.s = s;
  c.mu = 0.0;
  c.L = 20.0;
  c.N = 200;
  c.z = Eigen::VectorXd::LinSpaced(401, -20.0, 20.0);
  c.phi = Eigen::VectorXd::Constant(401, phi);
  c.dphi = c.ddphi = Eigen::VectorXd::Zero(401);
  c.phi_minus = c.phi_plus = phi;
  const EvansResult ev = winding_number(c, 0.3, ContourSpec::half_disk(0.01, 9.39));

  const PeriodicPattern pat = constant_pattern(phi, s, 12.0, 0.025);
  HillOptions ho;
  ho.N = 64;
  ho.M = 16;
  const HillSpectrum h = hill_spectrum(pat, ho);
  double worst = 0.0;
  for (std::size_t j = 0; j < h.floquet.size(); ++j) {
    for (const cdouble& lam : h.eigenvalues[j]) {
      double best = 1e300;
      for (int r = -ho.N; r <= ho.N; ++r) {
        const double q = 2 * M_PI * r / pat.X + h.floquet[j];
        best = std::min(best, std::abs(lam - dispersion_symbol(s + 3 * phi * phi, cdouble(0, q))));
      }
      worst = std::max(worst, best);
    }
  }
  return {ev.winding == 0 && worst < 1e-6,
          fmt("Evans winding %d, Hill deviation from dispersion %.2e", ev.winding, worst)};
}

Outcome evolution_invariants() {
  // Mass on a periodic box.
  EvolutionState box;
  const int n = 128;
  box.z = Eigen::VectorXd::LinSpaced(n, 0.0, 20.0 * (n - 1) / n);
  box.p = (2 * M_PI * box.z.array() / 20.0).sin() * 0.4 + 0.1;
  box.s = -1.0;
  EvolveOptions po;
  po.T = 5.0;
  const double drift =
      std::abs(evolve(box, po).final_state.mass(Boundary::Periodic) - box.mass(Boundary::Periodic)) / po.T;

  // Unperturbed front.
  CollocationOptions co = collocation(40.0, 1600);
  const Profile p = compute_front(0.0, -2.388, co);
  const DiscreteFront f = discrete_front(p, -100, 100, 0.1);
  EvolveOptions fo;
  fo.T = 10.0;
  fo.bc = Boundary::Clamped;
  fo.left = f.phi_left;
  fo.right = f.phi_right;
  const double sup = (evolve({f.z, f.phi, 0.0, f.s}, fo).final_state.p - f.phi).cwiseAbs().maxCoeff();

  // Temporal order.
  auto run = [&](double dt) {
    EvolveOptions o;
    o.dt = dt;
    o.T = 0.8;
    o.newton = Tolerances{1e-13, 1e-15, 30};
    return evolve(box, o).final_state.p;
  };
  const Eigen::VectorXd a = run(0.04), b = run(0.02), c = run(0.01);
  const double factor = (a - b).cwiseAbs().maxCoeff() / (b - c).cwiseAbs().maxCoeff();
  return {drift < 1e-8 && sup < 1e-6 && std::abs(factor - 4.0) <= 0.5,
          fmt("mass drift %.2e per unit time, front sup deviation %.2e over T = 10, CN factor %.3f", drift,
              sup, factor)};
}

double packet_centroid(const PerturbationReport& r, std::size_t i, double gap) {
  const EvolutionState& st = r.evolution.snapshots[i];
  const double left = st.p[0];
  double w = 0.0, wz = 0.0;
  for (Eigen::Index j = 0; j < st.z.size(); ++j) {
    if (st.z[j] >= -r.phase_shift[i] - gap) break;
    const double e = (st.p[j] - left) * (st.p[j] - left);
    w += e;
    wz += e * st.z[j];
  }
  return w > 0.0 ? wz / w : 0.0;
}

Outcome perturbed_front() {
  CollocationOptions co = collocation(40.0, 1600);
  const Profile p = compute_front(0.0, -2.388, co);
  PerturbationOptions o;
  o.z_lo = -400.0;
  o.z_hi = 50.0;
  o.T = 60.0;
  o.record_every = 1.0;
  const PerturbationReport small = perturbation_experiment(p, {10.0, 1.0, 0.01}, o);
  const PerturbationReport large = perturbation_experiment(p, {10.0, 1.0, 0.1}, o);
  const double decay = small.weighted_aligned.back() / small.weighted_aligned.front();
  const std::size_t third = small.times.size() / 3;
  const double c_early = packet_centroid(small, third, o.packet_gap);
  const double c_late = packet_centroid(small, small.times.size() - 1, o.packet_gap);
  const double change = std::abs(large.saturation - small.saturation) / small.saturation;
  return {decay < 1e-2 && c_late < c_early && change < 0.2,
          fmt("aligned weighted norm ratio %.2e, packet centroid %.1f -> %.1f, saturation %.4f vs %.4f "
              "(change %.1f%%)",
              decay, c_early, c_late, small.saturation, large.saturation, 100 * change)};
}

Outcome linear_decay() {
  const Profile p = compute_front(0.0, -2.388, collocation(40.0, 1600));
  const LinearDecayReport g = linear_weighted_evolve(p, 0.3, [](double z) {
    return std::exp(-(z - 3) * (z - 3)) - 0.5 * std::exp(-(z + 4) * (z + 4) / 2);
  });
  const WeightedOperator W = weighted_operator(p, 0.3, 512, p.L);
  const LinearDecayReport k = linear_weighted_evolve(p, 0.3, weighted_derivative(p, 0.3, W.z));
  const double rel = std::abs(g.fitted_rate - g.omega_est) / g.omega_est;
  return {g.fitted_rate > 0.0 && rel <= 0.2 && std::abs(k.gamma_inf - 1.0) <= 1e-6,
          fmt("rate %.4f vs gap estimate %.4f (%.1f%%), kernel data gamma = %.10f", g.fitted_rate,
              g.omega_est, 100 * rel, k.gamma_inf)};
}

Outcome critical_spacing_check() {
  const Profile& f = front0();
  const Segment front = truncate_profile(f, 2e-3), back = truncate_profile(back_from_front(f), 2e-3);
  CriticalSpacingOptions o;
  const CriticalSpacing one = critical_spacing(front, back, 4.0, 16.0, 1, o);
  const double re7 = spacing_max_re(front, back, 7.0, 1, o);
  const double re14 = spacing_max_re(front, back, 14.0, 1, o);
  const CriticalSpacing two_eq = critical_spacing(front, back, 16.0, 32.0, 2, o);
  CriticalSpacingOptions sg = o;
  sg.allocation = Allocation::SingleGap;
  const CriticalSpacing two_sg = critical_spacing(front, back, 16.0, 32.0, 2, sg);
  const double re3 = spacing_max_re(front, back, 33.1, 3, sg);

  const Segment f3 = truncate_profile(f, 1e-3), b3 = truncate_profile(back_from_front(f), 1e-3);
  const CriticalSpacing tight = critical_spacing(f3, b3, 4.0, 16.0, 1, o);

  const double X = one.total;
  const bool pass = std::abs(X - 11.7) <= 0.5 && re7 < o.stability_tol && re14 > o.stability_tol &&
                    std::abs(two_eq.total - 2 * X) <= 1.0 && std::abs(two_sg.total - 2 * X) <= 1.0 &&
                    re3 < o.stability_tol;
  return {pass,
          fmt("truncation 2e-3: critical %.3f, max_re %.1e at 7 and %.1e at 14, two pairs %.3f (equal) "
              "%.3f (single gap), three pairs at 33.1 max_re %.1e; truncation 1e-3 gives %.3f",
              X, re7, re14, two_eq.total, two_sg.total, re3, tight.total)};
}

Outcome periodic_refinement() {
  const Profile& f = front0();
  const Segment front = truncate_profile(f, 2e-3), back = truncate_profile(back_from_front(f), 2e-3);
  const PeriodicPattern seed = periodize(build_cell_block(front, back, {0.0, 0.0}, 1));
  const RefinedPattern r = refine_periodic_bvp(seed);
  return {r.residual < 1e-8 && r.sup_distance < 0.1,
          fmt("residual %.2e, sup distance to seed %.2e, %d Newton iterations", r.residual, r.sup_distance,
              r.newton_iterations)};
}

}  // namespace

int main() {
  criterion(1, "front speed", front_speed);
  criterion(2, "speed table", speed_table);
  criterion(3, "front/back symmetry", symmetry);
  criterion(4, "critical mu", mu_star);
  criterion(5, "weight criterion", weight_criterion);
  criterion(6, "energy bound radii", energy_radius);
  criterion(7, "Evans zero at origin", evans_origin);
  criterion(8, "Evans global count", evans_sweep);
  criterion(9, "constant-coefficient oracle", constant_oracle);
  criterion(10, "evolution invariants", evolution_invariants);
  criterion(11, "perturbed front", perturbed_front);
  criterion(12, "linear decay", linear_decay);
  criterion(13, "critical spacing", critical_spacing_check);
  criterion(14, "periodic refinement", periodic_refinement);
  std::printf("%d failed, %d known deviations\n", failures, deviations);
  return failures == 0 ? 0 : 1;
}
