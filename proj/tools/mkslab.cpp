#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mkslab/error.hpp"
#include "mkslab/essential.hpp"
#include "mkslab/evolution.hpp"
#include "mkslab/io.hpp"
#include "mkslab/parallel.hpp"
#include "mkslab/periodic.hpp"
#include "mkslab/point_spectrum.hpp"
#include "mkslab/profile.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace mkslab;

namespace {

struct Common {
  std::string out = "out";
  std::string format = "csv";
  bool quiet = false;
};

Common g;

fs::path out_path(const std::string& name) { return fs::path(g.out) / name; }

void emit_summary(const std::string& name, const Json& j) {
  write_file(out_path(name), j.dump(2) + "\n");
  if (!g.quiet) std::cout << j.dump(2) << "\n";
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void save_profile(const Profile& p, const std::string& stem) {
  if (g.format == "binary") {
    write_file(out_path(stem + ".bin"), profile_to_binary(p));
  } else {
    write_file(out_path(stem + ".csv"), profile_to_csv(p));
  }
}

void save_pattern(const PeriodicPattern& p, const std::string& stem) {
  if (g.format == "binary") {
    write_file(out_path(stem + ".bin"), pattern_to_binary(p));
  } else {
    write_file(out_path(stem + ".csv"), pattern_to_csv(p));
  }
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.3f", v);
  return buf;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

CollocationOptions collocation(double L, int N) {
  CollocationOptions co;
  co.L = L;
  co.N = N;
  return co;
}

// The speed at mu = 0 seeds shooting; other mu values are reached by continuation.
constexpr double kSpeedGuess = -2.388;

// Reference half-disk radii for the sweep mu = -1, -0.9, ..., 0.2 at a = 0.3.
const std::vector<double> kSweepRadii{16.39, 15.91, 15.4,  14.87, 14.29, 13.67, 13.0,
                                      12.27, 11.46, 10.55, 9.39,  7.98,  6.11};

Profile front_at(double mu, double L, int N) {
  const Profile p0 = compute_front(0.0, kSpeedGuess, collocation(L, N));
  if (mu == 0.0) return p0;
  ContinuationOptions copt;
  copt.collocation = collocation(L, N);
  const std::vector<double> grid{mu};
  const ContinuationResult r = continue_in_mu(grid, p0, copt);
  for (const auto& p : r.profiles) {
    if (std::abs(p.mu - mu) < 1e-12) return p;
  }
  fail(ErrorCode::ContinuationTerminated,
       "no front at mu = " + csv_number(mu) + " (" + r.diagnostics + ")");
}

Plot profile_plot(const Profile& p) {
  Plot pl;
  pl.title = to_string(p.kind) + " profile, mu = " + csv_number(p.mu) + ", s = " + csv_number(p.s);
  pl.x_label = "z";
  pl.y_label = "phi(z)";
  pl.series.push_back({"phi", to_vec(p.z), to_vec(p.phi), PlotStyle::Line});
  return pl;
}

std::string curve_csv(const std::vector<double>& k, const std::vector<cdouble>& v) {
  std::string out = "k,re,im\n";
  for (std::size_t i = 0; i < k.size(); ++i) {
    out += csv_number(k[i]) + "," + csv_number(v[i].real()) + "," + csv_number(v[i].imag()) + "\n";
  }
  return out;
}

PlotSeries complex_series(const std::string& name, const std::vector<cdouble>& v, PlotStyle st) {
  PlotSeries s{name, {}, {}, st};
  for (const cdouble& z : v) {
    s.x.push_back(z.real());
    s.y.push_back(z.imag());
  }
  return s;
}

// ------------------------------------------------------------------- front

struct FrontArgs {
  double mu = 0.0;
  double L = 40.0;
  int N = 800;
};

int run_front(const FrontArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const Profile p = front_at(a.mu, a.L, a.N);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_profile(p, "front_mu" + tag(a.mu));
  write_file(out_path("front_mu" + tag(a.mu) + ".svg"), emit_plot(profile_plot(p)));
  emit_summary("front_mu" + tag(a.mu) + ".json",
               {{"mu", p.mu}, {"s", p.s}, {"L", p.L}, {"N", p.N}, {"phi_minus", p.phi_minus},
                {"phi_plus", p.phi_plus}, {"a_plus", p.a_plus}, {"residual", p.residual},
                {"seconds", secs}});
  return 0;
}

// ------------------------------------------------------------ continuation

struct ContinueArgs {
  std::vector<double> mu{-1.0, -0.9, -0.8, -0.7, -0.6, -0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2};
  double L = 40.0;
  int N = 800;
  double max_step = 0.1;
  bool save_profiles = false;
};

int run_continue(const ContinueArgs& a) {
  const Profile seed = compute_front(0.0, kSpeedGuess, collocation(a.L, a.N));
  ContinuationOptions copt;
  copt.collocation = collocation(a.L, a.N);
  copt.max_step = a.max_step;
  const ContinuationResult r = continue_in_mu(a.mu, seed, copt);
  std::string csv = "mu,s,phi_minus,phi_plus,existence_margin,residual\n";
  Json rows = Json::array();
  PlotSeries curve{"s(mu)", {}, {}, PlotStyle::Line};
  for (const auto& p : r.profiles) {
    csv += csv_number(p.mu) + "," + csv_number(p.s) + "," + csv_number(p.phi_minus) + "," +
           csv_number(p.phi_plus) + "," + csv_number(existence_margin(p)) + "," +
           csv_number(p.residual) + "\n";
    rows.push_back({{"mu", p.mu}, {"s", p.s}});
    curve.x.push_back(p.mu);
    curve.y.push_back(p.s);
    if (a.save_profiles) save_profile(p, "front_mu" + tag(p.mu));
  }
  write_file(out_path("continuation.csv"), csv);
  Plot pl{"front speed along the family", "mu", "s", {curve}};
  write_file(out_path("continuation.svg"), emit_plot(pl));
  emit_summary("continuation.json", {{"rows", rows},
                                     {"terminated", r.terminated},
                                     {"last_mu", r.last_mu},
                                     {"diagnostics", r.diagnostics},
                                     {"L", a.L},
                                     {"N", a.N}});
  return r.terminated && r.profiles.size() < a.mu.size() ? 1 : 0;
}

// ----------------------------------------------------------------- ess-spec

struct EssArgs {
  double mu = 0.0;
  std::vector<double> a{0.0, 0.3};
  double L = 40.0;
  int N = 800;
  bool mu_star = false;
  double mu_star_L = 80.0;
  int mu_star_N = 1600;
};

int run_ess(const EssArgs& a) {
  const Profile p = front_at(a.mu, a.L, a.N);
  const std::vector<double> k = default_k_grid();
  Json borders = Json::array();
  for (double w : a.a) {
    const FredholmBorders fb = fredholm_borders(p, w, k);
    write_file(out_path("border_minus_a" + tag(w) + ".csv"), curve_csv(k, fb.minus.values));
    write_file(out_path("border_plus_a" + tag(w) + ".csv"), curve_csv(k, fb.plus.values));
    Plot pl{"Fredholm borders, mu = " + csv_number(a.mu) + ", a = " + csv_number(w), "Re lambda",
            "Im lambda",
            {complex_series("phi_-", fb.minus.values, PlotStyle::Line),
             complex_series("phi_+", fb.plus.values, PlotStyle::Line)}};
    write_file(out_path("border_a" + tag(w) + ".svg"), emit_plot(pl));
    borders.push_back({{"a", w}, {"max_re", fb.max_re}, {"coincide", fb.coincide}});
  }
  const double phi_sq = std::min(p.phi_minus * p.phi_minus, p.phi_plus * p.phi_plus);
  const WeightWindow win = weight_interval(p.s, phi_sq);
  const CriticalSpeed cs = critical_speed_sstar();
  Json j{{"mu", p.mu},
         {"s", p.s},
         {"borders", borders},
         {"weight_window", {{"admissible", win.admissible}, {"a_min", win.a_min}, {"a_max", win.a_max}}},
         {"s_star", cs.s_star},
         {"a_star", cs.a_star},
         {"min_rhs", cs.min_rhs},
         {"s_star_reference", cs.reference},
         {"s_star_discrepancy", cs.discrepancy}};
  if (a.mu_star) {
    const Profile seed = compute_front(0.0, kSpeedGuess, collocation(a.mu_star_L, a.mu_star_N));
    ContinuationOptions copt;
    copt.collocation = collocation(a.mu_star_L, a.mu_star_N);
    // The family ends before 0.3; the marching path records its approach.
    const std::vector<double> grid{0.1, 0.2, 0.3};
    const ContinuationResult r = continue_in_mu(grid, seed, copt);
    const CriticalMu cm = critical_mu_star(r.path);
    j["mu_star"] = {{"value", cm.mu_star},
                    {"method", cm.method == CriticalMuMethod::Fold ? "fold" : "sign-change"},
                    {"last_mu", cm.last_mu},
                    {"last_margin", cm.last_margin}};
  }
  emit_summary("ess_spec.json", j);
  return 0;
}

// ------------------------------------------------------------------- bounds

struct BoundsArgs {
  std::vector<double> mu{0.0};
  double a = 0.3;
  double eta = 0.01;
  double L = 40.0;
  int N = 800;
};

int run_bounds(const BoundsArgs& a) {
  const Profile seed = compute_front(0.0, kSpeedGuess, collocation(a.L, a.N));
  ContinuationOptions copt;
  copt.collocation = collocation(a.L, a.N);
  const ContinuationResult r = continue_in_mu(a.mu, seed, copt);
  Json rows = Json::array();
  std::string csv = "mu,s,bound_re,bound_re_plus_abs_im,re_bound,re_plus_abs_im_bound,R\n";
  for (const auto& p : r.profiles) {
    const EnergyBound b = energy_bounds(p, a.a, a.eta);
    rows.push_back({{"mu", p.mu},
                    {"s", p.s},
                    {"bound_re", b.bound_re},
                    {"bound_re_plus_abs_im",
                     b.second_applicable ? Json(b.bound_re_plus_abs_im) : Json(nullptr)},
                    {"second_applicable", b.second_applicable},
                    {"re_bound", b.re_bound},
                    {"re_plus_abs_im_bound", b.re_plus_abs_im_bound},
                    {"R", b.R}});
    csv += csv_number(p.mu) + "," + csv_number(p.s) + "," + csv_number(b.bound_re) + "," +
           csv_number(b.bound_re_plus_abs_im) + "," + csv_number(b.re_bound) + "," +
           csv_number(b.re_plus_abs_im_bound) + "," + csv_number(b.R) + "\n";
  }
  write_file(out_path("bounds.csv"), csv);
  emit_summary("bounds.json", {{"a", a.a}, {"eta", a.eta}, {"rows", rows}});
  return 0;
}

// -------------------------------------------------------------------- evans

struct EvansArgs {
  std::vector<double> mu{0.0};
  std::vector<double> R;  // per mu; empty or 0 takes the energy bound
  double a = 0.3;
  double eta = 0.01;
  double L = 40.0;
  int N = 800;
};

std::string evans_csv(const EvansResult& r) {
  std::string out = "re_lambda,im_lambda,re_D,im_D\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    out += csv_number(r.contour[i].real()) + "," + csv_number(r.contour[i].imag()) + "," +
           csv_number(r.values[i].real()) + "," + csv_number(r.values[i].imag()) + "\n";
  }
  return out;
}

int run_evans(const EvansArgs& a) {
  if (!a.R.empty() && a.R.size() != a.mu.size()) {
    fail(ErrorCode::InvalidArgument, "--R needs one radius per --mu value");
  }
  const Profile seed = compute_front(0.0, kSpeedGuess, collocation(a.L, a.N));
  ContinuationOptions copt;
  copt.collocation = collocation(a.L, a.N);
  const ContinuationResult family = continue_in_mu(a.mu, seed, copt);
  Json rows = Json::array();
  bool all_pass = true;
  for (std::size_t i = 0; i < a.mu.size(); ++i) {
    const auto it = std::find_if(family.profiles.begin(), family.profiles.end(),
                                 [&](const Profile& p) { return std::abs(p.mu - a.mu[i]) < 1e-12; });
    if (it == family.profiles.end()) {
      fail(ErrorCode::ContinuationTerminated, "no front at mu = " + csv_number(a.mu[i]));
    }
    ObservationOptions o;
    o.eta = a.eta;
    o.R = a.R.empty() ? 0.0 : a.R[i];
    const ObservationReport rep = verify_numerical_observation(*it, a.a, o);
    const std::string stem = "evans_mu" + tag(a.mu[i]);
    write_file(out_path(stem + "_boundary.csv"), evans_csv(rep.total));
    write_file(out_path(stem + "_origin.csv"), evans_csv(rep.origin));
    Plot img{"Evans function image of the boundary, mu = " + csv_number(a.mu[i]), "Re D", "Im D",
             {complex_series("D(boundary)", rep.total.values, PlotStyle::Line)}};
    write_file(out_path(stem + "_boundary.svg"), emit_plot(img));
    Plot org{"Evans function image of the origin circle", "Re D", "Im D",
             {complex_series("D(circle)", rep.origin.values, PlotStyle::Line)}};
    write_file(out_path(stem + "_origin.svg"), emit_plot(org));
    const Json row{{"mu", rep.mu},
                   {"s", rep.s},
                   {"a", rep.a},
                   {"eta", rep.eta},
                   {"R", rep.R},
                   {"winding_total", rep.winding_total},
                   {"winding_origin", rep.winding_origin},
                   {"pass", rep.pass}};
    write_file(out_path(stem + ".json"), row.dump(2) + "\n");
    rows.push_back(row);
    all_pass = all_pass && rep.pass;
  }
  emit_summary("evans.json", {{"rows", rows}, {"pass", all_pass}});
  return all_pass ? 0 : 1;
}

// ------------------------------------------------------------------- evolve

struct EvolveArgs {
  double mu = 0.0;
  double amplitude = 0.01;
  double center = 10.0;
  double width = 1.0;
  double z_lo = -100.0;
  double z_hi = 100.0;
  double dz = 0.1;
  double dt = 0.01;
  double T = 10.0;
  double a = 0.3;
  double record_every = 0.5;
  int frames = 6;
};

int run_evolve(const EvolveArgs& a) {
  CollocationOptions co = collocation(40.0, 1600);
  const Profile p = a.mu == 0.0 ? compute_front(0.0, kSpeedGuess, co) : front_at(a.mu, 40.0, 800);
  PerturbationOptions o;
  o.z_lo = a.z_lo;
  o.z_hi = a.z_hi;
  o.dz = a.dz;
  o.dt = a.dt;
  o.T = a.T;
  o.weight_a = a.a;
  o.record_every = a.record_every;
  const PerturbationReport rep = perturbation_experiment(p, {a.center, a.width, a.amplitude}, o);
  std::string csv = "t,phase_shift,weighted_norm,weighted_aligned,linf,packet_linf\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    csv += csv_number(rep.times[i]) + "," + csv_number(rep.phase_shift[i]) + "," +
           csv_number(rep.weighted_norm[i]) + "," + csv_number(rep.weighted_aligned[i]) + "," +
           csv_number(rep.linf[i]) + "," + csv_number(rep.packet_linf[i]) + "\n";
  }
  write_file(out_path("evolve_history.csv"), csv);

  // Frames: evenly spaced snapshots, one CSV each, plus a filmstrip.
  const auto& snaps = rep.evolution.snapshots;
  Json frames = Json::array();
  Plot film{"perturbed front, mu = " + csv_number(a.mu), "z", "p(z, t)", {}};
  const int nf = std::max(2, a.frames);
  for (int f = 0; f < nf; ++f) {
    const std::size_t i = (snaps.size() - 1) * static_cast<std::size_t>(f) / static_cast<std::size_t>(nf - 1);
    const EvolutionState& st = snaps[i];
    std::string fc = "z,p\n";
    for (Eigen::Index j = 0; j < st.z.size(); ++j) fc += csv_number(st.z[j]) + "," + csv_number(st.p[j]) + "\n";
    const std::string name = "evolve_frame" + std::to_string(f) + ".csv";
    write_file(out_path(name), fc);
    frames.push_back({{"t", st.t}, {"file", name}});
    film.series.push_back({"t = " + csv_number(st.t), to_vec(st.z), to_vec(st.p), PlotStyle::Line});
  }
  write_file(out_path("evolve_filmstrip.svg"), emit_plot(film));
  Plot norms{"weighted norm of the perturbation", "t", "||e^{az} v||", {}};
  norms.series.push_back({"unaligned", rep.times, rep.weighted_norm, PlotStyle::Line});
  norms.series.push_back({"aligned", rep.times, rep.weighted_aligned, PlotStyle::Line});
  write_file(out_path("evolve_norms.svg"), emit_plot(norms));
  emit_summary("evolve.json", {{"mu", a.mu},
                               {"s_discrete", rep.s_discrete},
                               {"amplitude", a.amplitude},
                               {"center", a.center},
                               {"width", a.width},
                               {"domain", {a.z_lo, a.z_hi}},
                               {"dz", a.dz},
                               {"dt", a.dt},
                               {"T", a.T},
                               {"a", a.a},
                               {"saturation", rep.saturation},
                               {"final_phase_shift", rep.phase_shift.back()},
                               {"initial_weighted_aligned", rep.weighted_aligned.front()},
                               {"final_weighted_aligned", rep.weighted_aligned.back()},
                               {"frames", frames}});
  return 0;
}

// ------------------------------------------------------------- linear decay

struct LinearArgs {
  double a = 0.3;
  int n = 512;
  double T = 20.0;
  double dt = 0.01;
  std::string init = "gaussian";
};

int run_linear(const LinearArgs& a) {
  const Profile p = compute_front(0.0, kSpeedGuess, collocation(40.0, 1600));
  LinearDecayOptions o;
  o.n = a.n;
  o.T = a.T;
  o.dt = a.dt;
  LinearDecayReport rep;
  if (a.init == "kernel") {
    const WeightedOperator W = weighted_operator(p, a.a, a.n, p.L);
    rep = linear_weighted_evolve(p, a.a, weighted_derivative(p, a.a, W.z), o);
  } else if (a.init == "gaussian") {
    rep = linear_weighted_evolve(
        p, a.a,
        [](double z) { return std::exp(-(z - 3) * (z - 3)) - 0.5 * std::exp(-(z + 4) * (z + 4) / 2); }, o);
  } else {
    fail(ErrorCode::InvalidArgument, "--init must be 'kernel' or 'gaussian'");
  }
  std::string csv = "t,residual\n";
  PlotSeries s{"residual", {}, {}, PlotStyle::Line};
  for (const auto& [t, r] : rep.residual_history) {
    csv += csv_number(t) + "," + csv_number(r) + "\n";
    if (r > 0.0) {
      s.x.push_back(t);
      s.y.push_back(std::log10(r));
    }
  }
  write_file(out_path("linear_decay.csv"), csv);
  if (!s.x.empty()) {
    write_file(out_path("linear_decay.svg"),
               emit_plot({"decay of w - gamma e^{az} phi'", "t", "log10 residual", {s}}));
  }
  emit_summary("linear_decay.json", {{"a", rep.a},
                                     {"init", a.init},
                                     {"gamma_inf", rep.gamma_inf},
                                     {"fitted_rate", rep.fitted_rate},
                                     {"omega_est", rep.omega_est},
                                     {"kernel_eigenvalue", rep.kernel_eigenvalue},
                                     {"pass", rep.pass}});
  return 0;
}

// ----------------------------------------------------------------- periodic

struct PeriodicArgs {
  double truncation = 2e-3;
  int pairs = 1;
  std::vector<double> spacings;
  double total = 7.0;
  std::string allocation = "equal";
  double dz = 0.05;
  double blend = 0.0;
  int N = 64;
  int M = 64;
  double lo = 4.0;
  double hi = 16.0;
  std::string pattern;
  double stab_T = 40.0;
  double stab_amplitude = 0.01;
};

struct Segments {
  Segment front;
  Segment back;
};

Segments segments(double tol) {
  const Profile f = compute_front(0.0, kSpeedGuess);
  return {truncate_profile(f, tol), truncate_profile(back_from_front(f), tol)};
}

PeriodicPattern build_pattern(const PeriodicArgs& a) {
  if (!a.pattern.empty()) return load_pattern(a.pattern);
  const Segments sg = segments(a.truncation);
  const std::vector<double> sp =
      a.spacings.empty() ? allocate_spacing(a.total, a.pairs, allocation_from_string(a.allocation))
                         : a.spacings;
  PeriodizeOptions po;
  po.dz = a.dz;
  po.blend_width = a.blend;
  return periodize(build_cell_block(sg.front, sg.back, sp, a.pairs), po);
}

Json pattern_json(const PeriodicPattern& p) {
  return {{"X", p.X}, {"s", p.s}, {"mu", p.mu}, {"total_spacing", p.total_spacing},
          {"layout", p.layout}, {"points", p.z.size()}, {"blend_width", p.blend_width}};
}

Plot pattern_plot(const PeriodicPattern& p, const std::string& title) {
  return {title, "z", "Phi(z)", {{"Phi", to_vec(p.z), to_vec(p.phi), PlotStyle::Line}}};
}

int run_periodic_build(const PeriodicArgs& a) {
  const PeriodicPattern p = build_pattern(a);
  save_pattern(p, "pattern");
  write_file(out_path("pattern.svg"), emit_plot(pattern_plot(p, "periodic pattern")));
  Json j = pattern_json(p);
  j["truncation"] = a.truncation;
  emit_summary("pattern.json", j);
  return 0;
}

int run_periodic_hill(const PeriodicArgs& a) {
  const PeriodicPattern p = build_pattern(a);
  HillOptions ho;
  ho.N = a.N;
  ho.M = a.M;
  const HillSpectrum h = hill_spectrum(p, ho);
  write_file(out_path("hill.csv"), hill_to_csv(h));
  std::vector<cdouble> all;
  for (const auto& slice : h.eigenvalues) {
    for (const cdouble& v : slice) {
      if (v.real() > -1.0) all.push_back(v);  // the window near the imaginary axis
    }
  }
  write_file(out_path("hill.svg"),
             emit_plot({"Hill spectrum, total spacing " + csv_number(p.total_spacing), "Re lambda",
                        "Im lambda", {complex_series("lambda", all, PlotStyle::Scatter)}}));
  Json j = pattern_json(p);
  j["truncation"] = a.truncation;
  j["N"] = h.modes;
  j["M"] = a.M;
  j["max_re"] = h.max_re;
  j["max_re_xi"] = h.max_re_xi;
  j["coefficient_tail"] = h.coefficient_tail;
  emit_summary("hill.json", j);
  return 0;
}

int run_periodic_critical(const PeriodicArgs& a) {
  const Segments sg = segments(a.truncation);
  CriticalSpacingOptions o;
  o.allocation = allocation_from_string(a.allocation);
  o.periodize.dz = a.dz;
  o.periodize.blend_width = a.blend;
  const CriticalSpacing c = critical_spacing(sg.front, sg.back, a.lo, a.hi, a.pairs, o);
  emit_summary("critical_spacing.json", {{"pairs", a.pairs},
                                         {"allocation", a.allocation},
                                         {"truncation", a.truncation},
                                         {"critical_total", c.total},
                                         {"per_pair", c.total / a.pairs},
                                         {"stable_total", c.lo},
                                         {"unstable_total", c.hi},
                                         {"max_re_stable", c.max_re_lo},
                                         {"max_re_unstable", c.max_re_hi},
                                         {"iterations", c.iterations}});
  return 0;
}

int run_periodic_refine(const PeriodicArgs& a) {
  const PeriodicPattern p = build_pattern(a);
  const RefinedPattern r = refine_periodic_bvp(p);
  save_pattern(r.pattern, "pattern_refined");
  Plot pl = pattern_plot(p, "ad-hoc pattern and periodic solution");
  pl.series.front().name = "ad-hoc";
  pl.series.push_back({"periodic solution", to_vec(r.pattern.z), to_vec(r.pattern.phi), PlotStyle::Line});
  write_file(out_path("pattern_refined.svg"), emit_plot(pl));
  Json j = pattern_json(p);
  j["truncation"] = a.truncation;
  j["refined_mu"] = r.mu;
  j["refined_s"] = r.pattern.s;
  j["residual"] = r.residual;
  j["sup_distance"] = r.sup_distance;
  j["newton_iterations"] = r.newton_iterations;
  emit_summary("pattern_refined.json", j);
  return 0;
}

int run_periodic_stabilize(const PeriodicArgs& a) {
  const PeriodicPattern p = build_pattern(a);
  StabilizationOptions o;
  o.T = a.stab_T;
  o.amplitude = a.stab_amplitude;
  o.center = p.layer_centers.empty() ? 0.0 : p.layer_centers.back() + 8.0;
  const StabilizationReport r = stabilization_experiment(p, o);
  std::string csv = "t,deviation";
  for (std::size_t k = 0; k < r.layer_centers.size(); ++k) csv += ",shift" + std::to_string(k);
  csv += "\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    csv += csv_number(r.times[i]) + "," + csv_number(r.deviation[i]);
    for (double s : r.shifts[i]) csv += "," + csv_number(s);
    csv += "\n";
  }
  write_file(out_path("stabilization.csv"), csv);
  Json j = pattern_json(p);
  j["s_discrete"] = r.s_discrete;
  j["initial_deviation"] = r.deviation.front();
  j["final_deviation"] = r.deviation.back();
  j["final_shifts"] = r.shifts.back();
  j["decaying"] = r.decaying;
  emit_summary("stabilization.json", j);
  return 0;
}

// ---------------------------------------------------------------- reproduce

int run_reproduce(bool quick) {
  const fs::path root = g.out;
  auto in = [&](const std::string& sub) { g.out = (root / sub).string(); };
  int status = 0;
  in("front");
  status |= run_front({});
  in("continuation");
  ContinueArgs ca;
  ca.save_profiles = true;
  status |= run_continue(ca);
  in("essential");
  EssArgs ea;
  ea.mu_star = !quick;
  status |= run_ess(ea);
  in("bounds");
  BoundsArgs ba;
  ba.mu = ca.mu;
  status |= run_bounds(ba);
  in("evans");
  EvansArgs va;
  if (quick) {
    va.mu = {0.0};
    va.R = {9.39};
  } else {
    va.mu = ca.mu;
    va.R = kSweepRadii;
  }
  status |= run_evans(va);
  in("evolve");
  EvolveArgs ev;
  if (!quick) {
    ev.z_lo = -400.0;
    ev.z_hi = 50.0;
    ev.T = 60.0;
    ev.record_every = 1.0;
  }
  status |= run_evolve(ev);
  in("linear");
  status |= run_linear({});
  in("periodic");
  PeriodicArgs pa;
  pa.pattern.clear();
  for (double total : {7.0, 11.7, 14.0}) {
    pa.total = total;
    in("periodic/hill_total" + tag(total));
    status |= run_periodic_hill(pa);
  }
  in("periodic/critical");
  status |= run_periodic_critical(pa);
  in("periodic/refine");
  pa.total = 0.0;
  status |= run_periodic_refine(pa);
  in("periodic/stabilize");
  status |= run_periodic_stabilize(pa);
  g.out = root.string();
  return status;
}

int error_exit(int code, const std::string& kind, const std::string& message) {
  Json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traveling fronts of a convective Cahn-Hilliard type equation: profiles, spectra, "
               "evolution and periodic patterns"};
  app.set_config("--config", "", "INI file with [subcommand] sections");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Profile/pattern file format")
      ->check(CLI::IsMember({"csv", "binary"}))
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Do not echo summaries to stdout");
  app.require_subcommand(1);

  FrontArgs fa;
  auto* front = app.add_subcommand("front", "Shoot and collocate a front");
  front->add_option("--mu", fa.mu)->capture_default_str();
  front->add_option("--L", fa.L, "Half-length of the domain")->capture_default_str();
  front->add_option("--N", fa.N, "Mesh intervals per half-line")->capture_default_str();

  ContinueArgs ca;
  auto* cont = app.add_subcommand("continue", "Continue the front family in mu");
  cont->add_option("--mu", ca.mu, "Target mu values")->capture_default_str();
  cont->add_option("--L", ca.L)->capture_default_str();
  cont->add_option("--N", ca.N)->capture_default_str();
  cont->add_option("--max-step", ca.max_step)->capture_default_str();
  cont->add_flag("--save-profiles", ca.save_profiles);

  EssArgs ea;
  auto* ess = app.add_subcommand("ess-spec", "Essential spectrum, weight windows, s*, mu*");
  ess->add_option("--mu", ea.mu)->capture_default_str();
  ess->add_option("--a", ea.a, "Weights for the Fredholm borders")->capture_default_str();
  ess->add_option("--L", ea.L)->capture_default_str();
  ess->add_option("--N", ea.N)->capture_default_str();
  ess->add_flag("--mu-star", ea.mu_star, "Also locate mu* by continuation");
  ess->add_option("--mu-star-L", ea.mu_star_L)->capture_default_str();
  ess->add_option("--mu-star-N", ea.mu_star_N)->capture_default_str();

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Energy bounds on the point spectrum");
  bounds->add_option("--mu", ba.mu)->capture_default_str();
  bounds->add_option("--a", ba.a)->capture_default_str();
  bounds->add_option("--eta", ba.eta)->capture_default_str();

  EvansArgs va;
  auto* evans = app.add_subcommand("evans", "Evans function winding numbers");
  evans->add_option("--mu", va.mu)->capture_default_str();
  evans->add_option("--a", va.a)->capture_default_str();
  evans->add_option("--eta", va.eta)->capture_default_str();
  evans->add_option("--R", va.R, "Half-disk radius per mu; omitted or 0 takes the energy bound");

  EvolveArgs ev;
  auto* evolve_cmd = app.add_subcommand("evolve", "Time evolution of a perturbed front");
  evolve_cmd->add_option("--mu", ev.mu)->capture_default_str();
  evolve_cmd->add_option("--amplitude", ev.amplitude)->capture_default_str();
  evolve_cmd->add_option("--center", ev.center)->capture_default_str();
  evolve_cmd->add_option("--width", ev.width)->capture_default_str();
  evolve_cmd->add_option("--z-lo", ev.z_lo)->capture_default_str();
  evolve_cmd->add_option("--z-hi", ev.z_hi)->capture_default_str();
  evolve_cmd->add_option("--dz", ev.dz)->capture_default_str();
  evolve_cmd->add_option("--dt", ev.dt)->capture_default_str();
  evolve_cmd->add_option("--T", ev.T)->capture_default_str();
  evolve_cmd->add_option("--a", ev.a, "Weight of the diagnostic norm")->capture_default_str();
  evolve_cmd->add_option("--record-every", ev.record_every)->capture_default_str();
  evolve_cmd->add_option("--frames", ev.frames)->capture_default_str();

  LinearArgs la;
  auto* linear = app.add_subcommand("linear-decay", "Weighted linearized evolution");
  linear->add_option("--a", la.a)->capture_default_str();
  linear->add_option("--n", la.n, "Fourier nodes")->capture_default_str();
  linear->add_option("--T", la.T)->capture_default_str();
  linear->add_option("--dt", la.dt)->capture_default_str();
  linear->add_option("--init", la.init)->check(CLI::IsMember({"kernel", "gaussian"}))->capture_default_str();

  PeriodicArgs pa;
  auto* periodic = app.add_subcommand("periodic", "Ad-hoc periodic patterns and Hill spectra");
  periodic->require_subcommand(1);
  auto pattern_opts = [&](CLI::App* c) {
    c->add_option("--truncation", pa.truncation, "Segment truncation tolerance")->capture_default_str();
    c->add_option("--pairs", pa.pairs)->capture_default_str();
    c->add_option("--spacings", pa.spacings, "Explicit spacer lengths A1 C1 A2 C2 ...");
    c->add_option("--total", pa.total, "Total spacing")->capture_default_str();
    c->add_option("--allocation", pa.allocation)
        ->check(CLI::IsMember({"equal", "single-gap"}))
        ->capture_default_str();
    c->add_option("--dz", pa.dz)->capture_default_str();
    c->add_option("--blend", pa.blend, "Junction blend width")->capture_default_str();
    c->add_option("--pattern", pa.pattern, "Read the pattern from a file instead");
  };
  auto* p_build = periodic->add_subcommand("build", "Build and periodize a cell block");
  pattern_opts(p_build);
  auto* p_hill = periodic->add_subcommand("hill", "Hill spectrum of a pattern");
  pattern_opts(p_hill);
  p_hill->add_option("--N", pa.N)->capture_default_str();
  p_hill->add_option("--M", pa.M)->capture_default_str();
  auto* p_crit = periodic->add_subcommand("critical-spacing", "Bisect the critical total spacing");
  pattern_opts(p_crit);
  p_crit->add_option("--lo", pa.lo)->capture_default_str();
  p_crit->add_option("--hi", pa.hi)->capture_default_str();
  auto* p_refine = periodic->add_subcommand("refine", "Exact periodic solution near a pattern");
  pattern_opts(p_refine);
  auto* p_stab = periodic->add_subcommand("stabilize", "Evolve a perturbed pattern");
  pattern_opts(p_stab);
  p_stab->add_option("--T", pa.stab_T)->capture_default_str();
  p_stab->add_option("--amplitude", pa.stab_amplitude)->capture_default_str();

  bool quick = false;
  auto* reproduce = app.add_subcommand("reproduce", "Run the full experiment suite into --out");
  reproduce->add_flag("--quick", quick, "Short evolution run, skip the mu* continuation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error_exit(2, "bad-arguments", e.what());
  }

  try {
    if (*front) return run_front(fa);
    if (*cont) return run_continue(ca);
    if (*ess) return run_ess(ea);
    if (*bounds) return run_bounds(ba);
    if (*evans) return run_evans(va);
    if (*evolve_cmd) return run_evolve(ev);
    if (*linear) return run_linear(la);
    if (*p_build) return run_periodic_build(pa);
    if (*p_hill) return run_periodic_hill(pa);
    if (*p_crit) return run_periodic_critical(pa);
    if (*p_refine) return run_periodic_refine(pa);
    if (*p_stab) return run_periodic_stabilize(pa);
    if (*reproduce) return run_reproduce(quick);
  } catch (const Error& e) {
    const bool bad_input = e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ParseError;
    return error_exit(bad_input ? 2 : 1, std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return error_exit(1, "internal", e.what());
  }
  return 2;
}
