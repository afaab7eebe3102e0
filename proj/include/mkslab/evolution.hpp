#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mkslab/profile.hpp"
#include "mkslab/tolerances.hpp"

namespace mkslab {

enum class Boundary { Periodic, Clamped };

/// Solution of p_t = s p_z - p_zz - p_zzzz + (p^3)_z on a uniform grid.
struct EvolutionState {
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  double t = 0.0;
  double s = 0.0;

  double dz() const { return z.size() > 1 ? z[1] - z[0] : 0.0; }
  /// Trapezoid rule; on a periodic grid every node carries weight dz.
  double mass(Boundary bc) const;
};

/// Second-order centred differences of the right-hand side. Clamped
/// boundaries use two ghost nodes per side pinned to `left` and `right`.
class SpatialOperator {
 public:
  SpatialOperator(Eigen::Index n, double dz, double s, Boundary bc, double left = 0.0,
                  double right = 0.0);

  Eigen::VectorXd apply(const Eigen::VectorXd& p) const;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& p) const;
  /// d apply / d s
  Eigen::VectorXd speed_derivative(const Eigen::VectorXd& p) const;

  Eigen::Index size() const { return n_; }
  double speed() const { return s_; }
  Boundary boundary() const { return bc_; }
  void set_ends(double left, double right) {
    left_ = left;
    right_ = right;
  }

 private:
  double at(const Eigen::VectorXd& p, Eigen::Index j) const;
  Eigen::Index n_;
  double dz_;
  double s_;
  Boundary bc_;
  double left_;
  double right_;
};

/// Crank-Nicolson residual p - p_old - dt/2 (N(p) + N(p_old)) and its Jacobian.
Eigen::VectorXd cn_residual(const SpatialOperator& op, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& p_old, double dt);
Eigen::SparseMatrix<double> cn_jacobian(const SpatialOperator& op, const Eigen::VectorXd& p,
                                        double dt);

struct StepDiagnostics {
  double t = 0.0;
  double mass = 0.0;
  double linf = 0.0;           // max |p - reference| (or max |p| without one)
  double weighted_norm = 0.0;  // ||e^{a z} (p - reference)||_2, 0 without one
  int newton_iterations = 0;
};

struct EvolveOptions {
  double dt = 0.01;
  double T = 1.0;
  Boundary bc = Boundary::Periodic;
  double left = 0.0;   // clamped ghost values
  double right = 0.0;
  Tolerances newton{1e-10, 1e-14, 20};
  int max_halvings = 6;
  int snapshot_every = 0;  // 0: only initial and final states
  double weight_a = 0.0;
  std::optional<Eigen::VectorXd> reference;
};

struct EvolutionResult {
  std::vector<EvolutionState> snapshots;
  std::vector<StepDiagnostics> diagnostics;
  EvolutionState final_state;
  int steps = 0;
  int halvings = 0;
};

EvolutionResult evolve(const EvolutionState& initial, const EvolveOptions& options);

// ------------------------------------------------------------ fronts on a grid

/// Steady front of the discrete operator: unknowns are the node values and
/// the speed, ghosts clamped to the rest states of that speed, and the node
/// nearest z = 0 keeps the value of the continuous profile there.
struct DiscreteFront {
  Eigen::VectorXd z;
  Eigen::VectorXd phi;
  double s = 0.0;
  double phi_left = 0.0;
  double phi_right = 0.0;
  double mu = 0.0;
  double residual = 0.0;
};

DiscreteFront discrete_front(const Profile& p, double z_lo, double z_hi, double dz);

/// Catmull-Rom interpolation of grid data, constant outside.
double interpolate_grid(const Eigen::VectorXd& z, const Eigen::VectorXd& v, double zq);

/// Shift gamma minimizing sum |p(z) - front(z + gamma)|^2 over the window
/// |z - center| <= half_width, by golden-section search on [-range, range].
double fit_phase_shift(const DiscreteFront& front, const Eigen::VectorXd& p, double center,
                       double half_width = 10.0, double range = 5.0);

struct Gaussian {
  double center = 10.0;
  double width = 1.0;
  double amplitude = 0.01;
};

struct PerturbationOptions {
  double z_lo = -100.0;
  double z_hi = 100.0;
  double dz = 0.1;
  double dt = 0.01;
  double T = 10.0;
  double weight_a = 0.3;
  double record_every = 0.5;  // time between history samples
  double packet_gap = 20.0;   // packet region: z < layer - packet_gap
};

struct PerturbationReport {
  double s_discrete = 0.0;
  std::vector<double> times;
  std::vector<double> phase_shift;        // fitted transition shift
  std::vector<double> weighted_norm;      // ||e^{az} (p - phi)||
  std::vector<double> weighted_aligned;   // ||e^{az} (p - phi(. + gamma))||
  std::vector<double> linf;               // max |p - phi|
  std::vector<double> packet_linf;        // max |p - phi_-| left of the layer
  double saturation = 0.0;                // max packet_linf over the last third of the run
  EvolutionResult evolution;
};

PerturbationReport perturbation_experiment(const Profile& p, const Gaussian& pert,
                                           const PerturbationOptions& options = {});

// ------------------------------------------------------------ linear decay

struct LinearDecayOptions {
  int n = 512;        // Fourier nodes on the periodic box [-L, L)
  double L = 0.0;     // 0: profile L
  double dt = 0.01;
  double T = 20.0;
  double record_every = 0.1;
  int startup_half_steps = 4;  // implicit-Euler half steps before CN
};

struct LinearDecayReport {
  double a = 0.0;
  double gamma_inf = 0.0;
  double fitted_rate = 0.0;
  double omega_est = 0.0;  // distance of the weighted essential spectrum from the axis
  std::vector<std::pair<double, double>> residual_history;  // (t, H^2 residual)
  double kernel_eigenvalue = 0.0;  // discrete eigenvalue nearest 0
  bool pass = false;
};

/// Pseudo-spectral periodic discretization of the weighted linearization
/// L_a = e^{az} L e^{-az} about a profile with equal end states (mu = 0).
struct WeightedOperator {
  Eigen::VectorXd z;
  Eigen::MatrixXd L;
  Eigen::MatrixXd D1, D2;
  Eigen::VectorXd kernel;  // discrete null vector scaled to e^{az} phi'
  double kernel_eigenvalue = 0.0;
  double h = 0.0;
};

WeightedOperator weighted_operator(const Profile& p, double a, int n, double L);

/// e^{az} phi' sampled on the operator grid.
Eigen::VectorXd weighted_derivative(const Profile& p, double a, const Eigen::VectorXd& z);

LinearDecayReport linear_weighted_evolve(const Profile& p, double a, const Eigen::VectorXd& w0,
                                         const LinearDecayOptions& options = {});
LinearDecayReport linear_weighted_evolve(const Profile& p, double a,
                                         const std::function<double(double)>& w0,
                                         const LinearDecayOptions& options = {});

// ------------------------------------------------------------ physical height

struct HeightFrame {
  double t = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd hx;
  Eigen::VectorXd h;
};

/// Undoes p = sqrt(gamma/6) (h_x - 1/gamma): h_x = sqrt(6/gamma) p + 1/gamma,
/// lab coordinate x = z + (s + 1/(2 gamma)) t, h by cumulative trapezoid with
/// h(left) = 0, minus the drift v0 t.
std::vector<HeightFrame> slope_to_height(const std::vector<EvolutionState>& trajectory,
                                         double gamma_phys, double v0);

/// p from h_x (the forward map).
Eigen::VectorXd height_slope_to_p(const Eigen::VectorXd& hx, double gamma_phys);

}  // namespace mkslab
