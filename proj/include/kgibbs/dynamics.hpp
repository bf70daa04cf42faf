#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kgibbs/measures.hpp"
#include "kgibbs/spectral.hpp"

namespace kgibbs {

struct FlowConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  /// Max relative |H_k(t) - H_k(0)| accepted before the step is halved.
  double drift_tolerance = 1e-8;
  int max_halvings = 6;
  /// Keep every n-th state in the record (the final state is always kept).
  int record_stride = 0;

  void validate() const;
};

struct HamiltonianParts {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<SpectralField> states;
  /// H_k, kinetic and potential parts at every step (not only recorded ones).
  std::vector<double> step_times;
  std::vector<double> total;
  std::vector<double> kinetic;
  std::vector<double> potential;
  double dt_used = 0.0;
  long steps = 0;
  int halvings = 0;
  double max_relative_drift = 0.0;
  bool flagged = false;

  const SpectralField& final_state() const { return states.back(); }
};

/// L(t): coefficient j rotated by exp(-i t sqrt(1 + (j/N)^2)).
SpectralField linear_flow(const SpectralField& u, double t);

/// (1 - Laplacian)^{-1/2} Pi_k P_k (chi (Re u)^3), evaluated by collocation.
SpectralField nonlinear_term(const SpectralField& u, const MeasureSpec& spec);

HamiltonianParts hamiltonian(const SpectralField& u, const MeasureSpec& spec);

/// Lawson RK4 with a fixed step count; no drift control.
TrajectoryRecord evolve_fixed_step(const SpectralField& u0, const MeasureSpec& spec, double dt, double horizon,
                                   int record_stride = 0);

/// Integrates i u' = sqrt(1 - Laplacian) u + G_k(u) to cfg.horizon, halving
/// dt until the relative H_k drift meets the tolerance; flags the record if
/// the halving budget runs out.
TrajectoryRecord evolve_psi_k(const SpectralField& u0, const MeasureSpec& spec, const FlowConfig& cfg);

/// Final state only, fixed step.
SpectralField flow_map(const SpectralField& u0, const MeasureSpec& spec, double t, double dt);

struct PicardResult {
  std::vector<double> times;
  /// Correction v(t_i) = u(t_i) - L(t_i) u0 at the Simpson nodes.
  std::vector<SpectralField> correction;
  int iterations = 0;
  bool converged = false;
  /// Largest ratio of successive iterate gaps in sup_t p_{pi N, 1}.
  double contraction = 0.0;
  std::vector<double> gaps;
};

/// Picard iteration of the Duhamel map on [0, T], 64 Simpson intervals.
PicardResult picard_solve(const SpectralField& u0, const MeasureSpec& spec, double horizon, int max_iter = 60,
                          double tolerance = 1e-13);

struct PicardHorizon {
  std::vector<double> horizons;
  std::vector<double> contraction;
  std::vector<bool> converged;
  bool monotone = true;
  /// Largest grid horizon whose measured factor is below 1 (0 if none).
  double contractive_horizon = 0.0;
  /// ||chi^{1/3} L(tau) u0||_{L^6_tau L^6_x}, tau in [-1, 1].
  double lambda = 0.0;
  /// sup_t p_{pi N,1}(v) / Lambda at the contractive horizon.
  double epsilon = 0.0;
  /// C in T = eps^2 / (C Lambda^4), using max(Lambda, 1).
  double constant = 0.0;
};

/// Contraction factors on T_max, T_max/2, ... (`levels` values).
PicardHorizon picard_horizon(const SpectralField& u0, const MeasureSpec& spec, double max_horizon, int levels = 6,
                             int max_iter = 60);

double linear_space_time_norm(const SpectralField& u0, const MeasureSpec& spec);

struct EnergyReport {
  std::vector<double> times;
  /// E(v) = 1/2 p_{pi N,1}(v)^2 + 1/4 int chi (Re v)^4, v = u - L(t) u0.
  std::vector<double> energy;
  std::vector<double> kinetic_floor;
  /// int_0^t ||L(tau) u0||_{L^6}^q dtau over the fundamental domain, q = 1, 3.
  std::vector<double> l6_integral;
  std::vector<double> l6_cubed_integral;
  bool floor_holds = true;
};

EnergyReport energy_monitor(const TrajectoryRecord& traj, const SpectralField& u0, const MeasureSpec& spec);

struct GronwallFit {
  double c1 = 0.0;
  double c2 = 1.0;
};

/// Smallest c1 with sqrt(E) <= c1 I3 exp(c2 I1) at every t > 0 of every report.
GronwallFit fit_gronwall(std::span<const EnergyReport> reports, double c2 = 1.0);

/// Largest value of sqrt(E) / (c1 I3 exp(c2 I1)); <= 1 means the bound holds.
double gronwall_excess(const EnergyReport& report, const GronwallFit& fit);

struct LiouvilleResult {
  Eigen::MatrixXd jacobian;
  double determinant = 1.0;
  double deviation = 0.0;
};

/// Central-difference Jacobian of the time-t flow map at u in real
/// coordinates (Re u_j, Im u_j), and |det J - 1|.
LiouvilleResult liouville_check(const SpectralField& u, const MeasureSpec& spec, double t, double step = 1e-5,
                                double dt = 1e-3);

struct CrossKResult {
  double distance = 0.0;
  /// Bound on the weighted norm outside the coarse fundamental domain.
  double tail_bound = 0.0;
};

/// ||(1+x^2)^{-alpha/2} D^{3/4}(psi_k(t) u0 - psi_{k'}(t) u0)|| over
/// [-pi N_k, pi N_k), u0 embedded exactly into both spaces.
CrossKResult cross_k_convergence(const SpectralField& u0, const WeightFunction& chi, int k, int k_ref, double t,
                                 double alpha, double dt = 1e-3);

/// Real bump exp(-1/(1 - (x/a)^2)) on |x| < a, band-projected onto the grid.
SpectralField project_bump(const FrequencyGrid& grid, double half_width);

struct ConeResult {
  double leakage = 0.0;
  double outside_mass = 0.0;
  double total_mass = 0.0;
};

/// Fraction of the L^2 mass of Re L(t) u0 outside [-a-|t|-margin, a+|t|+margin].
ConeResult propagation_cone_check(const SpectralField& u0, double half_width, double t, double margin);

}  // namespace kgibbs
