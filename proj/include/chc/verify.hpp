#pragma once

// Property drivers. Norm proxies used throughout: L_inf(H x H_Gamma) for
// state differences (max over time samples of norm_calH) and L2(Sigma) with
// right-endpoint weights for controls.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chc/adjoint.hpp"
#include "chc/optimizer.hpp"
#include "chc/sensitivity.hpp"
#include "chc/state.hpp"

namespace chc {

// Worker count for independent probes: CHC_THREADS if set and positive,
// otherwise the hardware concurrency (at least 1).
int probe_threads();
// Runs fn(0..n-1) on up to probe_threads() workers; results must be written
// by index so output order does not depend on scheduling.
void parallel_for(int n, const std::function<void(int)>& fn);

// max_n ||a^n - b^n||_{H x H_Gamma}
double linf_calH(const std::vector<StateSnapshot>& a, const std::vector<StateSnapshot>& b);

struct FdRow {
  double eps = 0.0;
  double central = 0.0;  // (J(u + eps h) - J(u - eps h)) / (2 eps)
  double adjoint = 0.0;  // dot_sigma(g, h)
  double rel_error = 0.0;
};

struct FdTable {
  std::vector<FdRow> rows;
  double best_rel_error = 0.0;
};

// corrupt_adjoint scales q_Gamma by 1.01 before the pairing (fault injection).
FdTable fd_gradient_oracle(const ControlProblem& prob, const ControlSignal& u, const ControlSignal& h,
                           const std::vector<double>& eps_list, bool corrupt_adjoint = false);

struct TaylorRow {
  double eps = 0.0;
  double remainder = 0.0;  // L_inf(H x H_Gamma) of S(u + eps h) - S(u) - eps xi
};

struct TaylorStudy {
  std::vector<TaylorRow> rows;
  double slope = 0.0;  // least-squares slope of log remainder against log eps
};

TaylorStudy taylor_remainder_study(const ControlProblem& prob, const ControlSignal& u, const ControlSignal& h,
                                   const std::vector<double>& eps_list);

struct StabilityStudy {
  std::vector<double> ratios;  // L_inf(H x H_Gamma) state gap / L2(Sigma) control gap
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool all_finite = true;

  double spread() const { return max_ratio / min_ratio; }
};

// Smooth control family u = a0 + a1 sin(pi t / T) + a2 b(x) + a3 t/T b(x) with
// b a boundary profile (end-point sign on Interval1D, cos(2 pi x / lx) on
// Strip2D) and coefficients uniform in [-amplitude, amplitude].
ControlSignal smooth_control(GeometryPtr g, TimeGrid time, const std::array<double, 4>& a);
StabilityStudy stability_study(const ControlProblem& prob, int pairs, double amplitude, std::uint64_t seed);
StabilityStudy stability_study(const ControlProblem& prob, const std::vector<std::pair<ControlSignal, ControlSignal>>& pairs);

struct ConservationReport {
  double mass0 = 0.0;
  double max_mass_drift = 0.0;  // max_n |mean(y^n) - mean(y^0)| / (1 + |mean(y^0)|)
  std::vector<double> energy;
  double max_energy_increase = 0.0;  // max_n E^{n+1} - E^n (may be negative)
  double min_y = 0.0;
  double max_y = 0.0;
  int band_violations = 0;  // snapshots outside [-1 + guard, 1 - guard] for singular pairs
};

// Recomputes mean and free energy from the grid spacing and node values
// directly (edge sums), without the solver's matrices.
ConservationReport conservation_and_energy_suite(const Trajectory& traj, const PotentialPair& pair);

struct CertificateSummary {
  bool stationarity_pass = false;
  bool used_decoupled = false;
  ViCertificate vi;

  bool pass() const { return stationarity_pass && vi.pass(); }
};

// Rebuilds q_Gamma with an independent adjoint solve (decoupled form when
// bOmega = bGamma = 0) and reruns check_vi.
CertificateSummary optimality_certificate(const ControlProblem& prob, const OptimizationReport& run,
                                          const PgdOptions& opt);

struct SelfConvergence {
  std::vector<int> nt;
  std::vector<double> error;  // ||y(T) - y_ref(T)||_{H x H_Gamma}
  int reference_nt = 0;
  double order = 0.0;  // log2(error[0] / error[1]) for successive doublings
};

// Control given as a function of (t, x, y), sampled on each time grid.
SelfConvergence self_convergence(const CoupledField& y0, const PotentialPair& pair, SolverConfig cfg,
                                 const std::function<double(double, double, double)>& control,
                                 const std::vector<int>& nts, int reference_nt);

struct AdjointRegularity {
  double max_difference_quotient = 0.0;  // max_k ||(q_G^{k+1} - q_G^k)/dt||_{H_Gamma}
  double h1_seminorm = 0.0;              // (sum_k dt ||(q_G^{k+1} - q_G^k)/dt||^2)^{1/2}
};

AdjointRegularity adjoint_time_regularity(const AdjointTrajectory& adj, const TimeGrid& time);

}  // namespace chc
