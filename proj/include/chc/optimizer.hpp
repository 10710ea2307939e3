#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "chc/adjoint.hpp"
#include "chc/control.hpp"
#include "chc/cost.hpp"
#include "chc/state.hpp"

namespace chc {

// Everything the reduced cost u -> J(S(u), u) depends on besides u.
struct ControlProblem {
  CoupledField y0;
  PotentialPair pair;
  SolverConfig cfg;
  CostSpec cost;
  ControlBoxPtr box;

  GeometryPtr geometry() const { return y0.interior.geometry; }
  // Largest cost weight; PGD steps are measured in units of 1/weight_scale.
  double weight_scale() const;
};

double evaluate_cost(const Trajectory& traj, const ControlSignal& u, const CostSpec& cost);

struct GradientEvaluation {
  double cost = 0.0;
  ControlSignal gradient;
  Trajectory trajectory;
  AdjointTrajectory adjoint;
};

// g^n = q_Gamma(t_{n-1}) + b0 u^n for n >= 1 and g^0 = b0 u^0. Under dot_sigma,
// g represents the derivative of the discrete reduced cost.
ControlSignal gradient_from_adjoint(const AdjointTrajectory& adj, const ControlSignal& u, double b0);

GradientEvaluation evaluate_gradient(const ControlProblem& prob, const ControlSignal& u);
ControlSignal reduced_gradient(const ControlProblem& prob, const ControlSignal& u);
double reduced_cost(const ControlProblem& prob, const ControlSignal& u);

struct PgdOptions {
  double step0 = 1.0;  // in units of 1/weight_scale
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_iter = 100;
  int max_backtracks = 40;
  double stat_tol = 0.0;  // <= 0 selects 1e-8 (initial stationarity + 1)
  int vi_probes = 100;
  std::uint64_t seed = 1;
};

struct IterateRecord {
  int iter = 0;
  double cost = 0.0;
  double stationarity = 0.0;
  double step = 0.0;
  bool budget_active = false;
};

struct ViCertificate {
  double min_probe = 0.0;
  double scale = 0.0;
  double tol = 0.0;
  int probes = 0;
  bool vi_pass = true;
  // ||u - P_box(-q_Gamma / b0)|| / (||u|| + 1e-30); NaN when not applicable.
  double projection_residual = std::numeric_limits<double>::quiet_NaN();
  bool projection_checked = false;
  bool projection_pass = true;

  bool pass() const { return vi_pass && projection_pass; }
};

struct OptimizationReport {
  std::vector<IterateRecord> iterates;
  ControlSignal control;
  ControlSignal gradient;
  Trajectory trajectory;
  double stat_tol = 0.0;
  bool converged = false;
  bool line_search_stalled = false;
  bool budget_infeasible = false;
  ViCertificate certificate;

  double final_cost() const { return iterates.back().cost; }
  double final_stationarity() const { return iterates.back().stationarity; }
};

// ||u - P(u - gamma0 g)||_Sigma
double stationarity(const ControlSignal& u, const ControlSignal& g, const ControlBoxPtr& box, double gamma0);

OptimizationReport projected_gradient_descent(const ControlProblem& prob, const ControlSignal& u0,
                                              const PgdOptions& opt = {});

// min over probes v of dot_sigma(g, v - u): box corners, the projected point
// P(u - gamma0 g), and n_probes random convex combinations of u with
// time-constant feasible controls. Passes if min >= -1e-8 scale with
// scale = (||g - b0 u|| + b0 ||u||) ||u_max - u_min||. When b0 > 0 and the budget is inactive,
// also compares u with the clamp of -q_Gamma/b0 (recovered from g).
ViCertificate check_vi(const ControlSignal& u, const ControlSignal& g, const ControlBoxPtr& box, int n_probes,
                       double b0, double gamma0, std::uint64_t seed, double projection_tol = 1e-6);

}  // namespace chc
