#pragma once

#include <vector>

#include "chc/control.hpp"
#include "chc/grid.hpp"
#include "chc/potentials.hpp"

namespace chc {

enum class Scheme {
  FullyImplicit,  // f'(y^{n+1})
  ConvexSplit,    // beta(y^{n+1}) + pi(y^n)
};

struct SolverConfig {
  TimeGrid time;
  double tau = 1.0;
  Scheme scheme = Scheme::FullyImplicit;
  double newton_tol = 1e-10;
  int newton_max = 50;
  double guard_delta = 1e-6;

  double dt() const { return time.dt(); }
  // Throws ConfigMismatch on nonpositive T, nt, tau or tolerances.
  void validate() const;
};

struct StateSnapshot {
  CoupledField y;
  InteriorField w;
  double t = 0.0;
};

struct Trajectory {
  std::vector<StateSnapshot> snapshots;  // nt + 1 entries
  ControlSignal control;
  SolverConfig config;
  PotentialPair pair;
  std::vector<int> newton_iterations;  // per step, entry 0 unused
  std::vector<double> newton_residuals;

  const Geometry& geometry() const { return *snapshots.front().w.geometry; }
  int nt() const { return static_cast<int>(snapshots.size()) - 1; }
};

// Implicit Euler for the viscous system with dynamic boundary condition.
// Unknowns per step are nodal y and w; boundary rows act on the boundary
// nodes of y. w at t = 0 is the quasi-static chemical potential of y0.
// Throws NewtonDiverged (with the step index) or DomainViolation.
Trajectory solve_state(const CoupledField& y0, const ControlSignal& u, const PotentialPair& pair,
                       const SolverConfig& cfg);
Trajectory solve_state(const InteriorField& y0, const ControlSignal& u, const PotentialPair& pair,
                       const SolverConfig& cfg);

// \int (|grad y|^2/2 + f(y)) + \int_Gamma (|grad_Gamma y_Gamma|^2/2 + f_Gamma(y_Gamma)).
double free_energy(const StateSnapshot& s, const PotentialPair& pair);
double free_energy(const InteriorField& y, const PotentialPair& pair);

struct ResidualReport {
  std::vector<double> residuals;  // per step in the H x H_Gamma norm; entry 0 is the initial w
  double max_residual = 0.0;
  int worst_step = 0;
  // First step whose residual exceeds `limit`, or -1.
  int first_flagged(double limit) const;
};

// Recomputes both discrete equations of every step from grid operators.
ResidualReport residual_check(const Trajectory& traj, const PotentialPair& pair, const ControlSignal& u);

}  // namespace chc
