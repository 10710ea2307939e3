#pragma once

#include <vector>

#include "chc/control.hpp"
#include "chc/state.hpp"

namespace chc {

// Second derivatives of the potentials along a trajectory, indexed by time
// sample n = 0..nt. The scheme split is kept alongside: `implicit` parts act
// on the unknown of the step ending at t_n, `explicit` parts (convex split
// only) on the previous state when entering the next step.
struct LinearizedCoefficients {
  GeometryPtr geometry;
  SolverConfig config;
  std::vector<InteriorField> lambda;        // f''(y^n)
  std::vector<BoundaryField> lambda_Gamma;  // f_Gamma''(y_Gamma^n)
  std::vector<InteriorField> lambda_implicit;
  std::vector<BoundaryField> lambda_Gamma_implicit;
  std::vector<InteriorField> pi_explicit;
  std::vector<BoundaryField> pi_Gamma_explicit;

  int nt() const { return static_cast<int>(lambda.size()) - 1; }
};

LinearizedCoefficients linearize(const Trajectory& traj, const PotentialPair& pair);

struct TangentTrajectory {
  std::vector<CoupledField> xi;    // nt + 1 entries, xi[0] = 0
  std::vector<InteriorField> eta;  // linearized chemical potential
};

// Derivative of the discrete control-to-state map in direction h: each step
// solves the Jacobian of the state step at the base trajectory.
TangentTrajectory solve_tangent(const LinearizedCoefficients& coeffs, const ControlSignal& h,
                                const SolverConfig& cfg);

}  // namespace chc
