#pragma once

#include <vector>

#include "chc/control.hpp"
#include "chc/cost.hpp"
#include "chc/sensitivity.hpp"
#include "chc/state.hpp"

namespace chc {

struct AdjointData {
  std::vector<InteriorField> phiQ;      // bQ (y - zQ), nt + 1 samples
  std::vector<BoundaryField> phiSigma;  // bSigma (y_G - zSigma)
  InteriorField phiOmega;               // bOmega (y(T) - zOmega)
  BoundaryField phiGamma;               // bGamma (y_G(T) - zGamma)
};

AdjointData build_adjoint_data(const Trajectory& traj, const CostSpec& cost);

// Backward solution indexed by time sample k = 0..nt. Entries 0..nt-1 come
// from the backward sweep (the step ending at t_{k+1} lands at t_k); entry nt
// is the terminal pair fixed by M p + (tau M + B) q = M phiOmega + B phiGamma
// and q = -Delta p.
struct AdjointTrajectory {
  std::vector<InteriorField> p;
  std::vector<InteriorField> q;
  std::vector<BoundaryField> q_Gamma;

  int nt() const { return static_cast<int>(p.size()) - 1; }
};

// Exact transpose of the tangent scheme.
AdjointTrajectory solve_adjoint_transpose(const LinearizedCoefficients& coeffs, const AdjointData& data,
                                          const SolverConfig& cfg);

struct DecoupledOptions {
  double neumann_tol = 1e-12;  // inner N solves
  double cg_tol = 1e-12;       // outer solve on the zero-mean subspace
  int cg_max = 2000;
};

// q-only backward system on the zero-mean subspace, with N applied by
// apply_N; p is rebuilt as N q + M(q) from the mean recursion.
AdjointTrajectory solve_adjoint_decoupled(const LinearizedCoefficients& coeffs, const AdjointData& data,
                                          const SolverConfig& cfg, const DecoupledOptions& opt = {});

struct DualityResult {
  double lhs = 0.0;  // sum_n dt \int_Gamma q_Gamma h
  double rhs = 0.0;  // tracking pairing of the tangent
  double residual = 0.0;
};

// |lhs - rhs| / (|lhs| + |rhs| + 1e-30). Control sample n pairs with the
// adjoint entry n-1.
DualityResult check_duality(const AdjointTrajectory& adj, const TangentTrajectory& tan, const AdjointData& data,
                            const ControlSignal& h);

// Largest |mean(q(t_k))| over k.
double max_abs_mean(const std::vector<InteriorField>& series);

}  // namespace chc
