#pragma once

#include <span>
#include <vector>

#include "chc/grid.hpp"

namespace chc {

inline constexpr double kNeumannTol = 1e-11;

// An interior field with (numerically) zero mean, the domain of N.
struct ZeroMeanField {
  InteriorField inner;

  // Checks |mean| <= 1e-11 (sup-norm + 1); throws NotZeroMean otherwise.
  static ZeroMeanField checked(InteriorField f);
  // Subtracts the mean.
  static ZeroMeanField project(InteriorField f);
};

// u = N v: neg_laplacian(u) = v with mean_value(u) = 0. Stops when
// ||neg_laplacian(u) - v||_H <= tol * ||v||_H. Throws SolverDiverged after
// 20 sqrt(n) + 200 iterations.
ZeroMeanField apply_N(const ZeroMeanField& v, double tol = kNeumannTol);

// Raw-vector form used by the solvers: v must satisfy weights . v ~ 0.
Vector apply_N(const Geometry& g, const Vector& v, double tol = kNeumannTol);

// ||v||_*^2 = \int v N v = \int |grad N v|^2.
double dual_norm_sq(const ZeroMeanField& v, double tol = kNeumannTol);

// Mean reconstruction
//   M(t_k) = terminal - (1/|Omega|) sum_{j=k+1}^{nt} dt s_j,
// where s_j = \int (-Delta q_j + lambda_j q_j - phiQ_j) at time index j and
// \int -Delta q is the boundary flux term -\int_Gamma d_n q. Trajectories
// hold nt+1 entries; t_index in 0..nt.
double apply_M(std::span<const InteriorField> q, std::span<const InteriorField> lambda,
               std::span<const InteriorField> phiQ, double phiOmega_mean, int t_index, double dt);

// Same recursion with precomputed sources s_j (index 0 unused).
double apply_M(std::span<const double> sources, double measure, double terminal, int t_index, double dt);

}  // namespace chc
