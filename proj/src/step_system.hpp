#pragma once

// Shared assembly of one implicit Euler step. Unknowns are stacked [y; w].
//   R1 = M (y - y_prev) + dt K w
//   R2 = -M w + (tau/dt) M (y - y_prev) + B (y - y_prev)/dt + A y
//        + M f'(*) + B (f_G'(*) - u)
// with M the lumped mass, B the lifted boundary weights and A = K + K_Gamma.

#include <Eigen/SparseLU>

#include "chc/grid.hpp"
#include "chc/potentials.hpp"
#include "chc/sensitivity.hpp"
#include "chc/state.hpp"

namespace chc::detail {

struct StepContext {
  GeometryPtr geometry;
  double dt = 0.0;
  double tau = 1.0;
  Vector M;
  Vector B;
  SparseMatrix K;
  SparseMatrix A;
  std::vector<char> on_boundary;

  StepContext(GeometryPtr g, double dt, double tau);
  int n() const { return static_cast<int>(M.size()); }
};

// Nodal derivative data of the potentials: bulk values at every node, boundary
// values only on boundary nodes (zero elsewhere).
struct NodalPotential {
  Vector bulk;
  Vector boundary;
};

// f' split by scheme: implicit part at y, explicit part at y_prev.
NodalPotential implicit_force(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y);
NodalPotential explicit_force(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y_prev);
// Derivatives of the two parts.
NodalPotential implicit_slope(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y);
NodalPotential explicit_slope(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y);

// M a + B b, the diagonal that couples nodal potential data into R2.
Vector weighted(const StepContext& c, const NodalPotential& v);

Vector residual(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y, const Vector& w,
                const Vector& y_prev, const Vector& u_lifted);
double residual_norm(const StepContext& c, const Vector& R);

// [[M, dt K], [(tau/dt) M + B/dt + A + diag(d), -M]]
SparseMatrix jacobian(const StepContext& c, const Vector& d);

// d/dy_prev of -R2 without the mass rows: (tau/dt) M + B/dt - diag(e)
Vector explicit_coupling(const StepContext& c, const Vector& e);

Vector lift(const Geometry& g, const Vector& boundary);

// Nodal diagonals M lambda + B lambda_Gamma of the linearization at sample n.
Vector implicit_diag(const StepContext& c, const LinearizedCoefficients& k, int n);
Vector explicit_diag(const StepContext& c, const LinearizedCoefficients& k, int n);

class Factor {
 public:
  void compute(const SparseMatrix& J);
  Vector solve(const Vector& rhs) const;

 private:
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace chc::detail
