#pragma once

#include <vector>

#include "chc/control.hpp"
#include "chc/grid.hpp"

namespace chc {

// Tracking cost
//   J = bQ/2 ||y - zQ||_Q^2 + bSigma/2 ||y_G - zSigma||_Sigma^2
//     + bOmega/2 ||y(T) - zOmega||^2 + bGamma/2 ||y_G(T) - zGamma||_Gamma^2
//     + b0/2 ||u||_Sigma^2
// Space-time norms use the right-endpoint rule of dot_sigma.
struct CostSpec {
  double bQ = 0.0;
  double bSigma = 0.0;
  double bOmega = 0.0;
  double bGamma = 0.0;
  double b0 = 0.0;
  std::vector<InteriorField> zQ;      // nt + 1 samples
  std::vector<BoundaryField> zSigma;  // nt + 1 samples
  InteriorField zOmega;
  BoundaryField zGamma;

  static CostSpec zeros(GeometryPtr g, TimeGrid time);
  // Throws ConfigMismatch on negative weights or grids that differ from (g, time).
  void validate(const Geometry& g, const TimeGrid& time) const;
  CostSpec scaled(double alpha) const;
};

}  // namespace chc
