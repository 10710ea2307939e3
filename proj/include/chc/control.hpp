#pragma once

#include <memory>
#include <vector>

#include "chc/grid.hpp"

namespace chc {

// Time grid t_n = n T / nt, n = 0..nt.
struct TimeGrid {
  double T = 1.0;
  int nt = 1;

  double dt() const { return T / nt; }
  double t(int n) const { return T * n / nt; }
  int samples() const { return nt + 1; }
  bool operator==(const TimeGrid&) const = default;
};

// Boundary values per time sample.
using BoundarySeries = std::vector<Vector>;
using InteriorSeries = std::vector<Vector>;

struct ControlBox {
  GeometryPtr geometry;
  TimeGrid time;
  BoundarySeries u_min;
  BoundarySeries u_max;
  double M0 = 1e6;

  static std::shared_ptr<const ControlBox> constant(GeometryPtr g, TimeGrid time, double lo, double hi,
                                                    double M0);
  // Throws ConfigMismatch if some u_min > u_max or sizes disagree.
  void validate() const;
};
using ControlBoxPtr = std::shared_ptr<const ControlBox>;

// Boundary control sampled at t_0..t_nt. Sample n drives step n-1 -> n, so
// sample 0 only enters the initial chemical potential.
struct ControlSignal {
  GeometryPtr geometry;
  TimeGrid time;
  BoundarySeries values;
  ControlBoxPtr box;  // null for unconstrained directions

  static ControlSignal zeros(GeometryPtr g, TimeGrid time);
  static ControlSignal constant(GeometryPtr g, TimeGrid time, double c);

  int samples() const { return static_cast<int>(values.size()); }
  BoundaryField at(int n) const { return {geometry, values[static_cast<std::size_t>(n)]}; }
  void validate() const;
};

// Arithmetic on signals sharing grids; the result carries a's box.
ControlSignal add_scaled(const ControlSignal& a, double alpha, const ControlSignal& b);
ControlSignal scaled(const ControlSignal& a, double alpha);

// L2(Sigma) product with right-endpoint time weights (0 at n = 0, dt after),
// matching the control sampling of the state scheme.
double dot_sigma(const ControlSignal& a, const ControlSignal& b);
double norm_sigma(const ControlSignal& a);
double dot_sigma(const Geometry& g, const TimeGrid& time, const BoundarySeries& a, const BoundarySeries& b);

// (sum_n dt || (u^{n+1} - u^n) / dt ||_{H_Gamma}^2)^{1/2}
double derivative_norm(const Geometry& g, const TimeGrid& time, const BoundarySeries& u);
double derivative_norm(const ControlSignal& u);

struct ProjectionInfo {
  bool budget_active = false;  // fluctuation rescaling was needed
  bool feasible = true;        // box and budget hold afterwards
  double derivative_norm = 0.0;
};

// Pointwise clamp to the box, then the derivative-budget repair: if the
// budget is exceeded, the fluctuation of each node about its time mean is
// scaled down uniformly to meet it and the result is clamped once more.
ControlSignal project_box(const BoundarySeries& raw, const ControlBoxPtr& box, ProjectionInfo* info = nullptr);
ControlSignal project_box(const ControlSignal& raw, const ControlBoxPtr& box, ProjectionInfo* info = nullptr);

// Box and budget feasibility with a 1e-9 relative budget slack.
bool is_feasible(const ControlSignal& u, const ControlBox& box, double box_tol = 0.0);

}  // namespace chc
