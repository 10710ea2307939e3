#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace chc {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class GeometryMode { Interval1D, Strip2D };

class Geometry;
using GeometryPtr = std::shared_ptr<const Geometry>;

/**
 * Uniform node grid on the closure of the bulk domain.
 *
 * Interval1D: nodes x_i = i*lx/(nx-1), i = 0..nx-1. The boundary is the two
 * end nodes, integrated with counting measure.
 *
 * Strip2D: nodes (x_i, y_j) with x periodic (x_i = i*lx/nx, no duplicated
 * seam) and y_j = j*ly/(ny-1). Node index is j*nx + i. The boundary is the
 * bottom row (boundary indices 0..nx-1) followed by the top row.
 *
 * Boundary nodes are a subset of the grid nodes, so traces are restrictions.
 * All discrete operators are built from two matrices: the lumped trapezoid
 * mass (weights) and the stiffness K with u^T K v = discrete \int grad u . grad v.
 */
class Geometry {
 public:
  static GeometryPtr interval(int nx, double lx);
  static GeometryPtr strip(int nx, int ny, double lx, double ly);

  GeometryMode mode() const { return mode_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }

  int node_count() const { return static_cast<int>(weights_.size()); }
  int boundary_count() const { return static_cast<int>(boundary_nodes_.size()); }
  int boundary_node(int b) const { return boundary_nodes_[static_cast<std::size_t>(b)]; }
  std::span<const int> boundary_nodes() const { return boundary_nodes_; }

  // Lumped trapezoid weights; sum = |Omega|.
  const Vector& weights() const { return weights_; }
  // Boundary weights; sum = |Gamma|.
  const Vector& boundary_weights() const { return boundary_weights_; }
  // Boundary weights scattered to node indexing (zero off the boundary).
  const Vector& lifted_boundary_weights() const { return lifted_boundary_weights_; }

  const SparseMatrix& stiffness() const { return stiffness_; }
  // Surface stiffness in boundary indexing (zero matrix for Interval1D).
  const SparseMatrix& boundary_stiffness() const { return boundary_stiffness_; }
  // Surface stiffness scattered to node indexing.
  const SparseMatrix& lifted_boundary_stiffness() const { return lifted_boundary_stiffness_; }

  double measure() const { return measure_; }
  double boundary_measure() const { return boundary_measure_; }

  // (x, y) of a node; y = 0 for Interval1D.
  std::array<double, 2> coordinate(int node) const;
  std::array<double, 2> boundary_coordinate(int b) const { return coordinate(boundary_node(b)); }

  Vector restrict_to_boundary(const Vector& nodal) const;
  Vector lift_from_boundary(const Vector& boundary) const;

  bool same_as(const Geometry& other) const;

 private:
  Geometry() = default;
  void build();

  GeometryMode mode_ = GeometryMode::Interval1D;
  int nx_ = 0;
  int ny_ = 1;
  double lx_ = 1.0;
  double ly_ = 0.0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  double measure_ = 0.0;
  double boundary_measure_ = 0.0;
  std::vector<int> boundary_nodes_;
  Vector weights_;
  Vector boundary_weights_;
  Vector lifted_boundary_weights_;
  SparseMatrix stiffness_;
  SparseMatrix boundary_stiffness_;
  SparseMatrix lifted_boundary_stiffness_;
};

struct InteriorField {
  GeometryPtr geometry;
  Vector values;

  static InteriorField zeros(GeometryPtr g);
  static InteriorField constant(GeometryPtr g, double c);
  static InteriorField from_function(GeometryPtr g, const std::function<double(double, double)>& f);
  int size() const { return static_cast<int>(values.size()); }
};

struct BoundaryField {
  GeometryPtr geometry;
  Vector values;

  static BoundaryField zeros(GeometryPtr g);
  static BoundaryField constant(GeometryPtr g, double c);
  static BoundaryField from_function(GeometryPtr g, const std::function<double(double, double)>& f);
  int size() const { return static_cast<int>(values.size()); }
};

// Discrete element of {(v, v_Gamma) : v_Gamma = v|_Gamma}.
struct CoupledField {
  InteriorField interior;
  BoundaryField boundary;

  // Builds the pair with the boundary part set to the exact trace.
  static CoupledField from_interior(InteriorField f);
  bool trace_compatible() const;
};

// Throws GeometryMismatch unless the field is finite and sized for its geometry.
void validate(const InteriorField& f);
void validate(const BoundaryField& g);
void validate(const CoupledField& c);
void require_same_geometry(const Geometry& a, const Geometry& b);

BoundaryField trace(const InteriorField& f);

double integrate_interior(const InteriorField& f);
double integrate_boundary(const BoundaryField& g);
double mean_value(const InteriorField& f);

// -Delta with the homogeneous Neumann closure: M^{-1} K f. Symmetric in the
// H product, annihilates constants, and has zero mean for every input.
InteriorField neg_laplacian(const InteriorField& f);

// Same as neg_laplacian away from the boundary; on boundary nodes the normal
// second difference is the one-sided three-point stencil. Paired with
// normal_trace_flux it satisfies the discrete Green identity exactly.
InteriorField neg_laplacian_strong(const InteriorField& f);

// Boundary flux d_n f defined so that
//   dot_H(neg_laplacian_strong(f), g) + \int_Gamma (d_n f) g = \int grad f . grad g
// holds for every g. Consistent (second order) for smooth f.
BoundaryField normal_trace_flux(const InteriorField& f);

// Interval1D: identically zero. Strip2D: periodic second difference per line.
BoundaryField neg_laplace_beltrami(const BoundaryField& g);

double gradient_product(const InteriorField& f, const InteriorField& g);
double boundary_gradient_product(const BoundaryField& f, const BoundaryField& g);

double dot_H(const InteriorField& f, const InteriorField& g);
double dot_HGamma(const BoundaryField& f, const BoundaryField& g);
// H^1 product: \int f g + \int grad f . grad g.
double dot_V(const InteriorField& f, const InteriorField& g);
double dot_VGamma(const BoundaryField& f, const BoundaryField& g);
// Product of the pair space H x H_Gamma.
double dot_calH(const CoupledField& a, const CoupledField& b);

double norm_H(const InteriorField& f);
double norm_HGamma(const BoundaryField& g);
double norm_calH(const CoupledField& c);

}  // namespace chc
