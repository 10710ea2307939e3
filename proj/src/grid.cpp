#include "chc/grid.hpp"

#include <cmath>
#include <string>

#include "chc/errors.hpp"

namespace chc {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_edge(std::vector<Triplet>& t, int a, int b, double coef) {
  t.emplace_back(a, a, coef);
  t.emplace_back(b, b, coef);
  t.emplace_back(a, b, -coef);
  t.emplace_back(b, a, -coef);
}

void require_geometry(const GeometryPtr& g) {
  if (!g) throw GeometryMismatch("field has no geometry");
}

}  // namespace

GeometryPtr Geometry::interval(int nx, double lx) {
  if (nx < 3) throw ConfigMismatch("Interval1D needs nx >= 3, got " + std::to_string(nx));
  if (!(lx > 0.0)) throw ConfigMismatch("Interval1D needs lx > 0");
  auto g = std::shared_ptr<Geometry>(new Geometry());
  g->mode_ = GeometryMode::Interval1D;
  g->nx_ = nx;
  g->ny_ = 1;
  g->lx_ = lx;
  g->ly_ = 0.0;
  g->build();
  return g;
}

GeometryPtr Geometry::strip(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3) throw ConfigMismatch("Strip2D needs nx >= 3 and ny >= 3");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigMismatch("Strip2D needs lx, ly > 0");
  auto g = std::shared_ptr<Geometry>(new Geometry());
  g->mode_ = GeometryMode::Strip2D;
  g->nx_ = nx;
  g->ny_ = ny;
  g->lx_ = lx;
  g->ly_ = ly;
  g->build();
  return g;
}

void Geometry::build() {
  std::vector<Triplet> k;
  std::vector<Triplet> kb;
  if (mode_ == GeometryMode::Interval1D) {
    hx_ = lx_ / (nx_ - 1);
    hy_ = 0.0;
    weights_ = Vector::Constant(nx_, hx_);
    weights_(0) = weights_(nx_ - 1) = 0.5 * hx_;
    for (int i = 0; i + 1 < nx_; ++i) add_edge(k, i, i + 1, 1.0 / hx_);
    boundary_nodes_ = {0, nx_ - 1};
    boundary_weights_ = Vector::Ones(2);
    boundary_stiffness_.resize(2, 2);
  } else {
    hx_ = lx_ / nx_;
    hy_ = ly_ / (ny_ - 1);
    const int n = nx_ * ny_;
    weights_.resize(n);
    for (int j = 0; j < ny_; ++j) {
      const double wy = (j == 0 || j == ny_ - 1) ? 0.5 * hy_ : hy_;
      for (int i = 0; i < nx_; ++i) {
        const int a = j * nx_ + i;
        weights_(a) = hx_ * wy;
        add_edge(k, a, j * nx_ + (i + 1) % nx_, wy / hx_);
        if (j + 1 < ny_) add_edge(k, a, (j + 1) * nx_ + i, hx_ / hy_);
      }
    }
    boundary_nodes_.clear();
    for (int i = 0; i < nx_; ++i) boundary_nodes_.push_back(i);
    for (int i = 0; i < nx_; ++i) boundary_nodes_.push_back((ny_ - 1) * nx_ + i);
    boundary_weights_ = Vector::Constant(2 * nx_, hx_);
    for (int line = 0; line < 2; ++line) {
      for (int i = 0; i < nx_; ++i) add_edge(kb, line * nx_ + i, line * nx_ + (i + 1) % nx_, 1.0 / hx_);
    }
    boundary_stiffness_.resize(2 * nx_, 2 * nx_);
    boundary_stiffness_.setFromTriplets(kb.begin(), kb.end());
  }

  const int n = static_cast<int>(weights_.size());
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(k.begin(), k.end());

  lifted_boundary_weights_ = Vector::Zero(n);
  for (int b = 0; b < boundary_count(); ++b) lifted_boundary_weights_(boundary_nodes_[b]) = boundary_weights_(b);

  std::vector<Triplet> lifted;
  for (int outer = 0; outer < boundary_stiffness_.outerSize(); ++outer) {
    for (SparseMatrix::InnerIterator it(boundary_stiffness_, outer); it; ++it) {
      lifted.emplace_back(boundary_nodes_[it.row()], boundary_nodes_[it.col()], it.value());
    }
  }
  lifted_boundary_stiffness_.resize(n, n);
  lifted_boundary_stiffness_.setFromTriplets(lifted.begin(), lifted.end());

  measure_ = weights_.sum();
  boundary_measure_ = boundary_weights_.sum();
}

std::array<double, 2> Geometry::coordinate(int node) const {
  if (mode_ == GeometryMode::Interval1D) return {node * hx_, 0.0};
  return {(node % nx_) * hx_, (node / nx_) * hy_};
}

Vector Geometry::restrict_to_boundary(const Vector& nodal) const {
  Vector out(boundary_count());
  for (int b = 0; b < boundary_count(); ++b) out(b) = nodal(boundary_nodes_[b]);
  return out;
}

Vector Geometry::lift_from_boundary(const Vector& boundary) const {
  Vector out = Vector::Zero(node_count());
  for (int b = 0; b < boundary_count(); ++b) out(boundary_nodes_[b]) = boundary(b);
  return out;
}

bool Geometry::same_as(const Geometry& other) const {
  return this == &other || (mode_ == other.mode_ && nx_ == other.nx_ && ny_ == other.ny_ && lx_ == other.lx_ &&
                            ly_ == other.ly_);
}

// ---------------------------------------------------------------------------

InteriorField InteriorField::zeros(GeometryPtr g) {
  require_geometry(g);
  const int n = g->node_count();
  return {std::move(g), Vector::Zero(n)};
}

InteriorField InteriorField::constant(GeometryPtr g, double c) {
  require_geometry(g);
  const int n = g->node_count();
  return {std::move(g), Vector::Constant(n, c)};
}

InteriorField InteriorField::from_function(GeometryPtr g, const std::function<double(double, double)>& f) {
  InteriorField out = zeros(std::move(g));
  for (int a = 0; a < out.size(); ++a) {
    const auto [x, y] = out.geometry->coordinate(a);
    out.values(a) = f(x, y);
  }
  return out;
}

BoundaryField BoundaryField::zeros(GeometryPtr g) {
  require_geometry(g);
  const int n = g->boundary_count();
  return {std::move(g), Vector::Zero(n)};
}

BoundaryField BoundaryField::constant(GeometryPtr g, double c) {
  require_geometry(g);
  const int n = g->boundary_count();
  return {std::move(g), Vector::Constant(n, c)};
}

BoundaryField BoundaryField::from_function(GeometryPtr g, const std::function<double(double, double)>& f) {
  BoundaryField out = zeros(std::move(g));
  for (int b = 0; b < out.size(); ++b) {
    const auto [x, y] = out.geometry->boundary_coordinate(b);
    out.values(b) = f(x, y);
  }
  return out;
}

CoupledField CoupledField::from_interior(InteriorField f) {
  BoundaryField tr = trace(f);
  return {std::move(f), std::move(tr)};
}

bool CoupledField::trace_compatible() const {
  if (!interior.geometry || !boundary.geometry) return false;
  if (!interior.geometry->same_as(*boundary.geometry)) return false;
  const auto& g = *interior.geometry;
  if (boundary.size() != g.boundary_count() || interior.size() != g.node_count()) return false;
  for (int b = 0; b < g.boundary_count(); ++b) {
    if (boundary.values(b) != interior.values(g.boundary_node(b))) return false;
  }
  return true;
}

void require_same_geometry(const Geometry& a, const Geometry& b) {
  if (!a.same_as(b)) throw GeometryMismatch("fields live on different geometries");
}

void validate(const InteriorField& f) {
  require_geometry(f.geometry);
  if (f.size() != f.geometry->node_count()) {
    throw GeometryMismatch("interior field has " + std::to_string(f.size()) + " entries, geometry has " +
                           std::to_string(f.geometry->node_count()) + " nodes");
  }
  if (!f.values.allFinite()) throw GeometryMismatch("interior field has non-finite entries");
}

void validate(const BoundaryField& g) {
  require_geometry(g.geometry);
  if (g.size() != g.geometry->boundary_count()) {
    throw GeometryMismatch("boundary field has " + std::to_string(g.size()) + " entries, geometry has " +
                           std::to_string(g.geometry->boundary_count()) + " boundary nodes");
  }
  if (!g.values.allFinite()) throw GeometryMismatch("boundary field has non-finite entries");
}

void validate(const CoupledField& c) {
  validate(c.interior);
  validate(c.boundary);
  if (!c.trace_compatible()) throw GeometryMismatch("coupled field violates the trace constraint");
}

BoundaryField trace(const InteriorField& f) {
  validate(f);
  return {f.geometry, f.geometry->restrict_to_boundary(f.values)};
}

double integrate_interior(const InteriorField& f) {
  validate(f);
  return f.geometry->weights().dot(f.values);
}

double integrate_boundary(const BoundaryField& g) {
  validate(g);
  return g.geometry->boundary_weights().dot(g.values);
}

double mean_value(const InteriorField& f) { return integrate_interior(f) / f.geometry->measure(); }

InteriorField neg_laplacian(const InteriorField& f) {
  validate(f);
  const auto& g = *f.geometry;
  Vector out = g.stiffness() * f.values;
  out.array() /= g.weights().array();
  return {f.geometry, std::move(out)};
}

InteriorField neg_laplacian_strong(const InteriorField& f) {
  InteriorField out = neg_laplacian(f);
  const auto& g = *f.geometry;
  const Vector& v = f.values;
  if (g.mode() == GeometryMode::Interval1D) {
    const int n = g.nx();
    const double h2 = g.hx() * g.hx();
    out.values(0) = -(v(0) - 2.0 * v(1) + v(2)) / h2;
    out.values(n - 1) = -(v(n - 1) - 2.0 * v(n - 2) + v(n - 3)) / h2;
    return out;
  }
  const int nx = g.nx();
  const int ny = g.ny();
  const double hx2 = g.hx() * g.hx();
  const double hy2 = g.hy() * g.hy();
  auto at = [&](int i, int j) { return v(j * nx + ((i % nx) + nx) % nx); };
  for (int i = 0; i < nx; ++i) {
    for (const auto [j0, j1, j2] : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{ny - 1, ny - 2, ny - 3}}) {
      const double dxx = (at(i - 1, j0) - 2.0 * at(i, j0) + at(i + 1, j0)) / hx2;
      const double dyy = (at(i, j0) - 2.0 * at(i, j1) + at(i, j2)) / hy2;
      out.values(j0 * nx + i) = -(dxx + dyy);
    }
  }
  return out;
}

BoundaryField normal_trace_flux(const InteriorField& f) {
  validate(f);
  const auto& g = *f.geometry;
  const Vector kf = g.stiffness() * f.values;
  const InteriorField strong = neg_laplacian_strong(f);
  BoundaryField out = BoundaryField::zeros(f.geometry);
  for (int b = 0; b < g.boundary_count(); ++b) {
    const int a = g.boundary_node(b);
    out.values(b) = (kf(a) - g.weights()(a) * strong.values(a)) / g.boundary_weights()(b);
  }
  return out;
}

BoundaryField neg_laplace_beltrami(const BoundaryField& gf) {
  validate(gf);
  const auto& g = *gf.geometry;
  Vector out = g.boundary_stiffness() * gf.values;
  out.array() /= g.boundary_weights().array();
  return {gf.geometry, std::move(out)};
}

double gradient_product(const InteriorField& f, const InteriorField& g) {
  validate(f);
  validate(g);
  require_same_geometry(*f.geometry, *g.geometry);
  return f.values.dot(f.geometry->stiffness() * g.values);
}

double boundary_gradient_product(const BoundaryField& f, const BoundaryField& g) {
  validate(f);
  validate(g);
  require_same_geometry(*f.geometry, *g.geometry);
  return f.values.dot(f.geometry->boundary_stiffness() * g.values);
}

double dot_H(const InteriorField& f, const InteriorField& g) {
  validate(f);
  validate(g);
  require_same_geometry(*f.geometry, *g.geometry);
  return (f.geometry->weights().array() * f.values.array() * g.values.array()).sum();
}

double dot_HGamma(const BoundaryField& f, const BoundaryField& g) {
  validate(f);
  validate(g);
  require_same_geometry(*f.geometry, *g.geometry);
  return (f.geometry->boundary_weights().array() * f.values.array() * g.values.array()).sum();
}

double dot_V(const InteriorField& f, const InteriorField& g) { return dot_H(f, g) + gradient_product(f, g); }

double dot_VGamma(const BoundaryField& f, const BoundaryField& g) {
  return dot_HGamma(f, g) + boundary_gradient_product(f, g);
}

double dot_calH(const CoupledField& a, const CoupledField& b) {
  return dot_H(a.interior, b.interior) + dot_HGamma(a.boundary, b.boundary);
}

double norm_H(const InteriorField& f) { return std::sqrt(dot_H(f, f)); }
double norm_HGamma(const BoundaryField& g) { return std::sqrt(dot_HGamma(g, g)); }
double norm_calH(const CoupledField& c) { return std::sqrt(dot_calH(c, c)); }

}  // namespace chc
