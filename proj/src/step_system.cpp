#include "step_system.hpp"

#include <cmath>

#include "chc/errors.hpp"

namespace chc::detail {

StepContext::StepContext(GeometryPtr g, double dt_, double tau_)
    : geometry(std::move(g)), dt(dt_), tau(tau_) {
  M = geometry->weights();
  B = geometry->lifted_boundary_weights();
  K = geometry->stiffness();
  A = K + geometry->lifted_boundary_stiffness();
  A.makeCompressed();
  on_boundary.assign(static_cast<std::size_t>(geometry->node_count()), 0);
  for (int node : geometry->boundary_nodes()) on_boundary[static_cast<std::size_t>(node)] = 1;
}

namespace {

template <typename Fn>
NodalPotential nodal(const StepContext& c, const Vector& y, Fn&& fn) {
  NodalPotential out{Vector::Zero(c.n()), Vector::Zero(c.n())};
  for (int i = 0; i < c.n(); ++i) {
    out.bulk(i) = fn(false, y(i));
    if (c.on_boundary[static_cast<std::size_t>(i)]) out.boundary(i) = fn(true, y(i));
  }
  return out;
}

}  // namespace

NodalPotential implicit_force(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y) {
  return nodal(c, y, [&](bool bnd, double r) {
    const PotentialSpec& spec = bnd ? p.boundary : p.bulk;
    return s == Scheme::FullyImplicit ? eval(spec, 1, r) : convex_concave_split(spec, r).beta;
  });
}

NodalPotential explicit_force(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y_prev) {
  if (s == Scheme::FullyImplicit) return {Vector::Zero(c.n()), Vector::Zero(c.n())};
  return nodal(c, y_prev, [&](bool bnd, double r) {
    return convex_concave_split(bnd ? p.boundary : p.bulk, r).pi;
  });
}

NodalPotential implicit_slope(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y) {
  return nodal(c, y, [&](bool bnd, double r) {
    const PotentialSpec& spec = bnd ? p.boundary : p.bulk;
    return s == Scheme::FullyImplicit ? eval(spec, 2, r) : convex_concave_split_derivative(spec, r).beta;
  });
}

NodalPotential explicit_slope(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y) {
  if (s == Scheme::FullyImplicit) return {Vector::Zero(c.n()), Vector::Zero(c.n())};
  return nodal(c, y, [&](bool bnd, double r) {
    return convex_concave_split_derivative(bnd ? p.boundary : p.bulk, r).pi;
  });
}

Vector weighted(const StepContext& c, const NodalPotential& v) {
  return c.M.cwiseProduct(v.bulk) + c.B.cwiseProduct(v.boundary);
}

Vector residual(const StepContext& c, const PotentialPair& p, Scheme s, const Vector& y, const Vector& w,
                const Vector& y_prev, const Vector& u_lifted) {
  const int n = c.n();
  const Vector dy = y - y_prev;
  Vector R(2 * n);
  R.head(n) = c.M.cwiseProduct(dy) + c.dt * (c.K * w);
  const Vector force = weighted(c, implicit_force(c, p, s, y)) + weighted(c, explicit_force(c, p, s, y_prev));
  R.tail(n) = -c.M.cwiseProduct(w) + (c.tau / c.dt) * c.M.cwiseProduct(dy) + c.B.cwiseProduct(dy) / c.dt +
              c.A * y + force - c.B.cwiseProduct(u_lifted);
  return R;
}

double residual_norm(const StepContext& c, const Vector& R) {
  const int n = c.n();
  const Vector r1 = R.head(n) / c.dt;
  const double s1 = (r1.array().square() / c.M.array()).sum();
  const double s2 = (R.tail(n).array().square() / (c.M + c.B).array()).sum();
  return std::sqrt(s1 + s2);
}

SparseMatrix jacobian(const StepContext& c, const Vector& d) {
  const int n = c.n();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(2 * c.K.nonZeros() + c.A.nonZeros() + 4 * n));
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, c.M(i));
    t.emplace_back(n + i, n + i, -c.M(i));
    t.emplace_back(n + i, i, (c.tau / c.dt) * c.M(i) + c.B(i) / c.dt + d(i));
  }
  for (int k = 0; k < c.K.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(c.K, k); it; ++it) t.emplace_back(it.row(), n + it.col(), c.dt * it.value());
  }
  for (int k = 0; k < c.A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(c.A, k); it; ++it) t.emplace_back(n + it.row(), it.col(), it.value());
  }
  SparseMatrix J(2 * n, 2 * n);
  J.setFromTriplets(t.begin(), t.end());
  J.makeCompressed();
  return J;
}

Vector explicit_coupling(const StepContext& c, const Vector& e) {
  return (c.tau / c.dt) * c.M + c.B / c.dt - e;
}

Vector lift(const Geometry& g, const Vector& boundary) { return g.lift_from_boundary(boundary); }

Vector implicit_diag(const StepContext& c, const LinearizedCoefficients& k, int n) {
  const auto i = static_cast<std::size_t>(n);
  return c.M.cwiseProduct(k.lambda_implicit[i].values) +
         c.B.cwiseProduct(lift(*c.geometry, k.lambda_Gamma_implicit[i].values));
}

Vector explicit_diag(const StepContext& c, const LinearizedCoefficients& k, int n) {
  const auto i = static_cast<std::size_t>(n);
  return c.M.cwiseProduct(k.pi_explicit[i].values) +
         c.B.cwiseProduct(lift(*c.geometry, k.pi_Gamma_explicit[i].values));
}

void Factor::compute(const SparseMatrix& J) {
  lu_.compute(J);
  if (lu_.info() != Eigen::Success) throw SingularJacobian("sparse LU failed: " + lu_.lastErrorMessage());
}

Vector Factor::solve(const Vector& rhs) const {
  Vector x = lu_.solve(rhs);
  if (!x.allFinite()) throw SingularJacobian("sparse LU produced non-finite values");
  return x;
}

}  // namespace chc::detail
