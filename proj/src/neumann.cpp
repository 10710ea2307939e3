#include "chc/neumann.hpp"

#include <cmath>
#include <string>

#include "chc/errors.hpp"

namespace chc {

ZeroMeanField ZeroMeanField::checked(InteriorField f) {
  validate(f);
  const double m = mean_value(f);
  const double sup = f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
  if (std::abs(m) > 1e-11 * (sup + 1.0)) {
    throw NotZeroMean("field mean " + std::to_string(m) + " is not zero");
  }
  return {std::move(f)};
}

ZeroMeanField ZeroMeanField::project(InteriorField f) {
  validate(f);
  const double m = mean_value(f);
  f.values.array() -= m;
  return {std::move(f)};
}

Vector apply_N(const Geometry& g, const Vector& v, double tol) {
  const Vector& w = g.weights();
  const SparseMatrix& K = g.stiffness();
  const int n = g.node_count();
  if (v.size() != n) throw GeometryMismatch("apply_N: size mismatch");

  // CG on K u = W v restricted to the complement of constants. Residuals of
  // a consistent system stay orthogonal to 1; preconditioned vectors are
  // projected back onto that complement.
  const Vector diag = K.diagonal();
  auto h_norm = [&](const Vector& r) { return std::sqrt((r.array().square() / w.array()).sum()); };
  const double vnorm = std::sqrt((w.array() * v.array().square()).sum());
  Vector u = Vector::Zero(n);
  if (vnorm == 0.0) return u;

  Vector r = w.cwiseProduct(v);
  r.array() -= r.sum() / n;
  auto precondition = [&](const Vector& res) {
    Vector z = res.cwiseQuotient(diag);
    z.array() -= z.mean();
    return z;
  };
  Vector z = precondition(r);
  Vector d = z;
  double rz = r.dot(z);
  const int cap = static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 200;
  for (int it = 0; it < cap; ++it) {
    if (h_norm(r) <= tol * vnorm) {
      u.array() -= w.dot(u) / g.measure();
      return u;
    }
    const Vector kd = K * d;
    const double dkd = d.dot(kd);
    if (!(dkd > 0.0)) throw SolverDiverged("apply_N: conjugate direction breakdown");
    const double alpha = rz / dkd;
    u += alpha * d;
    r -= alpha * kd;
    z = precondition(r);
    const double rz_new = r.dot(z);
    d = z + (rz_new / rz) * d;
    rz = rz_new;
  }
  if (h_norm(r) <= tol * vnorm) {
    u.array() -= w.dot(u) / g.measure();
    return u;
  }
  throw SolverDiverged("apply_N: no convergence in " + std::to_string(cap) + " iterations (residual " +
                       std::to_string(h_norm(r) / vnorm) + ")");
}

ZeroMeanField apply_N(const ZeroMeanField& v, double tol) {
  const ZeroMeanField in = ZeroMeanField::checked(v.inner);
  return {InteriorField{in.inner.geometry, apply_N(*in.inner.geometry, in.inner.values, tol)}};
}

double dual_norm_sq(const ZeroMeanField& v, double tol) {
  const ZeroMeanField u = apply_N(v, tol);
  return dot_H(v.inner, u.inner);
}

double apply_M(std::span<const double> sources, double measure, double terminal, int t_index, double dt) {
  const int nt = static_cast<int>(sources.size()) - 1;
  if (t_index < 0 || t_index > nt) throw ConfigMismatch("apply_M: time index out of range");
  double acc = 0.0;
  for (int j = nt; j > t_index; --j) acc += dt * sources[static_cast<std::size_t>(j)];
  return terminal - acc / measure;
}

double apply_M(std::span<const InteriorField> q, std::span<const InteriorField> lambda,
               std::span<const InteriorField> phiQ, double phiOmega_mean, int t_index, double dt) {
  if (q.empty() || q.size() != lambda.size() || q.size() != phiQ.size()) {
    throw ConfigMismatch("apply_M: trajectories must share the time grid");
  }
  const Geometry& g = *q.front().geometry;
  std::vector<double> s(q.size(), 0.0);
  for (std::size_t j = 1; j < q.size(); ++j) {
    require_same_geometry(g, *lambda[j].geometry);
    require_same_geometry(g, *phiQ[j].geometry);
    const double flux = integrate_boundary(normal_trace_flux(q[j]));
    const Vector lq = lambda[j].values.cwiseProduct(q[j].values);
    s[j] = -flux + g.weights().dot(lq) - integrate_interior(phiQ[j]);
  }
  return apply_M(s, g.measure(), phiOmega_mean, t_index, dt);
}

}  // namespace chc
