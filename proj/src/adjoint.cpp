#include "chc/adjoint.hpp"

#include <cmath>
#include <string>

#include "chc/errors.hpp"
#include "chc/neumann.hpp"
#include "step_system.hpp"

namespace chc {

AdjointData build_adjoint_data(const Trajectory& traj, const CostSpec& cost) {
  const Geometry& g = traj.geometry();
  cost.validate(g, traj.config.time);
  const GeometryPtr gp = traj.snapshots.front().w.geometry;
  AdjointData d;
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
    const auto& s = traj.snapshots[n];
    d.phiQ.push_back({gp, cost.bQ * (s.y.interior.values - cost.zQ[n].values)});
    d.phiSigma.push_back({gp, cost.bSigma * (s.y.boundary.values - cost.zSigma[n].values)});
  }
  const auto& last = traj.snapshots.back();
  d.phiOmega = {gp, cost.bOmega * (last.y.interior.values - cost.zOmega.values)};
  d.phiGamma = {gp, cost.bGamma * (last.y.boundary.values - cost.zGamma.values)};
  return d;
}

namespace {

void check_inputs(const LinearizedCoefficients& coeffs, const AdjointData& data, const SolverConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.time.samples());
  if (coeffs.nt() != cfg.time.nt || data.phiQ.size() != n || data.phiSigma.size() != n) {
    throw ConfigMismatch("adjoint: data and coefficients disagree with the time grid");
  }
  if (coeffs.config.scheme != cfg.scheme || coeffs.config.tau != cfg.tau || !(coeffs.config.time == cfg.time)) {
    throw ConfigMismatch("adjoint: solver config differs from the linearized trajectory");
  }
  for (std::size_t k = 0; k < n; ++k) {
    validate(data.phiQ[k]);
    validate(data.phiSigma[k]);
  }
  validate(data.phiOmega);
  validate(data.phiGamma);
}

// dt (M phiQ^n + B phiSigma^n)
Vector tracking_load(const detail::StepContext& c, const AdjointData& data, int n) {
  const auto k = static_cast<std::size_t>(n);
  return c.dt * (c.M.cwiseProduct(data.phiQ[k].values) +
                 c.B.cwiseProduct(detail::lift(*c.geometry, data.phiSigma[k].values)));
}

Vector terminal_load(const detail::StepContext& c, const AdjointData& data) {
  return c.M.cwiseProduct(data.phiOmega.values) + c.B.cwiseProduct(detail::lift(*c.geometry, data.phiGamma.values));
}

AdjointTrajectory reversed_storage(const GeometryPtr& g, int nt) {
  AdjointTrajectory adj;
  const auto n = static_cast<std::size_t>(nt + 1);
  adj.p.assign(n, InteriorField::zeros(g));
  adj.q.assign(n, InteriorField::zeros(g));
  adj.q_Gamma.assign(n, BoundaryField::zeros(g));
  return adj;
}

void store(AdjointTrajectory& adj, const GeometryPtr& g, int k, const Vector& p, const Vector& q) {
  const auto i = static_cast<std::size_t>(k);
  adj.p[i] = {g, p};
  adj.q[i] = {g, q};
  adj.q_Gamma[i] = trace(adj.q[i]);
}

}  // namespace

AdjointTrajectory solve_adjoint_transpose(const LinearizedCoefficients& coeffs, const AdjointData& data,
                                          const SolverConfig& cfg) {
  check_inputs(coeffs, data, cfg);
  const GeometryPtr g = coeffs.geometry;
  const detail::StepContext c(g, cfg.dt(), cfg.tau);
  const int n = c.n();
  const int nt = cfg.time.nt;
  AdjointTrajectory adj = reversed_storage(g, nt);

  const Vector phiT = terminal_load(c, data);
  {
    // [[M, tau M + B], [K, -M]] [p; q] = [phiT; 0]
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, c.M(i));
      t.emplace_back(i, n + i, cfg.tau * c.M(i) + c.B(i));
      t.emplace_back(n + i, n + i, -c.M(i));
    }
    for (int k = 0; k < c.K.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(c.K, k); it; ++it) t.emplace_back(n + it.row(), it.col(), it.value());
    }
    SparseMatrix T(2 * n, 2 * n);
    T.setFromTriplets(t.begin(), t.end());
    detail::Factor lu;
    lu.compute(T);
    Vector rhs = Vector::Zero(2 * n);
    rhs.head(n) = phiT;
    const Vector x = lu.solve(rhs);
    store(adj, g, nt, x.head(n), x.tail(n));
  }

  detail::Factor lu;
  Vector p_next, q_next;
  for (int step = nt; step >= 1; --step) {
    Vector rhs = tracking_load(c, data, step);
    if (step == nt) {
      rhs += phiT;
    } else {
      const Vector e = detail::explicit_diag(c, coeffs, step);
      rhs += c.M.cwiseProduct(p_next) + (cfg.tau * c.M + c.B - c.dt * e).cwiseProduct(q_next);
    }
    SparseMatrix Jt = detail::jacobian(c, detail::implicit_diag(c, coeffs, step)).transpose();
    lu.compute(Jt);
    Vector full = Vector::Zero(2 * n);
    full.head(n) = rhs;
    const Vector x = lu.solve(full);
    p_next = x.head(n);
    q_next = x.tail(n) / c.dt;
    store(adj, g, step - 1, p_next, q_next);
  }
  return adj;
}

namespace {

// Operator S v = M N v + (tau M + B) v + theta (A v + d v) on the subspace
// Z = {w . v = 0}, solved by preconditioned CG with Galerkin projection.
class ZeroMeanSolver {
 public:
  ZeroMeanSolver(const detail::StepContext& c, const DecoupledOptions& opt) : c_(c), opt_(opt) {}

  Vector apply_MN(const Vector& v) const { return c_.M.cwiseProduct(apply_N(*c_.geometry, v, opt_.neumann_tol)); }

  Vector solve(const Vector& rhs, double theta, const Vector& d, const Vector& guess) const {
    Vector pre = c_.tau * c_.M + c_.B + theta * (Vector(c_.A.diagonal()) + d);
    pre = pre.cwiseMax(c_.tau * c_.M);
    auto apply = [&](const Vector& v) {
      Vector out = apply_MN(v) + (c_.tau * c_.M + c_.B).cwiseProduct(v);
      if (theta != 0.0) out += theta * (c_.A * v + d.cwiseProduct(v));
      return out;
    };
    auto pnorm = [&](const Vector& r) { return std::sqrt(r.dot(r.cwiseQuotient(pre))); };

    const Vector b = dual_project(rhs);
    const double target = opt_.cg_tol * pnorm(b);
    Vector q = primal_project(guess);
    if (pnorm(b) == 0.0) return Vector::Zero(b.size());
    Vector r = dual_project(rhs - apply(q));
    Vector z = primal_project(r.cwiseQuotient(pre));
    Vector dir = z;
    double rz = r.dot(z);
    for (int it = 0; it < opt_.cg_max; ++it) {
      if (pnorm(r) <= target) return q;
      const Vector sd = dual_project(apply(dir));
      const double curv = dir.dot(sd);
      if (!(curv > 0.0)) throw SolverDiverged("decoupled adjoint: operator lost positivity");
      const double alpha = rz / curv;
      q += alpha * dir;
      r -= alpha * sd;
      z = primal_project(r.cwiseQuotient(pre));
      const double rz_new = r.dot(z);
      dir = z + (rz_new / rz) * dir;
      rz = rz_new;
    }
    if (pnorm(r) <= 100.0 * target) return q;
    throw SolverDiverged("decoupled adjoint: no convergence in " + std::to_string(opt_.cg_max) + " iterations");
  }

  Vector primal_project(const Vector& v) const {
    return (v.array() - c_.M.dot(v) / c_.geometry->measure()).matrix();
  }
  Vector dual_project(const Vector& r) const { return r - c_.M * (r.sum() / c_.geometry->measure()); }

 private:
  const detail::StepContext& c_;
  DecoupledOptions opt_;
};

}  // namespace

AdjointTrajectory solve_adjoint_decoupled(const LinearizedCoefficients& coeffs, const AdjointData& data,
                                          const SolverConfig& cfg, const DecoupledOptions& opt) {
  check_inputs(coeffs, data, cfg);
  const GeometryPtr g = coeffs.geometry;
  const detail::StepContext c(g, cfg.dt(), cfg.tau);
  const int n = c.n();
  const int nt = cfg.time.nt;
  const double dt = c.dt;
  const ZeroMeanSolver solver(c, opt);

  std::vector<Vector> q(static_cast<std::size_t>(nt + 1)), nq(static_cast<std::size_t>(nt + 1));
  std::vector<double> sources(static_cast<std::size_t>(nt + 1), 0.0);

  const Vector phiT = terminal_load(c, data);
  const Vector zero = Vector::Zero(n);
  q[nt] = solver.solve(phiT, 0.0, zero, zero);
  nq[nt] = apply_N(*g, q[nt], opt.neumann_tol);
  const double m_T = (phiT.sum() - c.B.dot(q[nt])) / g->measure();

  for (int step = nt; step >= 1; --step) {
    const auto next = static_cast<std::size_t>(step);
    const Vector load = tracking_load(c, data, step);
    Vector rhs = load;
    Vector e = zero;
    if (step == nt) {
      rhs += phiT;
    } else {
      e = detail::explicit_diag(c, coeffs, step);
      rhs += c.M.cwiseProduct(nq[next]) + (cfg.tau * c.M + c.B - dt * e).cwiseProduct(q[next]);
    }
    const Vector d = detail::implicit_diag(c, coeffs, step);
    const auto k = static_cast<std::size_t>(step - 1);
    q[k] = solver.solve(rhs, dt, d, q[next]);
    nq[k] = apply_N(*g, q[k], opt.neumann_tol);
    // Testing the step with the constant 1 gives the change of the mean of p.
    const double change = c.B.dot(q[k]) - c.B.dot(q[next]) + dt * d.dot(q[k]) + dt * e.dot(q[next]) - load.sum();
    sources[next] = change / dt;
  }

  AdjointTrajectory adj = reversed_storage(g, nt);
  for (int k = 0; k <= nt; ++k) {
    const double m = apply_M(sources, g->measure(), m_T, k, dt);
    const auto i = static_cast<std::size_t>(k);
    store(adj, g, k, (nq[i].array() + m).matrix(), q[i]);
  }
  return adj;
}

DualityResult check_duality(const AdjointTrajectory& adj, const TangentTrajectory& tan, const AdjointData& data,
                            const ControlSignal& h) {
  DualityResult r;
  const int nt = h.time.nt;
  const double dt = h.time.dt();
  if (adj.nt() != nt || static_cast<int>(tan.xi.size()) != nt + 1) {
    throw ConfigMismatch("check_duality: time grids disagree");
  }
  for (int n = 1; n <= nt; ++n) {
    const auto i = static_cast<std::size_t>(n);
    r.lhs += dt * dot_HGamma(adj.q_Gamma[i - 1], h.at(n));
    r.rhs += dt * (dot_H(data.phiQ[i], tan.xi[i].interior) + dot_HGamma(data.phiSigma[i], tan.xi[i].boundary));
  }
  const auto last = static_cast<std::size_t>(nt);
  r.rhs += dot_H(data.phiOmega, tan.xi[last].interior) + dot_HGamma(data.phiGamma, tan.xi[last].boundary);
  r.residual = std::abs(r.lhs - r.rhs) / (std::abs(r.lhs) + std::abs(r.rhs) + 1e-30);
  return r;
}

double max_abs_mean(const std::vector<InteriorField>& series) {
  double m = 0.0;
  for (const auto& f : series) m = std::max(m, std::abs(mean_value(f)));
  return m;
}

}  // namespace chc
