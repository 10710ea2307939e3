#include "chc/state.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "chc/errors.hpp"
#include "step_system.hpp"

namespace chc {

void SolverConfig::validate() const {
  if (!(time.T > 0.0) || time.nt < 1) throw ConfigMismatch("solver needs T > 0 and nt >= 1");
  if (!(tau > 0.0)) throw ConfigMismatch("solver needs tau > 0");
  if (!(newton_tol > 0.0) || newton_max < 1) throw ConfigMismatch("solver needs newton_tol > 0 and newton_max >= 1");
  if (!(guard_delta > 0.0)) throw ConfigMismatch("solver needs guard_delta > 0");
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

bool singular(const PotentialPair& p) { return p.bulk.singular() || p.boundary.singular(); }

bool in_band(const PotentialPair& p, const Vector& y, double delta) {
  if (!singular(p)) return y.allFinite();
  return y.allFinite() && y.maxCoeff() <= 1.0 - delta && y.minCoeff() >= -1.0 + delta;
}

Vector quasi_static_w(const detail::StepContext& c, const PotentialPair& p, const Vector& y, const Vector& u_lifted) {
  const detail::NodalPotential f = detail::implicit_force(c, p, Scheme::FullyImplicit, y);
  const Vector rhs = c.A * y + detail::weighted(c, f) - c.B.cwiseProduct(u_lifted);
  return rhs.cwiseQuotient(c.M);
}

}  // namespace

Trajectory solve_state(const CoupledField& y0, const ControlSignal& u, const PotentialPair& pair,
                       const SolverConfig& cfg) {
  cfg.validate();
  validate(y0);
  u.validate();
  if (!y0.trace_compatible()) throw GeometryMismatch("initial datum is not trace compatible");
  require_same_geometry(*y0.interior.geometry, *u.geometry);
  if (!(u.time == cfg.time)) throw ConfigMismatch("control and solver use different time grids");
  if (!in_band(pair, y0.interior.values, cfg.guard_delta)) {
    throw DomainViolation("initial datum leaves the guard band of the potential domain");
  }

  const GeometryPtr g = y0.interior.geometry;
  const detail::StepContext c(g, cfg.dt(), cfg.tau);
  const int n = c.n();
  const int nt = cfg.time.nt;

  Trajectory traj;
  traj.control = u;
  traj.config = cfg;
  traj.pair = pair;
  traj.snapshots.reserve(static_cast<std::size_t>(nt + 1));
  traj.newton_iterations.assign(static_cast<std::size_t>(nt + 1), 0);
  traj.newton_residuals.assign(static_cast<std::size_t>(nt + 1), 0.0);

  Vector y = y0.interior.values;
  Vector w = quasi_static_w(c, pair, y, detail::lift(*g, u.values[0]));
  auto push = [&](int step) {
    InteriorField yi{g, y};
    traj.snapshots.push_back({CoupledField::from_interior(std::move(yi)), InteriorField{g, w}, cfg.time.t(step)});
  };
  push(0);

  detail::Factor lu;
  for (int step = 1; step <= nt; ++step) {
    const Vector y_prev = y;
    const Vector u_lifted = detail::lift(*g, u.values[static_cast<std::size_t>(step)]);
    Vector R = detail::residual(c, pair, cfg.scheme, y, w, y_prev, u_lifted);
    double res = detail::residual_norm(c, R);
    int it = 0;
    bool converged = res <= cfg.newton_tol;
    while (!converged) {
      if (it == cfg.newton_max) {
        throw NewtonDiverged("Newton did not converge in " + std::to_string(cfg.newton_max) +
                                 " iterations at step " + std::to_string(step) + " (residual " +
                                 sci(res) + ")",
                             step);
      }
      ++it;
      const Vector d = detail::weighted(c, detail::implicit_slope(c, pair, cfg.scheme, y));
      lu.compute(detail::jacobian(c, d));
      const Vector delta = -lu.solve(R);
      const double xscale = 1.0 + std::max(y.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff());
      const bool tiny = delta.cwiseAbs().maxCoeff() <= 1e-12 * xscale;

      double alpha = 1.0;
      bool accepted = false;
      bool band_blocked = true;
      for (int halving = 0; halving <= 30; ++halving, alpha *= 0.5) {
        const Vector yt = y + alpha * delta.head(n);
        if (!in_band(pair, yt, cfg.guard_delta)) continue;
        band_blocked = false;
        const Vector wt = w + alpha * delta.tail(n);
        Vector Rt = detail::residual(c, pair, cfg.scheme, yt, wt, y_prev, u_lifted);
        const double rt = detail::residual_norm(c, Rt);
        if (rt < res || rt <= cfg.newton_tol) {
          y = yt;
          w = wt;
          R = std::move(Rt);
          res = rt;
          accepted = true;
          break;
        }
      }
      if (accepted) {
        // A negligible Newton step means the residual sits at its roundoff floor.
        converged = res <= cfg.newton_tol || tiny;
        continue;
      }
      // No decrease left and a negligible Newton step: roundoff floor.
      if (tiny) break;
      if (band_blocked) {
        throw DomainViolation("Newton iterate left the guard band at step " + std::to_string(step));
      }
      throw NewtonDiverged("line search stalled at step " + std::to_string(step) + " (residual " +
                               sci(res) + ")",
                           step);
    }
    traj.newton_iterations[static_cast<std::size_t>(step)] = it;
    traj.newton_residuals[static_cast<std::size_t>(step)] = res;
    push(step);
  }
  return traj;
}

Trajectory solve_state(const InteriorField& y0, const ControlSignal& u, const PotentialPair& pair,
                       const SolverConfig& cfg) {
  return solve_state(CoupledField::from_interior(y0), u, pair, cfg);
}

double free_energy(const InteriorField& y, const PotentialPair& pair) {
  validate(y);
  const Geometry& g = *y.geometry;
  const BoundaryField yg = trace(y);
  double e = 0.5 * gradient_product(y, y) + 0.5 * boundary_gradient_product(yg, yg);
  for (int i = 0; i < g.node_count(); ++i) e += g.weights()(i) * eval(pair.bulk, 0, y.values(i));
  for (int b = 0; b < g.boundary_count(); ++b) e += g.boundary_weights()(b) * eval(pair.boundary, 0, yg.values(b));
  return e;
}

double free_energy(const StateSnapshot& s, const PotentialPair& pair) { return free_energy(s.y.interior, pair); }

int ResidualReport::first_flagged(double limit) const {
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    if (!(residuals[k] <= limit)) return static_cast<int>(k);
  }
  return -1;
}

ResidualReport residual_check(const Trajectory& traj, const PotentialPair& pair, const ControlSignal& u) {
  const Geometry& g = traj.geometry();
  const SolverConfig& cfg = traj.config;
  const double dt = cfg.dt();
  const Vector& wt = g.weights();
  const Vector& wb = g.boundary_weights();
  ResidualReport rep;
  rep.residuals.assign(traj.snapshots.size(), 0.0);

  // Second equation tested with every nodal basis function, as a nodal vector.
  auto chem_residual = [&](const InteriorField& y, const InteriorField& w, const Vector& bulk_force,
                           const Vector& bnd_force, const Vector& dy, const Vector& ub) {
    const BoundaryField yg = trace(y);
    Vector r = -wt.cwiseProduct(w.values) + (cfg.tau / dt) * wt.cwiseProduct(dy) + g.stiffness() * y.values +
               wt.cwiseProduct(bulk_force);
    const Vector dyg = g.restrict_to_boundary(dy);
    const Vector rb = wb.cwiseProduct(dyg) / dt + g.boundary_stiffness() * yg.values + wb.cwiseProduct(bnd_force - ub);
    r += g.lift_from_boundary(rb);
    return r;
  };
  auto norm2 = [&](const Vector& r) {
    return (r.array().square() / (wt + g.lifted_boundary_weights()).array()).sum();
  };

  {
    const auto& s = traj.snapshots.front();
    Vector fb(g.node_count()), gb(g.boundary_count());
    for (int i = 0; i < g.node_count(); ++i) fb(i) = eval(pair.bulk, 1, s.y.interior.values(i));
    for (int b = 0; b < g.boundary_count(); ++b) gb(b) = eval(pair.boundary, 1, s.y.boundary.values(b));
    const Vector zero = Vector::Zero(g.node_count());
    // dy = 0 removes the time-derivative terms.
    rep.residuals[0] = std::sqrt(norm2(chem_residual(s.y.interior, s.w, fb, gb, zero, u.values[0])));
  }
  for (std::size_t n = 1; n < traj.snapshots.size(); ++n) {
    const auto& s0 = traj.snapshots[n - 1];
    const auto& s1 = traj.snapshots[n];
    const Vector dy = s1.y.interior.values - s0.y.interior.values;
    const Vector r1 = dy / dt + neg_laplacian(s1.w).values;
    const double e1 = (wt.array() * r1.array().square()).sum();

    Vector fb(g.node_count()), gb(g.boundary_count());
    for (int i = 0; i < g.node_count(); ++i) {
      const double a = s1.y.interior.values(i);
      const double b = s0.y.interior.values(i);
      fb(i) = cfg.scheme == Scheme::FullyImplicit
                  ? eval(pair.bulk, 1, a)
                  : convex_concave_split(pair.bulk, a).beta + convex_concave_split(pair.bulk, b).pi;
    }
    for (int k = 0; k < g.boundary_count(); ++k) {
      const double a = s1.y.boundary.values(k);
      const double b = s0.y.boundary.values(k);
      gb(k) = cfg.scheme == Scheme::FullyImplicit
                  ? eval(pair.boundary, 1, a)
                  : convex_concave_split(pair.boundary, a).beta + convex_concave_split(pair.boundary, b).pi;
    }
    const double e2 = norm2(chem_residual(s1.y.interior, s1.w, fb, gb, dy, u.values[n]));
    rep.residuals[n] = std::sqrt(e1 + e2);
  }
  for (std::size_t k = 0; k < rep.residuals.size(); ++k) {
    if (rep.residuals[k] > rep.max_residual) {
      rep.max_residual = rep.residuals[k];
      rep.worst_step = static_cast<int>(k);
    }
  }
  return rep;
}

}  // namespace chc
