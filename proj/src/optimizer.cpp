#include "chc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "chc/errors.hpp"
#include "chc/sensitivity.hpp"

namespace chc {

double ControlProblem::weight_scale() const {
  const double w = std::max({cost.bQ, cost.bSigma, cost.bOmega, cost.bGamma, cost.b0});
  return w > 0.0 ? w : 1.0;
}

double evaluate_cost(const Trajectory& traj, const ControlSignal& u, const CostSpec& cost) {
  const Geometry& g = traj.geometry();
  const TimeGrid& time = traj.config.time;
  cost.validate(g, time);
  if (!(u.time == time)) throw ConfigMismatch("evaluate_cost: control and trajectory time grids differ");
  const Vector& w = g.weights();
  const Vector& wb = g.boundary_weights();
  const double dt = time.dt();
  double jq = 0.0, js = 0.0, ju = 0.0;
  for (std::size_t n = 1; n < traj.snapshots.size(); ++n) {
    const auto& y = traj.snapshots[n].y;
    jq += (w.array() * (y.interior.values - cost.zQ[n].values).array().square()).sum();
    js += (wb.array() * (y.boundary.values - cost.zSigma[n].values).array().square()).sum();
    ju += (wb.array() * u.values[n].array().square()).sum();
  }
  const auto& yT = traj.snapshots.back().y;
  const double jo = (w.array() * (yT.interior.values - cost.zOmega.values).array().square()).sum();
  const double jg = (wb.array() * (yT.boundary.values - cost.zGamma.values).array().square()).sum();
  return 0.5 * (cost.bQ * dt * jq + cost.bSigma * dt * js + cost.bOmega * jo + cost.bGamma * jg + cost.b0 * dt * ju);
}

ControlSignal gradient_from_adjoint(const AdjointTrajectory& adj, const ControlSignal& u, double b0) {
  ControlSignal g = scaled(u, b0);
  g.box = nullptr;
  for (int n = 1; n < g.samples(); ++n) {
    g.values[static_cast<std::size_t>(n)] += adj.q_Gamma[static_cast<std::size_t>(n - 1)].values;
  }
  return g;
}

GradientEvaluation evaluate_gradient(const ControlProblem& prob, const ControlSignal& u) {
  GradientEvaluation out;
  out.trajectory = solve_state(prob.y0, u, prob.pair, prob.cfg);
  out.cost = evaluate_cost(out.trajectory, u, prob.cost);
  const LinearizedCoefficients k = linearize(out.trajectory, prob.pair);
  const AdjointData data = build_adjoint_data(out.trajectory, prob.cost);
  out.adjoint = solve_adjoint_transpose(k, data, prob.cfg);
  out.gradient = gradient_from_adjoint(out.adjoint, u, prob.cost.b0);
  return out;
}

ControlSignal reduced_gradient(const ControlProblem& prob, const ControlSignal& u) {
  return evaluate_gradient(prob, u).gradient;
}

double reduced_cost(const ControlProblem& prob, const ControlSignal& u) {
  return evaluate_cost(solve_state(prob.y0, u, prob.pair, prob.cfg), u, prob.cost);
}

double stationarity(const ControlSignal& u, const ControlSignal& g, const ControlBoxPtr& box, double gamma0) {
  const ControlSignal p = project_box(add_scaled(u, -gamma0, g), box);
  return norm_sigma(add_scaled(u, -1.0, p));
}

namespace {

// Uniform draw in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

ViCertificate check_vi(const ControlSignal& u, const ControlSignal& g, const ControlBoxPtr& box, int n_probes,
                       double b0, double gamma0, std::uint64_t seed, double projection_tol) {
  ViCertificate c;
  const Geometry& geo = *u.geometry;
  ControlSignal lo = u, hi = u;
  lo.values = box->u_min;
  hi.values = box->u_max;
  // g = q_Gamma + b0 u. At an interior optimum the two parts cancel, so the
  // scale uses their separate sizes rather than ||g||.
  const ControlSignal qg = add_scaled(g, -b0, u);
  c.scale = (norm_sigma(qg) + b0 * norm_sigma(u)) * norm_sigma(add_scaled(hi, -1.0, lo));
  c.tol = 1e-8 * c.scale;

  double best = std::numeric_limits<double>::infinity();
  auto probe = [&](const ControlSignal& v) {
    best = std::min(best, dot_sigma(g, add_scaled(v, -1.0, u)));
    ++c.probes;
  };
  probe(lo);
  probe(hi);
  probe(project_box(add_scaled(u, -gamma0, g), box));
  std::mt19937_64 rng(seed);
  for (int k = 0; k < n_probes; ++k) {
    ControlSignal v = u;
    Vector level(geo.boundary_count());
    for (int b = 0; b < level.size(); ++b) level(b) = uniform01(rng);
    const double theta = 0.05 + 0.95 * uniform01(rng);
    for (std::size_t n = 0; n < v.values.size(); ++n) {
      // Time-constant only if the bounds are; clamped into the box either way.
      const Vector target = box->u_min[n] + level.cwiseProduct(box->u_max[n] - box->u_min[n]);
      v.values[n] = u.values[n] + theta * (target - u.values[n]);
    }
    probe(v);
  }
  c.min_probe = best;
  c.vi_pass = best >= -c.tol;

  const bool budget_inactive = derivative_norm(u) < box->M0 * (1.0 - 1e-6);
  if (b0 > 0.0 && budget_inactive) {
    ControlSignal target = u;
    for (std::size_t n = 1; n < target.values.size(); ++n) {
      const Vector qg = g.values[n] - b0 * u.values[n];
      target.values[n] = (-qg / b0).cwiseMax(box->u_min[n]).cwiseMin(box->u_max[n]);
    }
    c.projection_checked = true;
    c.projection_residual = norm_sigma(add_scaled(u, -1.0, target)) / (norm_sigma(u) + 1e-30);
    c.projection_pass = c.projection_residual <= projection_tol;
  }
  return c;
}

OptimizationReport projected_gradient_descent(const ControlProblem& prob, const ControlSignal& u0,
                                              const PgdOptions& opt) {
  if (!prob.box) throw ConfigMismatch("optimizer needs a control box");
  if (!is_feasible(u0, *prob.box, 1e-12)) throw ConfigMismatch("initial control is not admissible");
  const double gamma0 = opt.step0 / prob.weight_scale();

  OptimizationReport rep;
  ControlSignal u = u0;
  u.box = prob.box;
  GradientEvaluation ev = evaluate_gradient(prob, u);
  double stat = stationarity(u, ev.gradient, prob.box, gamma0);
  rep.stat_tol = opt.stat_tol > 0.0 ? opt.stat_tol : 1e-8 * (stat + 1.0);
  rep.iterates.push_back({0, ev.cost, stat, 0.0, false});

  for (int it = 1; it <= opt.max_iter; ++it) {
    if (stat <= rep.stat_tol) break;
    double gamma = gamma0;
    bool accepted = false;
    ProjectionInfo info;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt, gamma *= opt.shrink) {
      ControlSignal trial = project_box(add_scaled(u, -gamma, ev.gradient), prob.box, &info);
      if (!info.feasible) {
        rep.budget_infeasible = true;
        break;
      }
      double jt = 0.0;
      try {
        jt = reduced_cost(prob, trial);
      } catch (const NewtonDiverged&) {
        continue;
      } catch (const DomainViolation&) {
        continue;
      }
      const double decrease = dot_sigma(ev.gradient, add_scaled(trial, -1.0, u));
      if (jt <= ev.cost + opt.armijo_c * decrease) {
        u = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (rep.budget_infeasible) break;
    if (!accepted) {
      rep.line_search_stalled = true;
      break;
    }
    ev = evaluate_gradient(prob, u);
    stat = stationarity(u, ev.gradient, prob.box, gamma0);
    rep.iterates.push_back({it, ev.cost, stat, gamma, info.budget_active});
  }
  rep.converged = stat <= rep.stat_tol;
  rep.control = u;
  rep.gradient = ev.gradient;
  rep.trajectory = std::move(ev.trajectory);
  rep.certificate = check_vi(u, rep.gradient, prob.box, opt.vi_probes, prob.cost.b0, gamma0, opt.seed);
  return rep;
}

}  // namespace chc
