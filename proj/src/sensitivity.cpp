#include "chc/sensitivity.hpp"

#include "chc/errors.hpp"
#include "step_system.hpp"

namespace chc {

LinearizedCoefficients linearize(const Trajectory& traj, const PotentialPair& pair) {
  LinearizedCoefficients k;
  const GeometryPtr g = traj.snapshots.front().w.geometry;
  k.geometry = g;
  k.config = traj.config;
  const Scheme scheme = traj.config.scheme;
  for (const auto& s : traj.snapshots) {
    const Vector& y = s.y.interior.values;
    const Vector& yg = s.y.boundary.values;
    Vector lam(y.size()), lam_imp(y.size()), pi(y.size());
    for (int i = 0; i < y.size(); ++i) {
      lam(i) = eval(pair.bulk, 2, y(i));
      const ConvexConcaveSplit d = convex_concave_split_derivative(pair.bulk, y(i));
      lam_imp(i) = scheme == Scheme::FullyImplicit ? lam(i) : d.beta;
      pi(i) = scheme == Scheme::FullyImplicit ? 0.0 : d.pi;
    }
    Vector lg(yg.size()), lg_imp(yg.size()), pig(yg.size());
    for (int b = 0; b < yg.size(); ++b) {
      lg(b) = eval(pair.boundary, 2, yg(b));
      const ConvexConcaveSplit d = convex_concave_split_derivative(pair.boundary, yg(b));
      lg_imp(b) = scheme == Scheme::FullyImplicit ? lg(b) : d.beta;
      pig(b) = scheme == Scheme::FullyImplicit ? 0.0 : d.pi;
    }
    k.lambda.push_back({g, std::move(lam)});
    k.lambda_Gamma.push_back({g, std::move(lg)});
    k.lambda_implicit.push_back({g, std::move(lam_imp)});
    k.lambda_Gamma_implicit.push_back({g, std::move(lg_imp)});
    k.pi_explicit.push_back({g, std::move(pi)});
    k.pi_Gamma_explicit.push_back({g, std::move(pig)});
  }
  return k;
}

TangentTrajectory solve_tangent(const LinearizedCoefficients& coeffs, const ControlSignal& h,
                                const SolverConfig& cfg) {
  cfg.validate();
  h.validate();
  if (!(h.time == cfg.time) || coeffs.nt() != cfg.time.nt || !(coeffs.config.time == cfg.time)) {
    throw ConfigMismatch("tangent: coefficients, direction and solver disagree on the time grid");
  }
  if (coeffs.config.scheme != cfg.scheme || coeffs.config.tau != cfg.tau) {
    throw ConfigMismatch("tangent: solver config differs from the linearized trajectory");
  }
  require_same_geometry(*coeffs.geometry, *h.geometry);
  const GeometryPtr g = coeffs.geometry;
  const detail::StepContext c(g, cfg.dt(), cfg.tau);
  const int n = c.n();

  TangentTrajectory tan;
  Vector xi = Vector::Zero(n);
  Vector eta = -detail::lift(*g, h.values[0]).cwiseProduct(c.B).cwiseQuotient(c.M);
  tan.xi.push_back(CoupledField::from_interior({g, xi}));
  tan.eta.push_back({g, eta});

  detail::Factor lu;
  for (int step = 1; step <= cfg.time.nt; ++step) {
    const Vector e = detail::explicit_diag(c, coeffs, step - 1);
    Vector rhs(2 * n);
    rhs.head(n) = c.M.cwiseProduct(xi);
    rhs.tail(n) = detail::explicit_coupling(c, e).cwiseProduct(xi) +
                  c.B.cwiseProduct(detail::lift(*g, h.values[static_cast<std::size_t>(step)]));
    lu.compute(detail::jacobian(c, detail::implicit_diag(c, coeffs, step)));
    const Vector x = lu.solve(rhs);
    xi = x.head(n);
    eta = x.tail(n);
    tan.xi.push_back(CoupledField::from_interior({g, xi}));
    tan.eta.push_back({g, eta});
  }
  return tan;
}

}  // namespace chc
