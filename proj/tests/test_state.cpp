#include <cmath>

#include "chc/errors.hpp"
#include "chc/state.hpp"
#include "chc/verify.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace chc;

namespace {

const PotentialPair kQuartic{PotentialSpec::regular_quartic(), PotentialSpec::regular_quartic(), 1.0, 0.0};
const PotentialPair kLog{PotentialSpec::logarithmic(3.0), PotentialSpec::logarithmic(3.0), 1.0, 0.0};

SolverConfig config(double T, int nt, Scheme scheme = Scheme::FullyImplicit) {
  SolverConfig c;
  c.time = {T, nt};
  c.scheme = scheme;
  return c;
}

InteriorField cosine(const GeometryPtr& g, double mean, double amp) {
  const double lx = g->lx();
  return InteriorField::from_function(g, [=](double x, double y) {
    return mean + amp * std::cos(2 * M_PI * x / lx) * (g->mode() == GeometryMode::Strip2D ? std::cos(M_PI * y / g->ly()) : 1.0);
  });
}

// Independent recomputation of the free energy.
double energy_oracle(const Geometry& g, const Vector& y, const PotentialPair& pair) {
  Vector fy(y.size());
  for (int i = 0; i < y.size(); ++i) fy(i) = eval(pair.bulk, 0, y(i));
  Vector yb(g.boundary_count()), fb(g.boundary_count());
  for (int b = 0; b < g.boundary_count(); ++b) {
    yb(b) = y(g.boundary_node(b));
    fb(b) = eval(pair.boundary, 0, yb(b));
  }
  return 0.5 * oracle::quad_gradient_sq(g, y) + oracle::quad_interior(g, fy) + 0.5 * oracle::quad_surface_gradient_sq(g, yb) +
         oracle::quad_boundary(g, fb);
}

}  // namespace

TEST_CASE("zero state is stationary") {
  for (const auto& g : {Geometry::interval(17, 1.0), Geometry::strip(8, 5, 1.0, 0.5)}) {
    const auto cfg = config(0.1, 10);
    const Trajectory t = solve_state(InteriorField::zeros(g), ControlSignal::zeros(g, cfg.time), kQuartic, cfg);
    for (const auto& s : t.snapshots) {
      CHECK(s.y.interior.values.cwiseAbs().maxCoeff() == 0.0);
      CHECK(s.w.values.cwiseAbs().maxCoeff() == 0.0);
    }
    const ResidualReport r = residual_check(t, kQuartic, t.control);
    CHECK(r.max_residual == 0.0);
  }
}

TEST_CASE("property: mass is conserved for random controls") {
  oracle::Rng rng(42);
  for (const auto& g : {Geometry::interval(33, 1.0), Geometry::strip(12, 7, 1.0, 0.5)}) {
    for (const auto& pair : {kQuartic, kLog}) {
      const auto cfg = config(0.05, 40);
      const InteriorField y0 = oracle::smooth_interior(g, rng, 0.1, 0.2);
      const double m0 = oracle::quad_interior(*g, y0.values) / g->measure();
      const ControlSignal u = oracle::random_signal(g, cfg.time, rng, 1.0);
      const Trajectory t = solve_state(y0, u, pair, cfg);
      for (const auto& s : t.snapshots) {
        const double m = oracle::quad_interior(*g, s.y.interior.values) / g->measure();
        CHECK(std::abs(m - m0) <= 1e-11 * (1 + std::abs(m0)));
      }
    }
  }
}

TEST_CASE("free energy") {
  const auto g = Geometry::strip(10, 6, 1.0, 0.5);
  const auto zero = InteriorField::zeros(g);
  CHECK(free_energy(zero, kQuartic) == doctest::Approx(0.25 * (g->measure() + g->boundary_measure())).epsilon(1e-14));
  CHECK(free_energy(zero, kLog) == 0.0);

  oracle::Rng rng(9);
  for (const auto& geom : {g, Geometry::interval(41, 2.0)}) {
    for (const auto& pair : {kQuartic, kLog}) {
      const InteriorField y = oracle::smooth_interior(geom, rng, 0.0, 0.3);
      CHECK(free_energy(y, pair) == doctest::Approx(energy_oracle(*geom, y.values, pair)).epsilon(1e-12));
    }
  }
}

TEST_CASE("convex split dissipates energy without control") {
  for (const auto& g : {Geometry::interval(65, 1.0), Geometry::strip(16, 9, 1.0, 0.5)}) {
    for (const auto& pair : {kQuartic, kLog}) {
      const auto cfg = config(0.1, 50, Scheme::ConvexSplit);
      const Trajectory t = solve_state(cosine(g, 0.05, 0.6), ControlSignal::zeros(g, cfg.time), pair, cfg);
      for (int n = 0; n < t.nt(); ++n) {
        const double e0 = energy_oracle(*g, t.snapshots[n].y.interior.values, pair);
        const double e1 = energy_oracle(*g, t.snapshots[n + 1].y.interior.values, pair);
        CHECK(e1 <= e0 + 1e-10);
      }
    }
  }
}

TEST_CASE("logarithmic runs stay inside the guard band") {
  const auto g = Geometry::interval(65, 1.0);
  auto cfg = config(0.05, 50);
  cfg.guard_delta = 1e-6;
  const ControlSignal u = ControlSignal::constant(g, cfg.time, 2.0);
  const Trajectory t = solve_state(cosine(g, 0.3, 0.65), u, kLog, cfg);
  for (const auto& s : t.snapshots) {
    CHECK(s.y.interior.values.maxCoeff() <= 1 - cfg.guard_delta);
    CHECK(s.y.interior.values.minCoeff() >= -1 + cfg.guard_delta);
  }
  CHECK_THROWS_AS(solve_state(InteriorField::constant(g, 1.0), u, kLog, cfg), DomainViolation);
}

TEST_CASE("residual check flags a corrupted snapshot") {
  const auto g = Geometry::interval(33, 1.0);
  auto cfg = config(0.05, 20);
  const ControlSignal u = ControlSignal::constant(g, cfg.time, 0.3);
  Trajectory t = solve_state(cosine(g, 0.0, 0.5), u, kQuartic, cfg);
  const ResidualReport ok = residual_check(t, kQuartic, u);
  CHECK(ok.max_residual <= 10 * cfg.newton_tol);
  CHECK(ok.first_flagged(10 * cfg.newton_tol) == -1);

  t.snapshots[7].y.interior.values(10) += 1e-3;
  t.snapshots[7].y = CoupledField::from_interior(t.snapshots[7].y.interior);
  CHECK(residual_check(t, kQuartic, u).first_flagged(10 * cfg.newton_tol) == 7);
}

TEST_CASE("first-order self-convergence in time") {
  const auto g = Geometry::interval(33, 1.0);
  const InteriorField y0 = cosine(g, 0.1, 0.4);
  auto run = [&](int nt) {
    const auto cfg = config(0.05, nt);
    const ControlSignal u = smooth_control(g, cfg.time, {0.2, 0.5, 0.3, -0.2});
    return solve_state(y0, u, kQuartic, cfg).snapshots.back().y.interior.values;
  };
  const Vector ref = run(256);
  auto err = [&](const Vector& y) {
    const Vector d = (y - ref).cwiseAbs2();
    const Vector db = Eigen::Vector2d(d(0), d(d.size() - 1));
    return std::sqrt(oracle::quad_interior(*g, d) + db.sum());
  };
  const double e16 = err(run(16)), e32 = err(run(32));
  const double order = std::log2(e16 / e32);
  CHECK(order >= 0.8);
  CHECK(order <= 1.2);
}

TEST_CASE("solver configuration errors") {
  auto cfg = config(0.1, 10);
  cfg.tau = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigMismatch);
  cfg = config(0.1, 10);
  cfg.newton_max = 1;
  cfg.newton_tol = 1e-300;
  const auto g = Geometry::interval(17, 1.0);
  CHECK_THROWS_AS(solve_state(cosine(g, 0.0, 0.5), ControlSignal::constant(g, cfg.time, 1.0), kQuartic, cfg),
                  NewtonDiverged);
}
