#include <cmath>

#include "chc/adjoint.hpp"
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
  c.newton_tol = 1e-12;
  return c;
}

AdjointData make_random_data(const GeometryPtr& g, const TimeGrid& time, oracle::Rng& rng, bool terminal) {
  AdjointData d;
  for (int n = 0; n <= time.nt; ++n) {
    d.phiQ.push_back(oracle::random_interior(g, rng));
    d.phiSigma.push_back(oracle::random_boundary(g, rng));
  }
  d.phiOmega = terminal ? oracle::random_interior(g, rng) : InteriorField::zeros(g);
  d.phiGamma = terminal ? oracle::random_boundary(g, rng) : BoundaryField::zeros(g);
  return d;
}

AdjointData zero_data(const GeometryPtr& g, const TimeGrid& time) {
  AdjointData d;
  d.phiQ.assign(time.nt + 1, InteriorField::zeros(g));
  d.phiSigma.assign(time.nt + 1, BoundaryField::zeros(g));
  d.phiOmega = InteriorField::zeros(g);
  d.phiGamma = BoundaryField::zeros(g);
  return d;
}

struct Setup {
  GeometryPtr g;
  SolverConfig cfg;
  Trajectory traj;
  LinearizedCoefficients coeffs;
};

Setup setup(const GeometryPtr& g, const PotentialPair& pair, Scheme scheme, std::uint64_t seed) {
  oracle::Rng rng(seed);
  const auto cfg = config(0.05, 12, scheme);
  Trajectory t = solve_state(oracle::smooth_interior(g, rng, 0.05, 0.4), oracle::random_signal(g, cfg.time, rng), pair, cfg);
  LinearizedCoefficients c = linearize(t, pair);
  return {g, cfg, std::move(t), std::move(c)};
}

}  // namespace

TEST_CASE("adjoint data") {
  oracle::Rng rng(1);
  const auto g = Geometry::strip(8, 5, 1.0, 0.5);
  const auto cfg = config(0.05, 6);
  const Trajectory t = solve_state(oracle::smooth_interior(g, rng, 0.0, 0.3), oracle::random_signal(g, cfg.time, rng), kQuartic, cfg);

  CostSpec c = CostSpec::zeros(g, cfg.time);
  c.bQ = 1.0;
  c.bSigma = 2.0;
  c.bOmega = 3.0;
  c.bGamma = 4.0;
  for (int n = 0; n <= t.nt(); ++n) {
    c.zQ[n] = t.snapshots[n].y.interior;
    c.zSigma[n] = t.snapshots[n].y.boundary;
  }
  c.zOmega = t.snapshots.back().y.interior;
  c.zGamma = t.snapshots.back().y.boundary;
  const AdjointData zero = build_adjoint_data(t, c);
  for (const auto& f : zero.phiQ) CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& f : zero.phiSigma) CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.phiOmega.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.phiGamma.values.cwiseAbs().maxCoeff() == 0.0);

  CostSpec d = CostSpec::zeros(g, cfg.time);
  d.bQ = 1.0;
  const AdjointData plain = build_adjoint_data(t, d);
  for (int n = 0; n <= t.nt(); ++n) CHECK(plain.phiQ[n].values == t.snapshots[n].y.interior.values);

  CostSpec r = CostSpec::zeros(g, cfg.time);
  r.bQ = 0.7;
  r.bSigma = 1.3;
  r.bOmega = 0.4;
  r.bGamma = 2.2;
  for (int n = 0; n <= t.nt(); ++n) {
    r.zQ[n] = oracle::random_interior(g, rng);
    r.zSigma[n] = oracle::random_boundary(g, rng);
  }
  r.zOmega = oracle::random_interior(g, rng);
  r.zGamma = oracle::random_boundary(g, rng);
  const AdjointData rd = build_adjoint_data(t, r);
  for (int n = 0; n <= t.nt(); ++n) {
    CHECK((rd.phiQ[n].values - 0.7 * (t.snapshots[n].y.interior.values - r.zQ[n].values)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((rd.phiSigma[n].values - 1.3 * (t.snapshots[n].y.boundary.values - r.zSigma[n].values)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  CHECK((rd.phiOmega.values - 0.4 * (t.snapshots.back().y.interior.values - r.zOmega.values)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((rd.phiGamma.values - 2.2 * (t.snapshots.back().y.boundary.values - r.zGamma.values)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("zero data gives the zero adjoint") {
  const Setup s = setup(Geometry::strip(8, 5, 1.0, 0.5), kQuartic, Scheme::FullyImplicit, 2);
  const AdjointData d = zero_data(s.g, s.cfg.time);
  for (const auto& adj : {solve_adjoint_transpose(s.coeffs, d, s.cfg), solve_adjoint_decoupled(s.coeffs, d, s.cfg)}) {
    for (int k = 0; k <= adj.nt(); ++k) {
      CHECK(adj.p[k].values.cwiseAbs().maxCoeff() == 0.0);
      CHECK(adj.q[k].values.cwiseAbs().maxCoeff() == 0.0);
      CHECK(adj.q_Gamma[k].values.cwiseAbs().maxCoeff() == 0.0);
    }
  }
  const ControlSignal h = ControlSignal::zeros(s.g, s.cfg.time);
  const DualityResult r = check_duality(solve_adjoint_transpose(s.coeffs, d, s.cfg), solve_tangent(s.coeffs, h, s.cfg), d, h);
  CHECK(r.lhs == 0.0);
  CHECK(r.rhs == 0.0);
}

TEST_CASE("terminal bookkeeping: phiOmega = 1") {
  const Setup s = setup(Geometry::interval(33, 1.0), kQuartic, Scheme::FullyImplicit, 3);
  AdjointData d = zero_data(s.g, s.cfg.time);
  d.phiOmega = InteriorField::constant(s.g, 1.0);
  const AdjointTrajectory adj = solve_adjoint_transpose(s.coeffs, d, s.cfg);
  const int nt = adj.nt();
  CHECK(oracle::quad_interior(*s.g, adj.p[nt].values) / s.g->measure() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(oracle::quad_interior(*s.g, adj.q[nt].values)) <= 1e-12);
}

TEST_CASE("property: duality on random data and directions") {
  int idx = 0;
  for (const auto& g : {Geometry::interval(33, 1.0), Geometry::strip(8, 5, 1.0, 0.5)}) {
    for (const auto& pair : {kQuartic, kLog}) {
      for (const auto scheme : {Scheme::FullyImplicit, Scheme::ConvexSplit}) {
        const Setup s = setup(g, pair, scheme, 100 + idx++);
        oracle::Rng rng(500 + idx);
        for (int k = 0; k < 3; ++k) {
          const AdjointData d = make_random_data(g, s.cfg.time, rng, true);
          const ControlSignal h = oracle::random_signal(g, s.cfg.time, rng);
          const AdjointTrajectory adj = solve_adjoint_transpose(s.coeffs, d, s.cfg);
          const DualityResult r = check_duality(adj, solve_tangent(s.coeffs, h, s.cfg), d, h);
          CHECK(r.residual <= 1e-10);
          for (const auto& q : adj.q) CHECK(std::abs(oracle::quad_interior(*g, q.values)) / g->measure() <= 1e-11);
        }
      }
    }
  }
}

TEST_CASE("decoupled and transpose adjoints agree") {
  int idx = 0;
  for (const auto& g : {Geometry::interval(33, 1.0), Geometry::strip(8, 5, 1.0, 0.5)}) {
    for (const auto scheme : {Scheme::FullyImplicit, Scheme::ConvexSplit}) {
      const Setup s = setup(g, kLog, scheme, 40 + idx++);
      oracle::Rng rng(700 + idx);
      const AdjointData d = make_random_data(g, s.cfg.time, rng, false);
      const AdjointTrajectory a = solve_adjoint_transpose(s.coeffs, d, s.cfg);
      const AdjointTrajectory b = solve_adjoint_decoupled(s.coeffs, d, s.cfg);
      double diff = 0.0, scale = 0.0;
      for (int k = 0; k <= a.nt(); ++k) {
        const Vector dq = (a.q[k].values - b.q[k].values).cwiseAbs2();
        const Vector dg = (a.q_Gamma[k].values - b.q_Gamma[k].values).cwiseAbs2();
        const Vector dp = (a.p[k].values - b.p[k].values).cwiseAbs2();
        diff = std::max({diff, std::sqrt(oracle::quad_interior(*g, dq) + oracle::quad_boundary(*g, dg)),
                         std::sqrt(oracle::quad_interior(*g, dp))});
        scale = std::max({scale, std::sqrt(oracle::quad_interior(*g, a.q[k].values.cwiseAbs2())),
                          std::sqrt(oracle::quad_interior(*g, a.p[k].values.cwiseAbs2()))});

        // p solves the Neumann problem with source q: K p = M q.
        const Vector kp = g->stiffness() * b.p[k].values;
        const Vector mq = g->weights().cwiseProduct(b.q[k].values);
        CHECK((kp - mq).cwiseAbs().maxCoeff() <= 1e-10 * (mq.cwiseAbs().maxCoeff() + 1.0));
      }
      CHECK(diff <= 1e-8 * scale);
    }
  }
}
