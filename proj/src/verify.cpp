#include "chc/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "chc/errors.hpp"
#include "chc/neumann.hpp"

namespace chc {

int probe_threads() {
  if (const char* env = std::getenv("CHC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(n, probe_threads());
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double linf_calH(const std::vector<StateSnapshot>& a, const std::vector<StateSnapshot>& b) {
  if (a.size() != b.size()) throw ConfigMismatch("linf_calH: trajectories differ in length");
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    CoupledField d{{a[n].y.interior.geometry, a[n].y.interior.values - b[n].y.interior.values},
                   {a[n].y.boundary.geometry, a[n].y.boundary.values - b[n].y.boundary.values}};
    m = std::max(m, norm_calH(d));
  }
  return m;
}

FdTable fd_gradient_oracle(const ControlProblem& prob, const ControlSignal& u, const ControlSignal& h,
                           const std::vector<double>& eps_list, bool corrupt_adjoint) {
  GradientEvaluation ev = evaluate_gradient(prob, u);
  if (corrupt_adjoint) {
    for (auto& q : ev.adjoint.q_Gamma) q.values *= 1.01;
    ev.gradient = gradient_from_adjoint(ev.adjoint, u, prob.cost.b0);
  }
  const double pairing = dot_sigma(ev.gradient, h);

  FdTable table;
  table.rows.resize(eps_list.size());
  parallel_for(static_cast<int>(eps_list.size()), [&](int i) {
    const double eps = eps_list[static_cast<std::size_t>(i)];
    const double jp = reduced_cost(prob, add_scaled(u, eps, h));
    const double jm = reduced_cost(prob, add_scaled(u, -eps, h));
    FdRow& row = table.rows[static_cast<std::size_t>(i)];
    row.eps = eps;
    row.central = (jp - jm) / (2.0 * eps);
    row.adjoint = pairing;
    const double denom = std::max(std::abs(pairing), std::abs(row.central));
    row.rel_error = denom == 0.0 ? 0.0 : std::abs(row.central - pairing) / denom;
  });
  table.best_rel_error = std::numeric_limits<double>::infinity();
  for (const auto& r : table.rows) table.best_rel_error = std::min(table.best_rel_error, r.rel_error);
  return table;
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TaylorStudy taylor_remainder_study(const ControlProblem& prob, const ControlSignal& u, const ControlSignal& h,
                                   const std::vector<double>& eps_list) {
  const Trajectory base = solve_state(prob.y0, u, prob.pair, prob.cfg);
  const TangentTrajectory tan = solve_tangent(linearize(base, prob.pair), h, prob.cfg);
  TaylorStudy st;
  st.rows.resize(eps_list.size());
  parallel_for(static_cast<int>(eps_list.size()), [&](int i) {
    const double eps = eps_list[static_cast<std::size_t>(i)];
    const Trajectory pert = solve_state(prob.y0, add_scaled(u, eps, h), prob.pair, prob.cfg);
    double m = 0.0;
    for (std::size_t n = 0; n < pert.snapshots.size(); ++n) {
      const Vector d = pert.snapshots[n].y.interior.values - base.snapshots[n].y.interior.values -
                       eps * tan.xi[n].interior.values;
      const InteriorField df{base.snapshots[n].w.geometry, d};
      m = std::max(m, norm_calH(CoupledField::from_interior(df)));
    }
    st.rows[static_cast<std::size_t>(i)] = {eps, m};
  });
  std::vector<double> lx, ly;
  for (const auto& r : st.rows) {
    if (r.remainder > 0.0) {
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(r.remainder));
    }
  }
  st.slope = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
  return st;
}

ControlSignal smooth_control(GeometryPtr g, TimeGrid time, const std::array<double, 4>& a) {
  ControlSignal u = ControlSignal::zeros(g, time);
  Vector profile(g->boundary_count());
  for (int b = 0; b < profile.size(); ++b) {
    const auto c = g->boundary_coordinate(b);
    if (g->mode() == GeometryMode::Interval1D) {
      profile(b) = b == 0 ? -1.0 : 1.0;
    } else {
      profile(b) = std::cos(2.0 * M_PI * c[0] / g->lx()) + (c[1] > 0.0 ? 0.5 : -0.5);
    }
  }
  for (int n = 0; n < time.samples(); ++n) {
    const double s = time.t(n) / time.T;
    u.values[static_cast<std::size_t>(n)] =
        Vector::Constant(profile.size(), a[0] + a[1] * std::sin(M_PI * s)) + (a[2] + a[3] * s) * profile;
  }
  return u;
}

StabilityStudy stability_study(const ControlProblem& prob,
                               const std::vector<std::pair<ControlSignal, ControlSignal>>& pairs) {
  StabilityStudy st;
  st.ratios.assign(pairs.size(), 0.0);
  parallel_for(static_cast<int>(pairs.size()), [&](int i) {
    const auto& [u1, u2] = pairs[static_cast<std::size_t>(i)];
    const Trajectory t1 = solve_state(prob.y0, u1, prob.pair, prob.cfg);
    const Trajectory t2 = solve_state(prob.y0, u2, prob.pair, prob.cfg);
    const double du = norm_sigma(add_scaled(u1, -1.0, u2));
    const double ds = linf_calH(t1.snapshots, t2.snapshots);
    st.ratios[static_cast<std::size_t>(i)] = du > 0.0 ? ds / du : 0.0;
  });
  st.min_ratio = std::numeric_limits<double>::infinity();
  st.max_ratio = 0.0;
  for (double r : st.ratios) {
    if (!std::isfinite(r)) st.all_finite = false;
    st.min_ratio = std::min(st.min_ratio, r);
    st.max_ratio = std::max(st.max_ratio, r);
  }
  return st;
}

StabilityStudy stability_study(const ControlProblem& prob, int pairs, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    std::array<double, 4> a{};
    for (double& v : a) v = amplitude * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
    return a;
  };
  std::vector<std::pair<ControlSignal, ControlSignal>> list;
  for (int k = 0; k < pairs; ++k) {
    const auto a = draw();
    const auto b = draw();
    list.emplace_back(smooth_control(prob.geometry(), prob.cfg.time, a),
                      smooth_control(prob.geometry(), prob.cfg.time, b));
  }
  return stability_study(prob, list);
}

namespace {

// Quadrature rebuilt from the grid description.
struct IndependentQuadrature {
  const Geometry& g;

  double row_weight(int j) const {
    if (g.mode() == GeometryMode::Interval1D) return 1.0;
    return (j == 0 || j == g.ny() - 1) ? 0.5 * g.hy() : g.hy();
  }

  double mean(const Vector& y) const {
    double s = 0.0, m = 0.0;
    if (g.mode() == GeometryMode::Interval1D) {
      const int n = g.nx();
      for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 * g.hx() : g.hx();
        s += w * y(i);
        m += w;
      }
      return s / m;
    }
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        const double w = g.hx() * row_weight(j);
        s += w * y(j * g.nx() + i);
        m += w;
      }
    }
    return s / m;
  }

  double energy(const Vector& y, const PotentialPair& p) const {
    double e = 0.0;
    if (g.mode() == GeometryMode::Interval1D) {
      const int n = g.nx();
      const double h = g.hx();
      for (int i = 0; i + 1 < n; ++i) e += 0.5 * (y(i + 1) - y(i)) * (y(i + 1) - y(i)) / h;
      for (int i = 0; i < n; ++i) e += ((i == 0 || i == n - 1) ? 0.5 * h : h) * eval(p.bulk, 0, y(i));
      e += eval(p.boundary, 0, y(0)) + eval(p.boundary, 0, y(n - 1));
      return e;
    }
    const int nx = g.nx();
    const int ny = g.ny();
    const double hx = g.hx();
    const double hy = g.hy();
    auto at = [&](int i, int j) { return y(j * nx + (i % nx)); };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double dx = at(i + 1, j) - at(i, j);
        e += 0.5 * row_weight(j) * dx * dx / hx;
        if (j + 1 < ny) {
          const double dy = at(i, j + 1) - at(i, j);
          e += 0.5 * hx * dy * dy / hy;
        }
        e += hx * row_weight(j) * eval(p.bulk, 0, at(i, j));
      }
    }
    for (int j : {0, ny - 1}) {
      for (int i = 0; i < nx; ++i) {
        const double dx = at(i + 1, j) - at(i, j);
        e += 0.5 * dx * dx / hx + hx * eval(p.boundary, 0, at(i, j));
      }
    }
    return e;
  }
};

}  // namespace

ConservationReport conservation_and_energy_suite(const Trajectory& traj, const PotentialPair& pair) {
  const IndependentQuadrature q{traj.geometry()};
  ConservationReport rep;
  rep.mass0 = q.mean(traj.snapshots.front().y.interior.values);
  rep.min_y = std::numeric_limits<double>::infinity();
  rep.max_y = -std::numeric_limits<double>::infinity();
  rep.max_energy_increase = -std::numeric_limits<double>::infinity();
  const bool singular = pair.bulk.singular() || pair.boundary.singular();
  const double guard = traj.config.guard_delta;
  for (const auto& s : traj.snapshots) {
    const Vector& y = s.y.interior.values;
    rep.max_mass_drift = std::max(rep.max_mass_drift, std::abs(q.mean(y) - rep.mass0) / (1.0 + std::abs(rep.mass0)));
    rep.min_y = std::min(rep.min_y, y.minCoeff());
    rep.max_y = std::max(rep.max_y, y.maxCoeff());
    if (singular && (y.maxCoeff() > 1.0 - guard || y.minCoeff() < -1.0 + guard)) ++rep.band_violations;
    rep.energy.push_back(q.energy(y, pair));
  }
  for (std::size_t n = 1; n < rep.energy.size(); ++n) {
    rep.max_energy_increase = std::max(rep.max_energy_increase, rep.energy[n] - rep.energy[n - 1]);
  }
  if (rep.energy.size() < 2) rep.max_energy_increase = 0.0;
  return rep;
}

CertificateSummary optimality_certificate(const ControlProblem& prob, const OptimizationReport& run,
                                          const PgdOptions& opt) {
  CertificateSummary s;
  s.stationarity_pass = run.final_stationarity() <= run.stat_tol;
  const Trajectory traj = solve_state(prob.y0, run.control, prob.pair, prob.cfg);
  const LinearizedCoefficients k = linearize(traj, prob.pair);
  const AdjointData data = build_adjoint_data(traj, prob.cost);
  s.used_decoupled = prob.cost.bOmega == 0.0 && prob.cost.bGamma == 0.0;
  const AdjointTrajectory adj =
      s.used_decoupled ? solve_adjoint_decoupled(k, data, prob.cfg) : solve_adjoint_transpose(k, data, prob.cfg);
  const ControlSignal g = gradient_from_adjoint(adj, run.control, prob.cost.b0);
  s.vi = check_vi(run.control, g, prob.box, opt.vi_probes, prob.cost.b0, opt.step0 / prob.weight_scale(),
                  opt.seed + 1);
  return s;
}

SelfConvergence self_convergence(const CoupledField& y0, const PotentialPair& pair, SolverConfig cfg,
                                 const std::function<double(double, double, double)>& control,
                                 const std::vector<int>& nts, int reference_nt) {
  const GeometryPtr g = y0.interior.geometry;
  auto run = [&](int nt) {
    SolverConfig c = cfg;
    c.time.nt = nt;
    ControlSignal u = ControlSignal::zeros(g, c.time);
    for (int n = 0; n < c.time.samples(); ++n) {
      for (int b = 0; b < g->boundary_count(); ++b) {
        const auto x = g->boundary_coordinate(b);
        u.values[static_cast<std::size_t>(n)](b) = control(c.time.t(n), x[0], x[1]);
      }
    }
    return solve_state(y0, u, pair, c).snapshots.back();
  };
  SelfConvergence sc;
  sc.nt = nts;
  sc.reference_nt = reference_nt;
  const StateSnapshot ref = run(reference_nt);
  sc.error.resize(nts.size());
  parallel_for(static_cast<int>(nts.size()), [&](int i) {
    const StateSnapshot s = run(nts[static_cast<std::size_t>(i)]);
    CoupledField d{{g, s.y.interior.values - ref.y.interior.values}, {g, s.y.boundary.values - ref.y.boundary.values}};
    sc.error[static_cast<std::size_t>(i)] = norm_calH(d);
  });
  if (sc.error.size() >= 2) {
    sc.order = std::log(sc.error[0] / sc.error[1]) /
               std::log(static_cast<double>(nts[1]) / static_cast<double>(nts[0]));
  }
  return sc;
}

AdjointRegularity adjoint_time_regularity(const AdjointTrajectory& adj, const TimeGrid& time) {
  AdjointRegularity r;
  const double dt = time.dt();
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < adj.q_Gamma.size(); ++k) {
    const BoundaryField d{adj.q_Gamma[k].geometry, (adj.q_Gamma[k + 1].values - adj.q_Gamma[k].values) / dt};
    const double nrm = norm_HGamma(d);
    r.max_difference_quotient = std::max(r.max_difference_quotient, nrm);
    s += dt * nrm * nrm;
  }
  r.h1_seminorm = std::sqrt(s);
  return r;
}

}  // namespace chc
