// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Every criterion runs on the shipped configurations in configs/.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "chc/adjoint.hpp"
#include "chc/errors.hpp"
#include "chc/run_config.hpp"
#include "chc/sensitivity.hpp"
#include "chc/verify.hpp"

using namespace chc;
namespace fs = std::filesystem;

namespace {

struct Shipped {
  std::string name;
  RunConfig cfg;
};

std::vector<Shipped> load_all() {
  std::vector<Shipped> out;
  for (const auto& e : fs::directory_iterator(CHC_SOURCE_DIR "/configs")) {
    if (e.path().extension() == ".ini") out.push_back({e.path().stem().string(), load_run_config(e.path())});
  }
  std::sort(out.begin(), out.end(), [](const Shipped& a, const Shipped& b) { return a.name < b.name; });
  return out;
}

std::vector<const Shipped*> with_prefix(const std::vector<Shipped>& all, const std::string& prefix) {
  std::vector<const Shipped*> out;
  for (const auto& s : all) {
    if (s.name.rfind(prefix, 0) == 0) out.push_back(&s);
  }
  return out;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

AdjointData make_random_data(const GeometryPtr& g, const TimeGrid& time, std::mt19937_64& rng, bool terminal) {
  auto vec = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(rng, -1, 1);
    return v;
  };
  AdjointData d;
  for (int n = 0; n < time.samples(); ++n) {
    d.phiQ.push_back({g, vec(g->node_count())});
    d.phiSigma.push_back({g, vec(g->boundary_count())});
  }
  d.phiOmega = {g, terminal ? vec(g->node_count()) : Vector::Zero(g->node_count())};
  d.phiGamma = {g, terminal ? vec(g->boundary_count()) : Vector::Zero(g->boundary_count())};
  return d;
}

ControlSignal make_random_signal(const GeometryPtr& g, const TimeGrid& time, std::mt19937_64& rng) {
  ControlSignal h = ControlSignal::zeros(g, time);
  for (auto& v : h.values) {
    for (int b = 0; b < v.size(); ++b) v(b) = uniform(rng, -1, 1);
  }
  return h;
}

ControlSignal direction(const RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  std::array<double, 4> a{};
  for (double& v : a) v = uniform(rng, -c.verify.direction_amplitude, c.verify.direction_amplitude);
  return smooth_control(c.geometry, c.solver.time, a);
}

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] criterion %2d  %-34s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// Runs a criterion body; any exception counts as a failure with its message.
void guarded(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  const std::vector<Shipped> all = load_all();
  const auto grad = with_prefix(all, "gradcheck_");
  std::printf("acceptance: %zu shipped configs, %zu gradient-check configs\n", all.size(), grad.size());

  guarded(1, "mass conservation", [&] {
    double worst = 0.0;
    for (const auto& s : all) {
      const ControlProblem p = s.cfg.problem();
      const Trajectory t = solve_state(p.y0, s.cfg.control.build(s.cfg.geometry, s.cfg.solver.time), p.pair, p.cfg);
      worst = std::max(worst, conservation_and_energy_suite(t, p.pair).max_mass_drift);
    }
    report(1, "mass conservation", worst <= 1e-11, fmt("max drift / (1+|m0|) = %.3e (tol 1e-11)", worst));
  });

  guarded(2, "energy dissipation (u = 0, split)", [&] {
    double worst = -INFINITY;
    int runs = 0;
    for (const auto& s : all) {
      SolverConfig cfg = s.cfg.solver;
      cfg.scheme = Scheme::ConvexSplit;
      const ControlProblem p = s.cfg.problem();
      const Trajectory t = solve_state(p.y0, ControlSignal::zeros(s.cfg.geometry, cfg.time), p.pair, cfg);
      worst = std::max(worst, conservation_and_energy_suite(t, p.pair).max_energy_increase);
      ++runs;
    }
    report(2, "energy dissipation (u = 0, split)", worst <= 1e-10,
           fmt("max E(n+1) - E(n) = %.3e over %.0f runs (tol 1e-10)", worst, runs));
  });

  guarded(3, "logarithmic separation", [&] {
    int violations = 0, domain_errors = 0, runs = 0;
    for (const auto& s : all) {
      if (!s.cfg.pair.bulk.singular() && !s.cfg.pair.boundary.singular()) continue;
      const ControlProblem p = s.cfg.problem();
      for (const Scheme scheme : {Scheme::FullyImplicit, Scheme::ConvexSplit}) {
        SolverConfig cfg = s.cfg.solver;
        cfg.scheme = scheme;
        ++runs;
        try {
          const Trajectory t = solve_state(p.y0, s.cfg.control.build(s.cfg.geometry, cfg.time), p.pair, cfg);
          violations += conservation_and_energy_suite(t, p.pair).band_violations;
        } catch (const DomainViolation&) {
          ++domain_errors;
        }
      }
    }
    report(3, "logarithmic separation", runs > 0 && violations == 0 && domain_errors == 0,
           fmt("%.0f band violations, %.0f DomainViolation", violations, domain_errors) + " over " + std::to_string(runs) + " runs");
  });

  guarded(4, "Taylor remainder slope", [&] {
    const std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double lo = INFINITY, hi = -INFINITY;
    for (const auto* s : grad) {
      const ControlProblem p = s->cfg.problem();
      const ControlSignal u = s->cfg.control.build(s->cfg.geometry, s->cfg.solver.time);
      const double slope = taylor_remainder_study(p, u, direction(s->cfg), eps).slope;
      lo = std::min(lo, slope);
      hi = std::max(hi, slope);
    }
    report(4, "Taylor remainder slope", !grad.empty() && lo >= 1.8 && hi <= 2.2, fmt("slopes in [%.4f, %.4f] (need [1.8, 2.2])", lo, hi));
  });

  double worst_xi = 0.0, worst_q = 0.0;
  bool means_measured = false;
  guarded(5, "adjoint duality", [&] {
    double worst = 0.0;
    int pairs = 0;
    for (const auto* s : grad) {
      const ControlProblem p = s->cfg.problem();
      const Trajectory t = solve_state(p.y0, s->cfg.control.build(s->cfg.geometry, s->cfg.solver.time), p.pair, p.cfg);
      const LinearizedCoefficients k = linearize(t, p.pair);
      std::mt19937_64 rng(s->cfg.seed);
      for (int i = 0; i < 20; ++i) {
        const AdjointData d = make_random_data(s->cfg.geometry, p.cfg.time, rng, true);
        const ControlSignal h = make_random_signal(s->cfg.geometry, p.cfg.time, rng);
        const TangentTrajectory tan = solve_tangent(k, h, p.cfg);
        const AdjointTrajectory adj = solve_adjoint_transpose(k, d, p.cfg);
        worst = std::max(worst, check_duality(adj, tan, d, h).residual);
        std::vector<InteriorField> xi;
        for (const auto& x : tan.xi) xi.push_back(x.interior);
        worst_xi = std::max(worst_xi, max_abs_mean(xi));
        worst_q = std::max(worst_q, max_abs_mean(adj.q));
        ++pairs;
      }
    }
    means_measured = pairs > 0;
    report(5, "adjoint duality", pairs > 0 && worst <= 1e-10, fmt("max residual %.3e over %.0f pairs (tol 1e-10)", worst, pairs));
  });

  guarded(6, "gradient check (FD)", [&] {
    double worst = 0.0;
    bool log_strip = false, log_interval = false, quartic_strip = false, quartic_interval = false;
    for (const auto* s : grad) {
      const ControlProblem p = s->cfg.problem();
      const ControlSignal u = s->cfg.control.build(s->cfg.geometry, s->cfg.solver.time);
      worst = std::max(worst, fd_gradient_oracle(p, u, direction(s->cfg), s->cfg.verify.fd_eps).best_rel_error);
      const bool strip = s->cfg.geometry->mode() == GeometryMode::Strip2D;
      const bool log = s->cfg.pair.bulk.singular();
      (strip ? (log ? log_strip : quartic_strip) : (log ? log_interval : quartic_interval)) = true;
    }
    const bool covered = log_strip && log_interval && quartic_strip && quartic_interval;
    report(6, "gradient check (FD)", covered && worst <= 1e-6,
           fmt("worst best-eps rel. error %.3e (tol 1e-6)", worst) + (covered ? ", both geometries x both potentials" : ", MISSING coverage"));
  });

  guarded(7, "decoupled vs transpose adjoint", [&] {
    double worst = 0.0;
    std::vector<const Shipped*> cases = grad;
    for (const auto* s : with_prefix(all, "tracking_")) cases.push_back(s);
    for (const auto* s : cases) {
      const ControlProblem p = s->cfg.problem();
      const Trajectory t = solve_state(p.y0, s->cfg.control.build(s->cfg.geometry, s->cfg.solver.time), p.pair, p.cfg);
      const LinearizedCoefficients k = linearize(t, p.pair);
      std::mt19937_64 rng(s->cfg.seed + 1);
      std::vector<AdjointData> data{make_random_data(s->cfg.geometry, p.cfg.time, rng, false)};
      if (p.cost.bOmega == 0.0 && p.cost.bGamma == 0.0) data.push_back(build_adjoint_data(t, p.cost));
      for (const auto& d : data) {
        const AdjointTrajectory a = solve_adjoint_transpose(k, d, p.cfg);
        const AdjointTrajectory b = solve_adjoint_decoupled(k, d, p.cfg);
        double dp = 0, np = 0, dq = 0, nq = 0;
        for (std::size_t n = 0; n < a.p.size(); ++n) {
          dp = std::max(dp, norm_H({a.p[n].geometry, a.p[n].values - b.p[n].values}));
          np = std::max(np, norm_H(a.p[n]));
          const CoupledField diff{{a.q[n].geometry, a.q[n].values - b.q[n].values},
                                  {a.q_Gamma[n].geometry, a.q_Gamma[n].values - b.q_Gamma[n].values}};
          dq = std::max(dq, norm_calH(diff));
          nq = std::max(nq, norm_calH(CoupledField{a.q[n], a.q_Gamma[n]}));
        }
        worst = std::max({worst, dp / (np + 1e-300), dq / (nq + 1e-300)});
      }
    }
    report(7, "decoupled vs transpose adjoint", worst <= 1e-8, fmt("max relative L_inf(H) gap %.3e (tol 1e-8)", worst));
  });

  guarded(8, "optimality certificate (demo)", [&] {
    const auto demos = with_prefix(all, "tracking_demo");
    if (demos.empty()) throw Error("no tracking demo config shipped");
    for (const auto* s : demos) {
      const ControlProblem p = s->cfg.problem();
      const ControlSignal u0 = project_box(s->cfg.control.build(s->cfg.geometry, s->cfg.solver.time), s->cfg.box);
      const OptimizationReport r = projected_gradient_descent(p, u0, s->cfg.optimizer);
      const CertificateSummary c = optimality_certificate(p, r, s->cfg.optimizer);
      const bool stat_ok = r.final_stationarity() <= r.stat_tol;
      const bool vi_ok = c.vi.min_probe >= -1e-8 * c.vi.scale;
      const bool proj_ok = s->cfg.cost.b0 > 0 ? (c.vi.projection_checked && c.vi.projection_residual <= 1e-6) : true;
      char buf[256];
      std::snprintf(buf, sizeof(buf), "stationarity %.2e <= %.1e, VI min %.2e >= %.2e, projection residual %.2e",
                    r.final_stationarity(), r.stat_tol, c.vi.min_probe, -1e-8 * c.vi.scale, c.vi.projection_residual);
      report(8, "optimality certificate (demo)", stat_ok && vi_ok && proj_ok, buf);
    }
  });

  guarded(9, "stability ratio spread", [&] {
    double worst = 0.0;
    bool finite = true;
    for (const auto* s : grad) {
      const StabilityStudy st = stability_study(s->cfg.problem(), 20, s->cfg.verify.stability_amplitude, s->cfg.seed + 7);
      finite = finite && st.all_finite;
      worst = std::max(worst, st.spread());
    }
    report(9, "stability ratio spread", finite && worst <= 10.0, fmt("worst max/min %.3f over 20 pairs per config (tol 10)", worst));
  });

  report(10, "zero-mean invariants", means_measured && worst_xi <= 1e-11 && worst_q <= 1e-11,
         fmt("max |mean xi| %.3e, max |mean q| %.3e (tol 1e-11)", worst_xi, worst_q));

  guarded(11, "self-convergence in time", [&] {
    double lo = INFINITY, hi = -INFINITY;
    for (const std::string name : {"forward_interval_quartic", "forward_strip_log"}) {
      const auto found = with_prefix(all, name);
      if (found.empty()) throw Error("missing config " + name);
      const RunConfig& c = found.front()->cfg;
      const ControlProblem p = c.problem();
      const auto control = [&](double t, double x, double y) {
        return 0.2 + 0.4 * std::sin(M_PI * t / c.solver.time.T) + 0.3 * std::cos(2 * M_PI * x / c.geometry->lx()) * (1 + y);
      };
      const SelfConvergence sc = self_convergence(p.y0, p.pair, c.solver, control, {16, 32}, 256);
      lo = std::min(lo, sc.order);
      hi = std::max(hi, sc.order);
    }
    report(11, "self-convergence in time", lo >= 0.8 && hi <= 1.2,
           fmt("observed orders in [%.3f, %.3f] vs 8x finer reference (need [0.8, 1.2])", lo, hi));
  });

  std::printf("acceptance: %s (%d failing)\n", failures == 0 ? "all criteria pass" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
