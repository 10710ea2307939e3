#include "chc/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include <openssl/evp.h>

#include "chc/adjoint.hpp"
#include "chc/errors.hpp"
#include "chc/field_io.hpp"
#include "chc/optimizer.hpp"
#include "chc/run_config.hpp"
#include "chc/sensitivity.hpp"
#include "chc/verify.hpp"
#include "json.hpp"

namespace chc {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("SHA-256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

ControlSignal random_direction(const GeometryPtr& g, TimeGrid time, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::array<double, 4> a{};
  for (double& v : a) v = uniform(rng, -amplitude, amplitude);
  return smooth_control(g, time, a);
}

struct Context {
  RunConfig cfg;
  fs::path out_dir;
  std::ostream& out;
  bool quiet;
  json manifest;
  std::vector<std::string> artifacts;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void say(const std::string& line) const {
    if (!quiet) out << line << '\n';
  }
  fs::path file(const std::string& name) {
    artifacts.push_back(name);
    const fs::path p = out_dir / name;
    fs::create_directories(p.parent_path());
    return p;
  }
};

void write_scalars(Context& ctx, const Trajectory& traj, const PotentialPair& pair) {
  std::ofstream os(ctx.file("scalars.csv"));
  os << "t,mass,energy,min_y,max_y\n";
  for (const auto& s : traj.snapshots) {
    const Vector& y = s.y.interior.values;
    os << fmt(s.t) << ',' << fmt(mean_value(s.y.interior)) << ',' << fmt(free_energy(s, pair)) << ','
       << fmt(y.minCoeff()) << ',' << fmt(y.maxCoeff()) << '\n';
  }
}

void write_control(Context& ctx, const std::string& stem, const ControlSignal& u) {
  const Geometry& g = *u.geometry;
  Vector flat(static_cast<Eigen::Index>(u.samples()) * g.boundary_count());
  std::ofstream os(ctx.file(stem + ".csv"));
  const bool two_d = g.mode() == GeometryMode::Strip2D;
  os << (two_d ? "n,t,index,x,y,value\n" : "n,t,index,x,value\n");
  for (int n = 0; n < u.samples(); ++n) {
    for (int b = 0; b < g.boundary_count(); ++b) {
      const double v = u.values[static_cast<std::size_t>(n)](b);
      flat(n * g.boundary_count() + b) = v;
      const auto c = g.boundary_coordinate(b);
      os << n << ',' << fmt(u.time.t(n)) << ',' << b << ',' << fmt(c[0]);
      if (two_d) os << ',' << fmt(c[1]);
      os << ',' << fmt(v) << '\n';
    }
  }
  io::write_binary(ctx.file(stem + ".bin"), flat);
}

int cmd_forward(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ControlProblem prob = c.problem();
  const ControlSignal u = c.control.build(c.geometry, c.solver.time);
  const Trajectory traj = solve_state(prob.y0, u, c.pair, c.solver);
  write_scalars(ctx, traj, c.pair);
  for (std::size_t n = 0; n < traj.snapshots.size(); ++n) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshots/y_%04zu.bin", n);
    io::write_binary(ctx.file(name), traj.snapshots[n].y.interior.values);
    std::snprintf(name, sizeof(name), "snapshots/w_%04zu.bin", n);
    io::write_binary(ctx.file(name), traj.snapshots[n].w.values);
  }
  io::write_csv(ctx.file("y_final.csv"), traj.snapshots.back().y.interior);
  const ConservationReport cr = conservation_and_energy_suite(traj, c.pair);
  const ResidualReport rr = residual_check(traj, c.pair, u);
  ctx.manifest["results"] = {{"mass_drift", cr.max_mass_drift},
                             {"max_energy_increase", cr.max_energy_increase},
                             {"max_residual", rr.max_residual},
                             {"min_y", cr.min_y},
                             {"max_y", cr.max_y}};
  ctx.say("forward: " + std::to_string(traj.nt()) + " steps, mass drift " + fmt(cr.max_mass_drift) +
          ", max residual " + fmt(rr.max_residual));
  return kExitOk;
}

int cmd_optimize(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ControlProblem prob = c.problem();
  ControlSignal u0 = project_box(c.control.build(c.geometry, c.solver.time), c.box);
  const OptimizationReport rep = projected_gradient_descent(prob, u0, c.optimizer);
  {
    std::ofstream os(ctx.file("optimization_log.csv"));
    os << "iter,cost,stationarity,step,budget_active\n";
    for (const auto& it : rep.iterates) {
      os << it.iter << ',' << fmt(it.cost) << ',' << fmt(it.stationarity) << ',' << fmt(it.step) << ','
         << (it.budget_active ? 1 : 0) << '\n';
    }
  }
  write_control(ctx, "control_final", rep.control);
  write_control(ctx, "gradient_final", rep.gradient);
  const CertificateSummary cert = optimality_certificate(prob, rep, c.optimizer);
  {
    std::ofstream os(ctx.file("certificate.md"));
    os << "# Optimality certificate\n\n"
       << "Norms: L2(Sigma) with right-endpoint time weights.\n\n"
       << "| quantity | value |\n|---|---|\n"
       << "| iterations | " << rep.iterates.size() - 1 << " |\n"
       << "| final cost | " << fmt(rep.final_cost()) << " |\n"
       << "| stationarity | " << fmt(rep.final_stationarity()) << " |\n"
       << "| stat_tol | " << fmt(rep.stat_tol) << " |\n"
       << "| converged | " << (rep.converged ? "yes" : "no") << " |\n"
       << "| line search stalled | " << (rep.line_search_stalled ? "yes" : "no") << " |\n"
       << "| derivative norm / M0 | " << fmt(derivative_norm(rep.control) / c.box->M0) << " |\n"
       << "| adjoint form | " << (cert.used_decoupled ? "decoupled" : "transpose") << " |\n"
       << "| VI min probe | " << fmt(cert.vi.min_probe) << " |\n"
       << "| VI tolerance | " << fmt(cert.vi.tol) << " |\n"
       << "| VI probes | " << cert.vi.probes << " |\n"
       << "| projection residual | " << fmt(cert.vi.projection_residual) << " |\n"
       << "| certificate | " << (cert.pass() ? "PASS" : "FAIL") << " |\n";
  }
  ctx.manifest["results"] = {{"iterations", rep.iterates.size() - 1},
                             {"final_cost", rep.final_cost()},
                             {"stationarity", rep.final_stationarity()},
                             {"stat_tol", rep.stat_tol},
                             {"converged", rep.converged},
                             {"vi_min_probe", cert.vi.min_probe},
                             {"vi_tol", cert.vi.tol},
                             {"projection_residual", cert.vi.projection_checked ? json(cert.vi.projection_residual) : json(nullptr)},
                             {"certificate_pass", cert.pass()}};
  ctx.say("optimize: " + std::to_string(rep.iterates.size() - 1) + " iterations, cost " + fmt(rep.final_cost()) +
          ", stationarity " + fmt(rep.final_stationarity()) + ", certificate " + (cert.pass() ? "PASS" : "FAIL"));
  if (!rep.converged) ctx.say("optimize: not converged");
  return cert.pass() ? kExitOk : kExitNumerical;
}

int cmd_gradcheck(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ControlProblem prob = c.problem();
  const ControlSignal u = c.control.build(c.geometry, c.solver.time);
  const ControlSignal h = random_direction(c.geometry, c.solver.time, c.verify.direction_amplitude, c.seed);
  const FdTable t = fd_gradient_oracle(prob, u, h, c.verify.fd_eps, c.verify.corrupt_adjoint);
  std::ofstream os(ctx.file("gradcheck.csv"));
  os << "eps,central,adjoint,rel_error\n";
  for (const auto& r : t.rows) os << fmt(r.eps) << ',' << fmt(r.central) << ',' << fmt(r.adjoint) << ',' << fmt(r.rel_error) << '\n';
  const bool pass = t.best_rel_error <= 1e-6;
  ctx.manifest["results"] = {{"best_rel_error", t.best_rel_error}, {"pass", pass}};
  ctx.say("gradcheck: best relative error " + fmt(t.best_rel_error) + (pass ? " PASS" : " FAIL"));
  return pass ? kExitOk : kExitNumerical;
}

int cmd_taylor(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ControlProblem prob = c.problem();
  const ControlSignal u = c.control.build(c.geometry, c.solver.time);
  const ControlSignal h = random_direction(c.geometry, c.solver.time, c.verify.direction_amplitude, c.seed);
  const TaylorStudy st = taylor_remainder_study(prob, u, h, c.verify.taylor_eps);
  std::ofstream os(ctx.file("taylor.csv"));
  os << "eps,remainder\n";
  for (const auto& r : st.rows) os << fmt(r.eps) << ',' << fmt(r.remainder) << '\n';
  const bool pass = st.slope >= 1.8 && st.slope <= 2.2;
  ctx.manifest["results"] = {{"slope", st.slope}, {"pass", pass}};
  ctx.say("taylor: slope " + fmt(st.slope) + (pass ? " PASS" : " FAIL"));
  return pass ? kExitOk : kExitNumerical;
}

struct SuiteRow {
  std::string name;
  double value;
  std::string threshold;
  bool pass;
};

AdjointData random_data(const GeometryPtr& g, const TimeGrid& time, std::mt19937_64& rng, bool terminal) {
  AdjointData d;
  auto field = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(rng, -1.0, 1.0);
    return v;
  };
  for (int n = 0; n < time.samples(); ++n) {
    d.phiQ.push_back({g, field(g->node_count())});
    d.phiSigma.push_back({g, field(g->boundary_count())});
  }
  d.phiOmega = {g, terminal ? field(g->node_count()) : Vector::Zero(g->node_count())};
  d.phiGamma = {g, terminal ? field(g->boundary_count()) : Vector::Zero(g->boundary_count())};
  return d;
}

ControlSignal random_signal(const GeometryPtr& g, TimeGrid time, std::mt19937_64& rng) {
  ControlSignal h = ControlSignal::zeros(g, time);
  for (auto& v : h.values) {
    for (int b = 0; b < v.size(); ++b) v(b) = uniform(rng, -1.0, 1.0);
  }
  return h;
}

int cmd_verify(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const ControlProblem prob = c.problem();
  const ControlSignal u = c.control.build(c.geometry, c.solver.time);
  std::vector<SuiteRow> rows;
  std::mt19937_64 rng(c.seed);

  const Trajectory traj = solve_state(prob.y0, u, c.pair, c.solver);
  const ConservationReport cr = conservation_and_energy_suite(traj, c.pair);
  rows.push_back({"mass conservation (relative drift)", cr.max_mass_drift, "<= 1e-11", cr.max_mass_drift <= 1e-11});
  {
    SolverConfig split = c.solver;
    split.scheme = Scheme::ConvexSplit;
    const Trajectory t0 = solve_state(prob.y0, ControlSignal::zeros(c.geometry, c.solver.time), c.pair, split);
    const ConservationReport e = conservation_and_energy_suite(t0, c.pair);
    rows.push_back({"energy dissipation, u = 0, convex split (max increase)", e.max_energy_increase, "<= 1e-10",
                    e.max_energy_increase <= 1e-10});
  }
  rows.push_back({"guard band violations", static_cast<double>(cr.band_violations), "== 0", cr.band_violations == 0});
  const ResidualReport rr = residual_check(traj, c.pair, u);
  rows.push_back({"step residuals (max)", rr.max_residual, "<= 10 newton_tol", rr.max_residual <= 10.0 * c.solver.newton_tol});

  const ControlSignal h = random_direction(c.geometry, c.solver.time, c.verify.direction_amplitude, c.seed);
  const TaylorStudy st = taylor_remainder_study(prob, u, h, c.verify.taylor_eps);
  rows.push_back({"Taylor remainder slope", st.slope, "in [1.8, 2.2]", st.slope >= 1.8 && st.slope <= 2.2});

  const LinearizedCoefficients k = linearize(traj, c.pair);
  double worst_duality = 0.0, worst_xi = 0.0, worst_q = 0.0;
  for (int i = 0; i < c.verify.duality_pairs; ++i) {
    const AdjointData data = random_data(c.geometry, c.solver.time, rng, true);
    const ControlSignal dir = random_signal(c.geometry, c.solver.time, rng);
    const TangentTrajectory tan = solve_tangent(k, dir, c.solver);
    const AdjointTrajectory adj = solve_adjoint_transpose(k, data, c.solver);
    worst_duality = std::max(worst_duality, check_duality(adj, tan, data, dir).residual);
    std::vector<InteriorField> xi;
    for (const auto& x : tan.xi) xi.push_back(x.interior);
    worst_xi = std::max(worst_xi, max_abs_mean(xi));
    worst_q = std::max(worst_q, max_abs_mean(adj.q));
  }
  rows.push_back({"duality residual (max over pairs)", worst_duality, "<= 1e-10", worst_duality <= 1e-10});
  rows.push_back({"tangent mean (max |mean xi|)", worst_xi, "<= 1e-11", worst_xi <= 1e-11});
  rows.push_back({"adjoint mean (max |mean q|)", worst_q, "<= 1e-11", worst_q <= 1e-11});

  {
    const AdjointData data = random_data(c.geometry, c.solver.time, rng, false);
    const AdjointTrajectory a = solve_adjoint_transpose(k, data, c.solver);
    const AdjointTrajectory b = solve_adjoint_decoupled(k, data, c.solver);
    double dp = 0, np = 0, dq = 0, nq = 0;
    for (std::size_t n = 0; n < a.p.size(); ++n) {
      dp = std::max(dp, norm_H({a.p[n].geometry, a.p[n].values - b.p[n].values}));
      np = std::max(np, norm_H(a.p[n]));
      const CoupledField qa{a.q[n], a.q_Gamma[n]};
      const CoupledField diff{{a.q[n].geometry, a.q[n].values - b.q[n].values},
                              {a.q_Gamma[n].geometry, a.q_Gamma[n].values - b.q_Gamma[n].values}};
      dq = std::max(dq, norm_calH(diff));
      nq = std::max(nq, norm_calH(qa));
    }
    const double rel = std::max(dp / (np + 1e-300), dq / (nq + 1e-300));
    rows.push_back({"decoupled vs transpose adjoint (relative L_inf(H))", rel, "<= 1e-8", rel <= 1e-8});
  }

  const FdTable fd = fd_gradient_oracle(prob, u, h, c.verify.fd_eps, c.verify.corrupt_adjoint);
  rows.push_back({"gradient check (best relative error)", fd.best_rel_error, "<= 1e-6", fd.best_rel_error <= 1e-6});

  const StabilityStudy sb = stability_study(prob, c.verify.stability_pairs, c.verify.stability_amplitude, c.seed + 7);
  rows.push_back({"stability ratio spread (max/min)", sb.spread(), "<= 10", sb.all_finite && sb.spread() <= 10.0});

  bool all = true;
  {
    std::ofstream md(ctx.file("verification.md"));
    std::ofstream csv(ctx.file("verification.csv"));
    md << "# Verification report\n\n"
       << "Norm proxies: L_inf(H x H_Gamma) for states, L2(Sigma) with right-endpoint weights for controls.\n\n"
       << "| check | value | threshold | result |\n|---|---|---|---|\n";
    csv << "check,value,threshold,pass\n";
    for (const auto& r : rows) {
      all = all && r.pass;
      md << "| " << r.name << " | " << fmt(r.value) << " | " << r.threshold << " | " << (r.pass ? "PASS" : "FAIL")
         << " |\n";
      csv << '"' << r.name << "\"," << fmt(r.value) << ",\"" << r.threshold << "\"," << (r.pass ? 1 : 0) << '\n';
      ctx.say(std::string(r.pass ? "PASS " : "FAIL ") + r.name + ": " + fmt(r.value) + " (" + r.threshold + ")");
    }
    const AdjointRegularity reg = adjoint_time_regularity(solve_adjoint_transpose(k, build_adjoint_data(traj, c.cost), c.solver), c.solver.time);
    md << "\nAdjoint boundary trace time regularity (reported only): max difference quotient "
       << fmt(reg.max_difference_quotient) << ", H1 seminorm " << fmt(reg.h1_seminorm) << ".\n";
  }
  json res = json::object();
  for (const auto& r : rows) res[r.name] = {{"value", r.value}, {"pass", r.pass}};
  ctx.manifest["results"] = res;
  return all ? kExitOk : kExitNumerical;
}

}  // namespace

int run_command(const std::string& name, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::function<int(Context&)>> commands = {
      {"forward", cmd_forward}, {"optimize", cmd_optimize}, {"gradcheck", cmd_gradcheck},
      {"taylor", cmd_taylor},   {"verify", cmd_verify},
  };
  const auto it = commands.find(name);
  if (it == commands.end()) {
    err << "unknown command '" << name << "'\n";
    return kExitConfig;
  }
  RunConfig cfg;
  try {
    cfg = load_run_config(opt.config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.optimizer.seed = *opt.seed;
  }
  Context ctx{std::move(cfg), {}, out, opt.quiet, json::object(), {}};
  ctx.out_dir = opt.out ? *opt.out : ctx.cfg.output_dir;
  int code = kExitOk;
  std::string failure;
  try {
    fs::create_directories(ctx.out_dir);
    {
      std::ofstream os(ctx.file("config.ini"));
      os << ctx.cfg.text;
    }
    code = it->second(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NewtonDiverged& e) {
    failure = std::string(e.what()) + " (step " + std::to_string(e.step()) + ")";
    code = kExitNumerical;
  } catch (const std::exception& e) {
    failure = e.what();
    code = kExitNumerical;
  }
  if (!failure.empty()) err << name << " failed: " << failure << '\n';

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  ctx.manifest["command"] = name;
  ctx.manifest["version"] = CHC_VERSION;
  ctx.manifest["config_sha256"] = sha256_hex(ctx.cfg.text);
  ctx.manifest["config_path"] = opt.config.string();
  ctx.manifest["seed"] = ctx.cfg.seed;
  ctx.manifest["exit_code"] = code;
  if (!failure.empty()) ctx.manifest["error"] = failure;
  ctx.manifest["timings"] = {{"wall_seconds", secs}};
  ctx.manifest["artifacts"] = ctx.artifacts;
  try {
    std::ofstream os(ctx.out_dir / "manifest.json");
    os << ctx.manifest.dump(2) << '\n';
  } catch (const std::exception& e) {
    err << "cannot write manifest: " << e.what() << '\n';
  }
  return code;
}

}  // namespace chc
