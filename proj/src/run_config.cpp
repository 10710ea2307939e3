#include "chc/run_config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "chc/errors.hpp"
#include "chc/field_io.hpp"
#include "chc/verify.hpp"

namespace chc {

namespace pt = boost::property_tree;

double profile(const Geometry& g, int k, double x, double y) {
  if (g.mode() == GeometryMode::Interval1D) return std::cos(M_PI * k * x / g.lx());
  return std::cos(2.0 * M_PI * k * x / g.lx()) * 0.5 * (1.0 + std::cos(M_PI * y / g.ly()));
}

CoupledField InitialSpec::build(const GeometryPtr& g) const {
  if (kind == "file") return CoupledField::from_interior(io::load_interior(file, g));
  if (kind == "constant") return CoupledField::from_interior(InteriorField::constant(g, mean));
  return CoupledField::from_interior(InteriorField::from_function(
      g, [&](double x, double y) { return mean + amplitude * profile(*g, wavenumber, x, y); }));
}

ControlSignal ControlSpec::build(const GeometryPtr& g, TimeGrid time) const {
  if (kind == "constant") return ControlSignal::constant(g, time, value);
  if (kind == "smooth") return smooth_control(g, time, a);
  return ControlSignal::zeros(g, time);
}

ControlProblem RunConfig::problem() const { return {initial.build(geometry), pair, solver, cost, box}; }

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"geometry", {"mode", "nx", "ny", "lx", "ly"}},
      {"potentials", {"bulk", "boundary", "bulk_coefficient", "boundary_coefficient", "eta", "compat_C"}},
      {"solver", {"T", "nt", "tau", "scheme", "newton_tol", "newton_max", "guard_delta"}},
      {"initial", {"kind", "mean", "amplitude", "wavenumber", "file"}},
      {"control", {"kind", "value", "a0", "a1", "a2", "a3"}},
      {"cost",
       {"bQ", "bSigma", "bOmega", "bGamma", "b0", "target_mean", "target_amplitude", "target_wavenumber"}},
      {"box", {"u_min", "u_max", "M0"}},
      {"optimizer", {"step0", "armijo_c", "shrink", "max_iter", "max_backtracks", "stat_tol", "vi_probes"}},
      {"verify",
       {"fd_eps", "taylor_eps", "direction_amplitude", "duality_pairs", "stability_pairs", "stability_amplitude",
        "corrupt_adjoint"}},
      {"run", {"seed", "output_dir"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has(const std::string& key) const { return tree_.get_child_optional(pt::ptree::path_type(key, '.')).has_value(); }

  std::string str(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) throw ConfigError("missing required key " + key);
    return *v;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double num(const std::string& key) const {
    const std::string s = str(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": expected a number, got '" + s + "'");
    }
  }
  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

  long integer(const std::string& key) const {
    const std::string s = str(key);
    try {
      std::size_t pos = 0;
      const long v = std::stol(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": expected an integer, got '" + s + "'");
    }
  }
  long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("key " + key + ": expected true or false, got '" + s + "'");
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("key " + key + ": bad list entry '" + item + "'");
      }
    }
    if (out.empty()) throw ConfigError("key " + key + ": empty list");
    return out;
  }

 private:
  const pt::ptree& tree_;
};

PotentialSpec potential(const std::string& key, const std::string& kind, const Reader& r,
                        const std::string& coeff_key) {
  if (kind == "quartic") return PotentialSpec::regular_quartic();
  if (kind == "logarithmic") {
    const double c = r.num(coeff_key, 3.0);
    if (!(c > 0.0)) throw ConfigError("key " + coeff_key + ": logarithmic coefficient must be > 0");
    return PotentialSpec::logarithmic(c);
  }
  if (kind == "quadratic") return PotentialSpec::quadratic(r.num(coeff_key, 1.0));
  throw ConfigError("key " + key + ": unknown potential '" + kind + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, child] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("unknown config section [" + section + "]");
    if (child.empty() && !child.data().empty()) throw ConfigError("key " + section + " outside any section");
    for (const auto& kv : child) {
      if (!it->second.count(kv.first)) throw ConfigError("unknown config key " + section + "." + kv.first);
    }
  }
  const Reader r(tree);
  RunConfig cfg;
  cfg.text = text;

  const std::string mode = r.str("geometry.mode");
  const long nx = r.integer("geometry.nx");
  try {
    if (mode == "interval") {
      cfg.geometry = Geometry::interval(static_cast<int>(nx), r.num("geometry.lx", 1.0));
    } else if (mode == "strip") {
      cfg.geometry = Geometry::strip(static_cast<int>(nx), static_cast<int>(r.integer("geometry.ny")),
                                     r.num("geometry.lx", 1.0), r.num("geometry.ly", 1.0));
    } else {
      throw ConfigError("key geometry.mode: expected interval or strip, got '" + mode + "'");
    }
  } catch (const ConfigMismatch& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }

  cfg.pair.bulk = potential("potentials.bulk", r.str("potentials.bulk"), r, "potentials.bulk_coefficient");
  cfg.pair.boundary =
      potential("potentials.boundary", r.str("potentials.boundary"), r, "potentials.boundary_coefficient");
  cfg.pair.eta = r.num("potentials.eta", 1.0);
  cfg.pair.compat_C = r.num("potentials.compat_C", 0.0);

  SolverConfig& s = cfg.solver;
  s.time.T = r.num("solver.T");
  s.time.nt = static_cast<int>(r.integer("solver.nt"));
  s.tau = r.num("solver.tau", 1.0);
  const std::string scheme = r.str("solver.scheme", "implicit");
  if (scheme == "implicit") {
    s.scheme = Scheme::FullyImplicit;
  } else if (scheme == "convex_split") {
    s.scheme = Scheme::ConvexSplit;
  } else {
    throw ConfigError("key solver.scheme: expected implicit or convex_split, got '" + scheme + "'");
  }
  s.newton_tol = r.num("solver.newton_tol", 1e-10);
  s.newton_max = static_cast<int>(r.integer("solver.newton_max", 50));
  s.guard_delta = r.num("solver.guard_delta", 1e-6);
  try {
    s.validate();
  } catch (const ConfigMismatch& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }

  InitialSpec& ini = cfg.initial;
  ini.kind = r.str("initial.kind", "cosine");
  if (ini.kind != "constant" && ini.kind != "cosine" && ini.kind != "file") {
    throw ConfigError("key initial.kind: expected constant, cosine or file, got '" + ini.kind + "'");
  }
  ini.mean = r.num("initial.mean", 0.0);
  ini.amplitude = r.num("initial.amplitude", 0.0);
  ini.wavenumber = static_cast<int>(r.integer("initial.wavenumber", 1));
  if (ini.kind == "file") {
    ini.file = r.str("initial.file");
    if (ini.file.is_relative()) ini.file = base_dir / ini.file;
  }

  ControlSpec& ctl = cfg.control;
  ctl.kind = r.str("control.kind", "zero");
  if (ctl.kind != "zero" && ctl.kind != "constant" && ctl.kind != "smooth") {
    throw ConfigError("key control.kind: expected zero, constant or smooth, got '" + ctl.kind + "'");
  }
  ctl.value = r.num("control.value", 0.0);
  for (int k = 0; k < 4; ++k) ctl.a[static_cast<std::size_t>(k)] = r.num("control.a" + std::to_string(k), 0.0);

  CostSpec& c = cfg.cost;
  c = CostSpec::zeros(cfg.geometry, s.time);
  c.bQ = r.num("cost.bQ", 0.0);
  c.bSigma = r.num("cost.bSigma", 0.0);
  c.bOmega = r.num("cost.bOmega", 0.0);
  c.bGamma = r.num("cost.bGamma", 0.0);
  c.b0 = r.num("cost.b0", 0.0);
  for (double b : {c.bQ, c.bSigma, c.bOmega, c.bGamma, c.b0}) {
    if (b < 0.0) throw ConfigError("cost weights must be nonnegative");
  }
  {
    const double m = r.num("cost.target_mean", 0.0);
    const double a = r.num("cost.target_amplitude", 0.0);
    const int k = static_cast<int>(r.integer("cost.target_wavenumber", 1));
    const GeometryPtr g = cfg.geometry;
    const InteriorField z = InteriorField::from_function(g, [&](double x, double y) { return m + a * profile(*g, k, x, y); });
    const BoundaryField zg = trace(z);
    for (auto& f : c.zQ) f = z;
    for (auto& f : c.zSigma) f = zg;
    c.zOmega = z;
    c.zGamma = zg;
  }

  try {
    cfg.box = ControlBox::constant(cfg.geometry, s.time, r.num("box.u_min", -1.0), r.num("box.u_max", 1.0),
                                   r.num("box.M0", 1e6));
  } catch (const ConfigMismatch& e) {
    throw ConfigError(std::string("box: ") + e.what());
  }

  PgdOptions& o = cfg.optimizer;
  o.step0 = r.num("optimizer.step0", 1.0);
  o.armijo_c = r.num("optimizer.armijo_c", 1e-4);
  o.shrink = r.num("optimizer.shrink", 0.5);
  o.max_iter = static_cast<int>(r.integer("optimizer.max_iter", 100));
  o.max_backtracks = static_cast<int>(r.integer("optimizer.max_backtracks", 40));
  o.stat_tol = r.num("optimizer.stat_tol", 0.0);
  o.vi_probes = static_cast<int>(r.integer("optimizer.vi_probes", 100));
  if (!(o.step0 > 0.0) || !(o.shrink > 0.0 && o.shrink < 1.0) || o.max_iter < 0) {
    throw ConfigError("optimizer: need step0 > 0, 0 < shrink < 1 and max_iter >= 0");
  }

  VerifyOptions& v = cfg.verify;
  v.fd_eps = r.list("verify.fd_eps", v.fd_eps);
  v.taylor_eps = r.list("verify.taylor_eps", v.taylor_eps);
  v.direction_amplitude = r.num("verify.direction_amplitude", v.direction_amplitude);
  v.duality_pairs = static_cast<int>(r.integer("verify.duality_pairs", v.duality_pairs));
  v.stability_pairs = static_cast<int>(r.integer("verify.stability_pairs", v.stability_pairs));
  v.stability_amplitude = r.num("verify.stability_amplitude", v.stability_amplitude);
  v.corrupt_adjoint = r.boolean("verify.corrupt_adjoint", false);

  cfg.seed = static_cast<std::uint64_t>(r.integer("run.seed", 1));
  o.seed = cfg.seed;
  cfg.output_dir = r.str("run.output_dir", "out");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

}  // namespace chc
