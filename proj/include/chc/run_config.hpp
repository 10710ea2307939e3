#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chc/control.hpp"
#include "chc/cost.hpp"
#include "chc/optimizer.hpp"
#include "chc/potentials.hpp"
#include "chc/state.hpp"

namespace chc {

// Smooth profile used for initial data and targets:
//   Interval1D: cos(pi k x / lx), Strip2D: cos(2 pi k x / lx) (1 + cos(pi y / ly)) / 2.
double profile(const Geometry& g, int wavenumber, double x, double y);

struct InitialSpec {
  std::string kind = "cosine";  // constant | cosine | file
  double mean = 0.0;
  double amplitude = 0.0;
  int wavenumber = 1;
  std::filesystem::path file;

  CoupledField build(const GeometryPtr& g) const;
};

struct ControlSpec {
  std::string kind = "zero";  // zero | constant | smooth
  double value = 0.0;
  std::array<double, 4> a{};  // smooth_control coefficients

  ControlSignal build(const GeometryPtr& g, TimeGrid time) const;
};

struct VerifyOptions {
  std::vector<double> fd_eps{1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> taylor_eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  double direction_amplitude = 1.0;  // coefficients of the random smooth direction
  int duality_pairs = 20;
  int stability_pairs = 20;
  double stability_amplitude = 0.5;
  bool corrupt_adjoint = false;
};

struct RunConfig {
  GeometryPtr geometry;
  PotentialPair pair;
  SolverConfig solver;
  InitialSpec initial;
  ControlSpec control;
  CostSpec cost;
  ControlBoxPtr box;
  PgdOptions optimizer;
  VerifyOptions verify;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::string text;  // exact config contents

  ControlProblem problem() const;
};

// Reads an INI file. Unknown sections or keys, missing required keys
// (geometry.mode, geometry.nx, solver.T, solver.nt, potentials.bulk,
// potentials.boundary) and malformed values raise ConfigError naming the key.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".");

}  // namespace chc
