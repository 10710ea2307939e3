#pragma once

#include <string>
#include <utility>
#include <vector>

namespace chc {

enum class PotentialKind {
  RegularQuartic,  // (r^2 - 1)^2 / 4 on R
  Logarithmic,     // (1+r)ln(1+r) + (1-r)ln(1-r) - c r^2 on (-1, 1)
  Quadratic,       // (a/2) r^2 on R; linear test problems only
};

// Evaluations closer than this to +-1 are rejected for the logarithmic kind.
inline constexpr double kEndpointGuard = 1e-12;

struct PotentialSpec {
  PotentialKind kind = PotentialKind::RegularQuartic;
  // c for Logarithmic, a for Quadratic; unused for RegularQuartic.
  double coefficient = 0.0;

  static PotentialSpec regular_quartic() { return {PotentialKind::RegularQuartic, 0.0}; }
  static PotentialSpec logarithmic(double c = 3.0);
  static PotentialSpec quadratic(double a = 1.0) { return {PotentialKind::Quadratic, a}; }

  double r_minus() const;
  double r_plus() const;
  bool singular() const { return kind == PotentialKind::Logarithmic; }
  // True if r lies strictly inside the domain, at least `guard` from a finite endpoint.
  bool contains(double r, double guard = kEndpointGuard) const;
  std::string name() const;
};

struct PotentialPair {
  PotentialSpec bulk;
  PotentialSpec boundary;
  double eta = 1.0;
  double compat_C = 0.0;
};

// order-th derivative (0..3). Throws DomainViolation outside the domain.
double eval(const PotentialSpec& spec, int order, double r);

// f' = beta + pi with beta nondecreasing and pi' bounded.
struct ConvexConcaveSplit {
  double beta = 0.0;
  double pi = 0.0;
};
ConvexConcaveSplit convex_concave_split(const PotentialSpec& spec, double r);
// Derivatives of the two branches (beta' >= 0).
ConvexConcaveSplit convex_concave_split_derivative(const PotentialSpec& spec, double r);

struct AssumptionReport {
  int samples = 0;
  bool domains_coincide = true;
  double max_compat_violation = 0.0;  // max over samples of |f'| - eta |f_G'| - C
  double worst_r = 0.0;
  bool compat_pass = true;
  double min_second_derivative_bulk = 0.0;
  double min_second_derivative_boundary = 0.0;
  // (distance to endpoint or |r|, |f'|) evidence of divergence at each end.
  std::vector<std::pair<double, double>> divergence_lower;
  std::vector<std::pair<double, double>> divergence_upper;
  bool divergence_pass = true;

  bool pass() const { return domains_coincide && compat_pass && divergence_pass; }
};

AssumptionReport check_assumptions(const PotentialPair& pair, int samples);

}  // namespace chc
