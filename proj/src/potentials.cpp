#include "chc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chc/errors.hpp"

namespace chc {

PotentialSpec PotentialSpec::logarithmic(double c) {
  if (!(c > 0.0)) throw ConfigMismatch("logarithmic potential needs c > 0");
  return {PotentialKind::Logarithmic, c};
}

double PotentialSpec::r_minus() const {
  return kind == PotentialKind::Logarithmic ? -1.0 : -std::numeric_limits<double>::infinity();
}

double PotentialSpec::r_plus() const {
  return kind == PotentialKind::Logarithmic ? 1.0 : std::numeric_limits<double>::infinity();
}

bool PotentialSpec::contains(double r, double guard) const {
  if (!std::isfinite(r)) return false;
  if (kind != PotentialKind::Logarithmic) return true;
  return r > -1.0 + guard && r < 1.0 - guard;
}

std::string PotentialSpec::name() const {
  switch (kind) {
    case PotentialKind::RegularQuartic:
      return "quartic";
    case PotentialKind::Logarithmic:
      return "logarithmic";
    case PotentialKind::Quadratic:
      return "quadratic";
  }
  return "unknown";
}

namespace {

void require_inside(const PotentialSpec& spec, double r) {
  if (!spec.contains(r)) {
    throw DomainViolation(spec.name() + " potential evaluated at r = " + std::to_string(r) +
                          " outside its domain");
  }
}

}  // namespace

double eval(const PotentialSpec& spec, int order, double r) {
  require_inside(spec, r);
  switch (spec.kind) {
    case PotentialKind::RegularQuartic:
      switch (order) {
        case 0: {
          const double s = r * r - 1.0;
          return 0.25 * s * s;
        }
        case 1:
          return r * r * r - r;
        case 2:
          return 3.0 * r * r - 1.0;
        case 3:
          return 6.0 * r;
      }
      break;
    case PotentialKind::Logarithmic: {
      const double c = spec.coefficient;
      switch (order) {
        case 0:
          return (1.0 + r) * std::log1p(r) + (1.0 - r) * std::log1p(-r) - c * r * r;
        case 1:
          return std::log1p(r) - std::log1p(-r) - 2.0 * c * r;
        case 2:
          return 1.0 / (1.0 + r) + 1.0 / (1.0 - r) - 2.0 * c;
        case 3:
          return 1.0 / ((1.0 - r) * (1.0 - r)) - 1.0 / ((1.0 + r) * (1.0 + r));
      }
      break;
    }
    case PotentialKind::Quadratic: {
      const double a = spec.coefficient;
      switch (order) {
        case 0:
          return 0.5 * a * r * r;
        case 1:
          return a * r;
        case 2:
          return a;
        case 3:
          return 0.0;
      }
      break;
    }
  }
  throw ConfigMismatch("potential derivative order must be 0..3, got " + std::to_string(order));
}

ConvexConcaveSplit convex_concave_split(const PotentialSpec& spec, double r) {
  require_inside(spec, r);
  switch (spec.kind) {
    case PotentialKind::RegularQuartic:
      return {r * r * r, -r};
    case PotentialKind::Logarithmic:
      return {std::log1p(r) - std::log1p(-r), -2.0 * spec.coefficient * r};
    case PotentialKind::Quadratic:
      if (spec.coefficient >= 0.0) return {spec.coefficient * r, 0.0};
      return {0.0, spec.coefficient * r};
  }
  return {};
}

ConvexConcaveSplit convex_concave_split_derivative(const PotentialSpec& spec, double r) {
  require_inside(spec, r);
  switch (spec.kind) {
    case PotentialKind::RegularQuartic:
      return {3.0 * r * r, -1.0};
    case PotentialKind::Logarithmic:
      return {1.0 / (1.0 + r) + 1.0 / (1.0 - r), -2.0 * spec.coefficient};
    case PotentialKind::Quadratic:
      if (spec.coefficient >= 0.0) return {spec.coefficient, 0.0};
      return {0.0, spec.coefficient};
  }
  return {};
}

namespace {

// Divergence evidence toward one end of the domain; `sign` is +1 for the upper end.
bool diverges(const PotentialSpec& spec, double lo, double hi, int sign,
              std::vector<std::pair<double, double>>* evidence) {
  std::vector<double> probes;
  if (sign > 0 ? std::isfinite(hi) : std::isfinite(lo)) {
    for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) probes.push_back(sign > 0 ? hi - delta : lo + delta);
  } else {
    for (double mag : {10.0, 100.0, 1000.0, 10000.0}) probes.push_back(sign * mag);
  }
  bool ok = true;
  double previous = -std::numeric_limits<double>::infinity();
  for (double r : probes) {
    const double d = eval(spec, 1, r) * sign;  // should grow to +infinity
    if (evidence) evidence->emplace_back(sign > 0 ? (std::isfinite(hi) ? hi - r : r) : (std::isfinite(lo) ? r - lo : r), std::abs(d));
    if (!(d > previous)) ok = false;
    previous = d;
  }
  return ok && previous > 1.0;
}

}  // namespace

AssumptionReport check_assumptions(const PotentialPair& pair, int samples) {
  if (samples < 2) throw ConfigMismatch("check_assumptions needs at least 2 samples");
  AssumptionReport rep;
  rep.samples = samples;
  const PotentialSpec& f = pair.bulk;
  const PotentialSpec& fg = pair.boundary;
  rep.domains_coincide = f.r_minus() == fg.r_minus() && f.r_plus() == fg.r_plus();
  const double lo = std::max(f.r_minus(), fg.r_minus());
  const double hi = std::min(f.r_plus(), fg.r_plus());

  std::vector<double> rs;
  if (std::isfinite(lo) && std::isfinite(hi)) {
    const double margin = 1e-9;
    for (int k = 0; k < samples; ++k) rs.push_back(lo + margin + (hi - lo - 2.0 * margin) * k / (samples - 1));
    for (double delta : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
      rs.push_back(lo + delta);
      rs.push_back(hi - delta);
    }
  } else {
    const double a = std::isfinite(lo) ? lo + 1e-9 : -10.0;
    const double b = std::isfinite(hi) ? hi - 1e-9 : 10.0;
    for (int k = 0; k < samples; ++k) rs.push_back(a + (b - a) * k / (samples - 1));
  }

  rep.max_compat_violation = -std::numeric_limits<double>::infinity();
  rep.min_second_derivative_bulk = std::numeric_limits<double>::infinity();
  rep.min_second_derivative_boundary = std::numeric_limits<double>::infinity();
  for (double r : rs) {
    if (!f.contains(r) || !fg.contains(r)) continue;
    const double d = std::abs(eval(f, 1, r));
    const double dg = std::abs(eval(fg, 1, r));
    const double violation = d - pair.eta * dg - pair.compat_C;
    if (violation > rep.max_compat_violation) {
      rep.max_compat_violation = violation;
      rep.worst_r = r;
    }
    if (violation > 1e-12 * (1.0 + d)) rep.compat_pass = false;
    rep.min_second_derivative_bulk = std::min(rep.min_second_derivative_bulk, eval(f, 2, r));
    rep.min_second_derivative_boundary = std::min(rep.min_second_derivative_boundary, eval(fg, 2, r));
  }

  const bool bulk_div = diverges(f, lo, hi, +1, &rep.divergence_upper) && diverges(f, lo, hi, -1, &rep.divergence_lower);
  const bool bnd_div = diverges(fg, lo, hi, +1, nullptr) && diverges(fg, lo, hi, -1, nullptr);
  rep.divergence_pass = bulk_div && bnd_div;
  return rep;
}

}  // namespace chc
