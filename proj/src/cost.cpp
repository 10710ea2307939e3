#include "chc/cost.hpp"

#include "chc/errors.hpp"

namespace chc {

CostSpec CostSpec::zeros(GeometryPtr g, TimeGrid time) {
  CostSpec c;
  const auto n = static_cast<std::size_t>(time.samples());
  c.zQ.assign(n, InteriorField::zeros(g));
  c.zSigma.assign(n, BoundaryField::zeros(g));
  c.zOmega = InteriorField::zeros(g);
  c.zGamma = BoundaryField::zeros(g);
  return c;
}

void CostSpec::validate(const Geometry& g, const TimeGrid& time) const {
  for (double b : {bQ, bSigma, bOmega, bGamma, b0}) {
    if (!(b >= 0.0)) throw ConfigMismatch("cost weights must be nonnegative");
  }
  const auto n = static_cast<std::size_t>(time.samples());
  if (zQ.size() != n || zSigma.size() != n) throw ConfigMismatch("cost targets do not match the time grid");
  for (const auto& z : zQ) {
    chc::validate(z);
    require_same_geometry(g, *z.geometry);
  }
  for (const auto& z : zSigma) {
    chc::validate(z);
    require_same_geometry(g, *z.geometry);
  }
  chc::validate(zOmega);
  chc::validate(zGamma);
  require_same_geometry(g, *zOmega.geometry);
  require_same_geometry(g, *zGamma.geometry);
}

CostSpec CostSpec::scaled(double alpha) const {
  CostSpec c = *this;
  c.bQ *= alpha;
  c.bSigma *= alpha;
  c.bOmega *= alpha;
  c.bGamma *= alpha;
  c.b0 *= alpha;
  return c;
}

}  // namespace chc
