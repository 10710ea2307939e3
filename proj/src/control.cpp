#include "chc/control.hpp"

#include <algorithm>
#include <cmath>

#include "chc/errors.hpp"

namespace chc {

namespace {

void require_grid(const ControlSignal& a, const ControlSignal& b) {
  require_same_geometry(*a.geometry, *b.geometry);
  if (!(a.time == b.time) || a.values.size() != b.values.size()) {
    throw ConfigMismatch("control signals live on different time grids");
  }
}

}  // namespace

std::shared_ptr<const ControlBox> ControlBox::constant(GeometryPtr g, TimeGrid time, double lo, double hi,
                                                       double M0) {
  auto box = std::make_shared<ControlBox>();
  const int nb = g->boundary_count();
  box->geometry = g;
  box->time = time;
  box->u_min.assign(static_cast<std::size_t>(time.samples()), Vector::Constant(nb, lo));
  box->u_max.assign(static_cast<std::size_t>(time.samples()), Vector::Constant(nb, hi));
  box->M0 = M0;
  box->validate();
  return box;
}

void ControlBox::validate() const {
  if (!geometry) throw ConfigMismatch("control box has no geometry");
  if (!(M0 > 0.0)) throw ConfigMismatch("control box needs M0 > 0");
  const auto n = static_cast<std::size_t>(time.samples());
  if (u_min.size() != n || u_max.size() != n) throw ConfigMismatch("control box time grid mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    if (u_min[k].size() != geometry->boundary_count() || u_max[k].size() != geometry->boundary_count()) {
      throw ConfigMismatch("control box size mismatch");
    }
    if ((u_min[k].array() > u_max[k].array()).any()) throw ConfigMismatch("control box is empty (u_min > u_max)");
  }
}

ControlSignal ControlSignal::zeros(GeometryPtr g, TimeGrid time) { return constant(std::move(g), time, 0.0); }

ControlSignal ControlSignal::constant(GeometryPtr g, TimeGrid time, double c) {
  ControlSignal u;
  u.values.assign(static_cast<std::size_t>(time.samples()), Vector::Constant(g->boundary_count(), c));
  u.geometry = std::move(g);
  u.time = time;
  return u;
}

void ControlSignal::validate() const {
  if (!geometry) throw GeometryMismatch("control has no geometry");
  if (values.size() != static_cast<std::size_t>(time.samples())) {
    throw ConfigMismatch("control needs nt+1 samples");
  }
  for (const auto& v : values) {
    if (v.size() != geometry->boundary_count()) throw GeometryMismatch("control sample size mismatch");
    if (!v.allFinite()) throw GeometryMismatch("control sample has non-finite entries");
  }
}

ControlSignal add_scaled(const ControlSignal& a, double alpha, const ControlSignal& b) {
  require_grid(a, b);
  ControlSignal out = a;
  for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] += alpha * b.values[n];
  return out;
}

ControlSignal scaled(const ControlSignal& a, double alpha) {
  ControlSignal out = a;
  for (auto& v : out.values) v *= alpha;
  return out;
}

double dot_sigma(const Geometry& g, const TimeGrid& time, const BoundarySeries& a, const BoundarySeries& b) {
  double s = 0.0;
  for (std::size_t n = 1; n < a.size(); ++n) {
    s += (g.boundary_weights().array() * a[n].array() * b[n].array()).sum();
  }
  return time.dt() * s;
}

double dot_sigma(const ControlSignal& a, const ControlSignal& b) {
  require_grid(a, b);
  return dot_sigma(*a.geometry, a.time, a.values, b.values);
}

double norm_sigma(const ControlSignal& a) { return std::sqrt(dot_sigma(a, a)); }

double derivative_norm(const Geometry& g, const TimeGrid& time, const BoundarySeries& u) {
  const double dt = time.dt();
  double s = 0.0;
  for (std::size_t n = 0; n + 1 < u.size(); ++n) {
    s += (g.boundary_weights().array() * (u[n + 1] - u[n]).array().square()).sum() / dt;
  }
  return std::sqrt(s);
}

double derivative_norm(const ControlSignal& u) { return derivative_norm(*u.geometry, u.time, u.values); }

namespace {

void clamp(BoundarySeries& u, const ControlBox& box) {
  for (std::size_t n = 0; n < u.size(); ++n) u[n] = u[n].cwiseMax(box.u_min[n]).cwiseMin(box.u_max[n]);
}

}  // namespace

ControlSignal project_box(const BoundarySeries& raw, const ControlBoxPtr& box, ProjectionInfo* info) {
  if (!box) throw ConfigMismatch("project_box needs a control box");
  if (raw.size() != box->u_min.size()) throw ConfigMismatch("project_box: time grid mismatch");
  const Geometry& g = *box->geometry;
  BoundarySeries u = raw;
  clamp(u, *box);
  ProjectionInfo local;
  double dn = derivative_norm(g, box->time, u);
  if (dn > box->M0) {
    local.budget_active = true;
    Vector mean = Vector::Zero(g.boundary_count());
    for (const auto& v : u) mean += v;
    mean /= static_cast<double>(u.size());
    // Derivative norm is 1-homogeneous in the fluctuation.
    const double s = box->M0 / dn;
    for (auto& v : u) v = mean + s * (v - mean);
    clamp(u, *box);
    dn = derivative_norm(g, box->time, u);
    local.feasible = dn <= box->M0 * (1.0 + 1e-9);
  }
  local.derivative_norm = dn;
  if (info) *info = local;
  ControlSignal out;
  out.geometry = box->geometry;
  out.time = box->time;
  out.values = std::move(u);
  out.box = box;
  return out;
}

ControlSignal project_box(const ControlSignal& raw, const ControlBoxPtr& box, ProjectionInfo* info) {
  raw.validate();
  if (!(raw.time == box->time)) throw ConfigMismatch("project_box: time grid mismatch");
  return project_box(raw.values, box, info);
}

bool is_feasible(const ControlSignal& u, const ControlBox& box, double box_tol) {
  for (std::size_t n = 0; n < u.values.size(); ++n) {
    if ((u.values[n].array() < box.u_min[n].array() - box_tol).any()) return false;
    if ((u.values[n].array() > box.u_max[n].array() + box_tol).any()) return false;
  }
  return derivative_norm(u) <= box.M0 * (1.0 + 1e-9);
}

}  // namespace chc
