#include <cmath>

#include "chc/errors.hpp"
#include "chc/grid.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace chc;

TEST_CASE("integrate_interior: constants and the trapezoid oracle") {
  const auto g = Geometry::interval(101, 1.0);
  CHECK(integrate_interior(InteriorField::constant(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate_interior(InteriorField::zeros(g)) == 0.0);

  const InteriorField f = InteriorField::from_function(g, [](double x, double) { return x; });
  // Oracle: composite trapezoid over the node list, computed independently.
  const double expected = oracle::quad_interior(*g, f.values);
  CHECK(expected == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(integrate_interior(f) == doctest::Approx(expected).epsilon(1e-14));

  const auto s = Geometry::strip(16, 9, 2.0, 0.5);
  CHECK(integrate_interior(InteriorField::constant(s, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s->measure() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrate_boundary") {
  CHECK(integrate_boundary(BoundaryField::constant(Geometry::interval(9, 3.0), 1.0)) == 2.0);
  const auto s = Geometry::strip(20, 7, 1.0, 0.3);
  CHECK(integrate_boundary(BoundaryField::constant(s, 1.0)) == doctest::Approx(2.0).epsilon(1e-14));

  // sin(2 pi x / lx) on the bottom line only: a full period integrates to 0.
  BoundaryField b = BoundaryField::zeros(s);
  for (int i = 0; i < s->nx(); ++i) b.values(i) = std::sin(2 * M_PI * oracle::node_x(*s, s->boundary_node(i)));
  CHECK(std::abs(integrate_boundary(b)) <= 1e-15);
}

TEST_CASE("mean_value") {
  const auto g = Geometry::strip(12, 5, 1.0, 1.0);
  CHECK(mean_value(InteriorField::constant(g, -0.7)) == doctest::Approx(-0.7).epsilon(1e-14));
  CHECK(mean_value(InteriorField::zeros(g)) == 0.0);
  const InteriorField m = InteriorField::from_function(g, [](double x, double y) {
    return std::cos(2 * M_PI * x) * (1 + y);
  });
  CHECK(std::abs(mean_value(m)) <= 1e-15);
}

TEST_CASE("neg_laplacian: kernel, eigenmode and symmetry") {
  const auto g = Geometry::strip(24, 9, 1.5, 0.5);
  CHECK(neg_laplacian(InteriorField::constant(g, 3.0)).values.cwiseAbs().maxCoeff() <= 1e-11);

  // cos(2 pi x / lx) constant in y: eigenvalue (2 pi / lx)^2 up to O(h^2).
  auto err = [](int nx) {
    const auto s = Geometry::strip(nx, 5, 1.5, 0.5);
    const InteriorField f = InteriorField::from_function(s, [](double x, double) { return std::cos(2 * M_PI * x / 1.5); });
    const double k2 = std::pow(2 * M_PI / 1.5, 2);
    return (neg_laplacian(f).values - k2 * f.values).cwiseAbs().maxCoeff() / k2;
  };
  const double e1 = err(16), e2 = err(32);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));

  oracle::Rng rng(11);
  for (int k = 0; k < 10; ++k) {
    const InteriorField f = oracle::random_interior(g, rng), h = oracle::random_interior(g, rng);
    const double a = dot_H(neg_laplacian(f), h), b = dot_H(neg_laplacian(h), f);
    CHECK(std::abs(a - b) <= 1e-12 * (std::abs(a) + 1.0));
  }
}

TEST_CASE("neg_laplace_beltrami") {
  const auto i = Geometry::interval(17, 1.0);
  oracle::Rng rng(2);
  CHECK(neg_laplace_beltrami(oracle::random_boundary(i, rng)).values.cwiseAbs().maxCoeff() == 0.0);

  const auto s = Geometry::strip(32, 5, 1.0, 0.5);
  CHECK(neg_laplace_beltrami(BoundaryField::constant(s, 2.0)).values.cwiseAbs().maxCoeff() <= 1e-11);

  BoundaryField b = BoundaryField::zeros(s);
  for (int k = 0; k < s->nx(); ++k) b.values(k) = std::cos(2 * M_PI * oracle::node_x(*s, s->boundary_node(k)));
  const BoundaryField lb = neg_laplace_beltrami(b);
  const double k2 = 4 * M_PI * M_PI;
  CHECK((lb.values - k2 * b.values).cwiseAbs().maxCoeff() <= 0.01 * k2);
}

TEST_CASE("normal_trace_flux: constants, linear profile, Green identity") {
  const auto s = Geometry::strip(12, 9, 1.0, 0.8);
  CHECK(normal_trace_flux(InteriorField::constant(s, 1.0)).values.cwiseAbs().maxCoeff() <= 1e-11);

  const double slope = 1.7;
  const InteriorField f = InteriorField::from_function(s, [&](double, double y) { return slope * y; });
  const BoundaryField d = normal_trace_flux(f);
  for (int b = 0; b < s->boundary_count(); ++b) {
    const bool top = b >= s->nx();
    CHECK(d.values(b) == doctest::Approx(top ? slope : -slope).epsilon(1e-9));
  }

  // Interval: outward derivative is -f'(0) at the left end, f'(lx) at the right.
  const auto i = Geometry::interval(41, 2.0);
  const InteriorField q = InteriorField::from_function(i, [](double x, double) { return x * x; });
  const BoundaryField dq = normal_trace_flux(q);
  CHECK(dq.values(0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(dq.values(1) == doctest::Approx(4.0).epsilon(1e-9));

  oracle::Rng rng(5);
  for (const auto& g : {s, i}) {
    for (int k = 0; k < 5; ++k) {
      const InteriorField u = oracle::random_interior(g, rng), v = oracle::random_interior(g, rng);
      const double lhs = dot_H(neg_laplacian_strong(u), v) + dot_HGamma(normal_trace_flux(u), trace(v));
      const double rhs = gradient_product(u, v);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(rhs) + 1.0) * g->node_count());
    }
  }
}

TEST_CASE("gradient_product agrees with the edge-sum oracle") {
  oracle::Rng rng(8);
  for (const auto& g : {Geometry::interval(33, 1.3), Geometry::strip(10, 6, 1.0, 0.7)}) {
    const InteriorField f = oracle::random_interior(g, rng);
    CHECK(gradient_product(f, f) == doctest::Approx(oracle::quad_gradient_sq(*g, f.values)).epsilon(1e-12));
    const BoundaryField b = trace(f);
    CHECK(boundary_gradient_product(b, b) ==
          doctest::Approx(oracle::quad_surface_gradient_sq(*g, b.values)).epsilon(1e-12));
  }
}

TEST_CASE("inner products") {
  const auto i = Geometry::interval(9, 1.0);
  const CoupledField one = CoupledField::from_interior(InteriorField::constant(i, 1.0));
  CHECK(dot_calH(one, one) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(one.trace_compatible());

  oracle::Rng rng(21);
  const auto s = Geometry::strip(8, 5, 1.0, 1.0);
  CHECK(dot_H(InteriorField::zeros(s), InteriorField::zeros(s)) == 0.0);
  for (int k = 0; k < 20; ++k) {
    const InteriorField f = oracle::random_interior(s, rng), h = oracle::random_interior(s, rng);
    CHECK(dot_H(f, f) > 0.0);
    CHECK(std::abs(dot_H(f, h)) <= norm_H(f) * norm_H(h) * (1 + 1e-14));
    const CoupledField a = CoupledField::from_interior(f), b = CoupledField::from_interior(h);
    CHECK(std::abs(dot_calH(a, b)) <= norm_calH(a) * norm_calH(b) * (1 + 1e-14));
  }
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(Geometry::interval(2, 1.0), ConfigMismatch);
  CHECK_THROWS_AS(Geometry::strip(8, 2, 1.0, 1.0), ConfigMismatch);
  CHECK_THROWS_AS(Geometry::interval(5, -1.0), ConfigMismatch);
  const auto a = Geometry::interval(5, 1.0), b = Geometry::interval(7, 1.0);
  CHECK_THROWS_AS(dot_H(InteriorField::zeros(a), InteriorField::zeros(b)), GeometryMismatch);
  InteriorField bad = InteriorField::zeros(a);
  bad.values(2) = std::nan("");
  CHECK_THROWS_AS(validate(bad), GeometryMismatch);
}
