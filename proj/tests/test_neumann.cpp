#include <cmath>
#include <vector>

#include "chc/errors.hpp"
#include "chc/neumann.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace chc;

namespace {

InteriorField zero_mean(const InteriorField& f) {
  InteriorField out = f;
  out.values.array() -= oracle::quad_interior(*f.geometry, f.values) / f.geometry->measure();
  return out;
}

}  // namespace

TEST_CASE("apply_N: zero input") {
  const auto g = Geometry::strip(10, 5, 1.0, 1.0);
  CHECK(apply_N(ZeroMeanField::checked(InteriorField::zeros(g))).inner.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_N: periodic eigenmode") {
  auto err = [](int nx) {
    const double lx = 1.2;
    const auto g = Geometry::strip(nx, 5, lx, 0.5);
    const InteriorField v = InteriorField::from_function(g, [&](double x, double) { return std::cos(2 * M_PI * x / lx); });
    const double inv = std::pow(lx / (2 * M_PI), 2);
    const InteriorField u = apply_N(ZeroMeanField::checked(v)).inner;
    return (u.values - inv * v.values).cwiseAbs().maxCoeff() / inv;
  };
  const double e1 = err(16), e2 = err(32);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("apply_N: inverse of neg_laplacian on zero-mean fields") {
  oracle::Rng rng(3);
  for (const auto& g : {Geometry::interval(65, 1.0), Geometry::strip(16, 9, 1.0, 0.5)}) {
    for (int k = 0; k < 5; ++k) {
      const InteriorField f = zero_mean(oracle::smooth_interior(g, rng, 0.4, 1.0));
      const InteriorField back = apply_N(ZeroMeanField::checked(neg_laplacian(f)), 1e-13).inner;
      CHECK((back.values - f.values).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(std::abs(mean_value(back)) <= 1e-14);
    }
  }
}

TEST_CASE("property: N is symmetric") {
  oracle::Rng rng(19);
  const auto g = Geometry::strip(12, 7, 1.0, 0.6);
  for (int k = 0; k < 20; ++k) {
    const auto u = ZeroMeanField::project(oracle::random_interior(g, rng));
    const auto v = ZeroMeanField::project(oracle::random_interior(g, rng));
    const double a = dot_H(u.inner, apply_N(v, 1e-13).inner);
    const double b = dot_H(v.inner, apply_N(u, 1e-13).inner);
    CHECK(std::abs(a - b) <= 1e-10 * (std::abs(a) + 1e-3));
  }
}

TEST_CASE("dual norm of an eigenmode") {
  const double lx = 1.0, a = 0.7;
  const auto g = Geometry::strip(48, 5, lx, 0.5);
  const InteriorField v = InteriorField::from_function(g, [&](double x, double) { return a * std::cos(2 * M_PI * x / lx); });
  const double expected = a * a * g->measure() / 2 * std::pow(lx / (2 * M_PI), 2);
  CHECK(dual_norm_sq(ZeroMeanField::checked(v)) == doctest::Approx(expected).epsilon(5e-3));
  CHECK(dual_norm_sq(ZeroMeanField::checked(InteriorField::zeros(g))) == 0.0);
}

TEST_CASE("ZeroMeanField guards") {
  const auto g = Geometry::interval(9, 1.0);
  CHECK_THROWS_AS(ZeroMeanField::checked(InteriorField::constant(g, 0.1)), NotZeroMean);
  CHECK(std::abs(mean_value(ZeroMeanField::project(InteriorField::constant(g, 0.1)).inner)) <= 1e-16);
}

TEST_CASE("apply_M: closed forms") {
  const auto g = Geometry::strip(8, 5, 1.0, 0.5);
  const int nt = 10;
  const double T = 0.5, dt = T / nt;
  std::vector<InteriorField> zero(nt + 1, InteriorField::zeros(g)), one(nt + 1, InteriorField::constant(g, 1.0));
  oracle::Rng rng(4);
  std::vector<InteriorField> lambda;
  for (int n = 0; n <= nt; ++n) lambda.push_back(oracle::random_interior(g, rng));

  for (int k = 0; k <= nt; ++k) {
    CHECK(apply_M(zero, lambda, zero, 0.0, k, dt) == 0.0);
    // q = 0, phiQ = 1: right-endpoint sum of dt over (t_k, T] is T - t_k.
    CHECK(apply_M(zero, lambda, one, 0.0, k, dt) == doctest::Approx(T - k * dt).epsilon(1e-13));
  }
  CHECK(apply_M(zero, lambda, zero, 2.0, nt, dt) == 2.0);
  CHECK_THROWS_AS(apply_M(zero, lambda, zero, 0.0, nt + 1, dt), ConfigMismatch);
}
