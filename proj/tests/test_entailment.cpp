#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "uncha/entailment.hpp"

using namespace uncha;

namespace {

oracle::Vec raw(const LorentzPoint& p) {
  oracle::Vec v{p.time};
  v.insert(v.end(), p.space.begin(), p.space.end());
  return v;
}

LorentzPoint from_raw(const oracle::Vec& v) { return LorentzPoint{v[0], {v.begin() + 1, v.end()}}; }

std::vector<double> scaled(const std::vector<double>& v, double c) {
  std::vector<double> out(v);
  for (double& x : out) x *= c;
  return out;
}

}  // namespace

TEST_CASE("aperture: reference values") {
  const Manifold m01(0.1, 2);
  const double boundary = 2.0 * 0.1 / std::sqrt(0.1);
  const LorentzPoint p = point_from_space({boundary, 0.0}, m01);
  CHECK(aperture(p, 0.1, m01) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-7));

  const Manifold m1(1.0, 3);
  const LorentzPoint q = point_from_space({0.0, 1.0, 0.0}, m1);
  CHECK(std::abs(aperture(q, 0.1, m1) - std::asin(0.2)) < 1e-15);
  CHECK(aperture(q, 0.1, m1) == doctest::Approx(0.20136).epsilon(1e-5));

  const LorentzPoint far = point_from_space({1e8, 0.0, 0.0}, m1);
  CHECK(aperture(far, 0.1, m1) > 0.0);
  CHECK(aperture(far, 0.1, m1) < 1e-8);

  // Saturated plateau inside the boundary.
  const LorentzPoint near = point_from_space({0.01, 0.0, 0.0}, m1);
  CHECK(aperture(near, 0.1, m1) == std::numbers::pi / 2);
}

TEST_CASE("aperture: non-increasing in the apex norm") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.01, 10.0);
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 3);
    for (int trial = 0; trial < 1000; ++trial) {
      double a = unif(rng), b = unif(rng);
      if (a > b) std::swap(a, b);
      const auto dir = oracle::random_with_norm(rng, 3, 1.0);
      const double wa = aperture(point_from_space(scaled(dir, a), m), 0.1, m);
      const double wb = aperture(point_from_space(scaled(dir, b), m), 0.1, m);
      CHECK(wa >= wb);
      CHECK(wb > 0.0);
      CHECK(wa <= std::numbers::pi / 2);
    }
  }
}

TEST_CASE("aperture and exterior_angle: degenerate inputs") {
  const Manifold m(1.0, 2);
  const LorentzPoint o = origin(m);
  const LorentzPoint p = point_from_space({0.5, 0.2}, m);
  CHECK_THROWS_AS(aperture(o, 0.1, m), DegenerateGeometryError);
  CHECK_THROWS_AS(exterior_angle(o, p, m), DegenerateGeometryError);
  CHECK_THROWS_AS(exterior_angle(p, p, m), DegenerateGeometryError);
  CHECK_THROWS_AS(in_cone(p, p, ConeParams{}, 1.0, m), DegenerateGeometryError);
}

TEST_CASE("exterior_angle: collinear continuation and reversal") {
  std::mt19937_64 rng(5);
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 4);
    for (int trial = 0; trial < 300; ++trial) {
      const auto v = oracle::random_with_norm(rng, 4, 0.2 + 2.0 * std::uniform_real_distribution<>(0, 1)(rng));
      const LorentzPoint p = lift(TangentEmbedding{v}, m);
      const double c = 1.1 + 2.0 * std::uniform_real_distribution<>(0, 1)(rng);
      const LorentzPoint beyond = lift(TangentEmbedding{scaled(v, c)}, m);
      const LorentzPoint between = lift(TangentEmbedding{scaled(v, 1.0 / c)}, m);
      CHECK(exterior_angle(p, beyond, m) < 1e-6);
      CHECK(std::abs(exterior_angle(p, between, m) - std::numbers::pi) < 1e-6);
      CHECK(in_cone(p, beyond, ConeParams{}, 0.7, m));
    }
  }
}

TEST_CASE("exterior_angle: closed form matches the log-map oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(0.1, 5.0);
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 5);
    double worst = 0.0;
    for (int trial = 0; trial < 3000; ++trial) {
      const LorentzPoint p = lift(TangentEmbedding{oracle::random_with_norm(rng, 5, radius(rng))}, m);
      const LorentzPoint q = lift(TangentEmbedding{oracle::random_with_norm(rng, 5, radius(rng))}, m);
      worst = std::max(worst, std::abs(exterior_angle(p, q, m) - oracle::exterior_angle(raw(p), raw(q), k)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("exterior_angle: recovers the launch angle of a constructed geodesic") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 3);
    for (int trial = 0; trial < 500; ++trial) {
      const auto v = oracle::random_with_norm(rng, 3, 0.3 + 2.0 * unif(rng));
      const LorentzPoint p = lift(TangentEmbedding{v}, m);
      const double theta = 0.05 + 3.0 * unif(rng);
      const double t = 0.1 + 1.5 * unif(rng);
      const LorentzPoint q = from_raw(oracle::shoot(raw(p), oracle::orthogonal_to(p.space, rng), theta, t, k));
      CHECK(std::abs(exterior_angle(p, q, m) - theta) < 1e-6);
    }
  }
}

TEST_CASE("in_cone: agrees with the direct comparison and is boundary inclusive") {
  std::mt19937_64 rng(13);
  const ConeParams cone;
  int boundary_cases = 0;
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 3);
    for (int trial = 0; trial < 2000; ++trial) {
      const LorentzPoint p = lift(TangentEmbedding{oracle::random_vector(rng, 3, 1.0)}, m);
      const LorentzPoint q = lift(TangentEmbedding{oracle::random_vector(rng, 3, 1.0)}, m);
      const double phi = exterior_angle(p, q, m);
      const double omega = aperture(p, cone.aperture_k, m);
      for (double eta : {0.7, 1.2}) CHECK(in_cone(p, q, cone, eta, m) == (phi <= eta * omega));
      // eta placing the boundary exactly on phi.
      const double eta = phi / omega;
      if (eta * omega == phi) {
        ++boundary_cases;
        CHECK(in_cone(p, q, cone, eta, m));
      }
    }
  }
  CHECK(boundary_cases > 100);
}

TEST_CASE("cone params: validation") {
  CHECK_NOTHROW(ConeParams{}.validate());
  CHECK_THROWS_AS((ConeParams{0.0, 0.7, 1.2}.validate()), ContractError);
  CHECK_THROWS_AS((ConeParams{0.1, -0.7, 1.2}.validate()), ContractError);
  CHECK_THROWS_AS((ConeParams{0.1, 0.7, 0.0}.validate()), ContractError);
}
