#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uncha/manifold.hpp"

using namespace uncha;

namespace {

oracle::Vec raw(const LorentzPoint& p) {
  oracle::Vec v{p.time};
  v.insert(v.end(), p.space.begin(), p.space.end());
  return v;
}

double constraint_gap(const LorentzPoint& p, const Manifold& m) {
  return std::abs(lorentz_inner(p, p) + 1.0 / m.curvature());
}

}  // namespace

TEST_CASE("lorentz_inner: origin and hand-expanded pair") {
  const Manifold m(1.0, 3);
  const LorentzPoint o = origin(m);
  CHECK(lorentz_inner(o, o) == doctest::Approx(-1.0).epsilon(1e-15));

  const double r2 = std::sqrt(2.0);
  const LorentzPoint p{r2, {1.0, 0.0}};
  const LorentzPoint q{r2, {0.0, 1.0}};
  CHECK(lorentz_inner(p, q) == doctest::Approx(-2.0).epsilon(1e-15));
  const std::vector<double> pr{r2, 1.0, 0.0}, qr{r2, 0.0, 1.0};
  CHECK(lorentz_inner(pr, qr) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("lorentz_inner: matches a scalar-loop oracle, symmetric and bilinear") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = oracle::random_vector(rng, 5, 1.5);
    const auto b = oracle::random_vector(rng, 5, 1.5);
    const auto c = oracle::random_vector(rng, 5, 1.5);
    CHECK(std::abs(lorentz_inner(a, b) - oracle::minkowski(a, b)) < 1e-12);
    CHECK(lorentz_inner(a, b) == lorentz_inner(b, a));
    std::vector<double> ac(5);
    for (int k = 0; k < 5; ++k) ac[k] = 2.0 * a[k] + c[k];
    CHECK(std::abs(lorentz_inner(ac, b) - (2.0 * lorentz_inner(a, b) + lorentz_inner(c, b))) < 1e-12);
  }
}

TEST_CASE("lorentz_inner: dimension mismatch is a contract error") {
  const LorentzPoint p{1.0, {0.0, 0.0}};
  const LorentzPoint q{1.0, {0.0}};
  CHECK_THROWS_AS(lorentz_inner(p, q), ContractError);
  const std::vector<double> a{1.0, 0.0}, b{1.0};
  CHECK_THROWS_AS(lorentz_inner(a, b), ContractError);
}

TEST_CASE("manifold: curvature range and dimension are enforced") {
  CHECK_THROWS_AS(Manifold(0.05, 2), ContractError);
  CHECK_THROWS_AS(Manifold(10.5, 2), ContractError);
  CHECK_THROWS_AS(Manifold(1.0, 0), ContractError);
  CHECK(Manifold::clamped(50.0, 2).curvature() == 10.0);
  CHECK(Manifold::clamped(0.0, 2).curvature() == 0.1);
}

TEST_CASE("lift: zero vector maps to the origin") {
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 4);
    const LorentzPoint p = lift(TangentEmbedding{std::vector<double>(4, 0.0)}, m);
    CHECK(p.time == doctest::Approx(std::sqrt(1.0 / k)).epsilon(1e-15));
    for (double x : p.space) CHECK(x == 0.0);
  }
}

TEST_CASE("lift: closed form [cosh a, sinh a] at kappa = 1, n = 1") {
  const Manifold m(1.0, 1);
  for (double a : {-2.5, -0.3, 1e-6, 0.7, 3.0}) {
    const LorentzPoint p = lift(TangentEmbedding{{a}}, m);
    CHECK(std::abs(p.time - std::cosh(a)) < 1e-12 * std::cosh(a));
    CHECK(std::abs(p.space[0] - std::sinh(a)) < 1e-12 * std::max(1.0, std::abs(std::sinh(a))));
  }
}

TEST_CASE("lift: agrees with the cosh/sinh oracle and stays on the hyperboloid") {
  std::mt19937_64 rng(5);
  for (double k : {0.1, 0.5, 1.0, 10.0}) {
    const Manifold m(k, 6);
    for (int trial = 0; trial < 500; ++trial) {
      const auto v = oracle::random_with_norm(rng, 6, 5.0 * std::uniform_real_distribution<>(0, 1)(rng));
      const LorentzPoint p = lift(TangentEmbedding{v}, m);
      const auto ref = oracle::exp_origin(v, k);
      const auto got = raw(p);
      for (std::size_t c = 0; c < got.size(); ++c) {
        CHECK(std::abs(got[c] - ref[c]) <= 1e-12 * std::max(1.0, std::abs(ref[c])));
      }
      CHECK(constraint_gap(p, m) <= 1e-9 * std::max(1.0, k * p.time * p.time));
    }
  }
}

TEST_CASE("log_origin: origin maps to zero, closed-form inverse and round trip") {
  const Manifold m1(1.0, 1);
  CHECK(log_origin(origin(m1), m1).space[0] == 0.0);
  for (double a : {-2.0, 0.4, 3.5}) {
    const LorentzPoint p{std::cosh(a), {std::sinh(a)}};
    CHECK(log_origin(p, m1).space[0] == doctest::Approx(a).epsilon(1e-12));
  }
  std::mt19937_64 rng(9);
  const Manifold m(0.5, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = oracle::random_vector(rng, 8, 1.2);
    const auto back = log_origin(lift(TangentEmbedding{v}, m), m).space;
    double err = 0.0;
    for (int c = 0; c < 8; ++c) err = std::max(err, std::abs(back[c] - v[c]));
    CHECK(err < 1e-9 * std::max(1.0, oracle::euclid_norm(v)));
    // And the other direction: lift(log(p)) = p.
    const LorentzPoint p = lift(TangentEmbedding{v}, m);
    const LorentzPoint again = lift(log_origin(p, m), m);
    CHECK(std::abs(again.time - p.time) < 1e-9 * p.time);
  }
}

TEST_CASE("geodesic_distance: identity, known value, oracle agreement") {
  const Manifold m1(1.0, 1);
  for (double a : {-1.5, 0.2, 4.0}) {
    const LorentzPoint p{std::cosh(a), {std::sinh(a)}};
    CHECK(geodesic_distance(p, p, m1) == 0.0);
    CHECK(geodesic_distance(p, origin(m1), m1) == doctest::Approx(std::abs(a)).epsilon(1e-10));
  }
  std::mt19937_64 rng(3);
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 4);
    for (int trial = 0; trial < 300; ++trial) {
      const auto v = oracle::random_vector(rng, 4, 1.0);
      const auto w = oracle::random_vector(rng, 4, 1.0);
      const LorentzPoint p = lift(TangentEmbedding{v}, m);
      const LorentzPoint q = lift(TangentEmbedding{w}, m);
      const double d = geodesic_distance(p, q, m);
      CHECK(d == geodesic_distance(q, p, m));
      CHECK(std::abs(d - oracle::distance(raw(p), raw(q), k)) < 1e-9 * std::max(1.0, d));
    }
  }
}

TEST_CASE("geodesic_distance: triangle inequality on random triples") {
  std::mt19937_64 rng(17);
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 3);
    for (int trial = 0; trial < 2000; ++trial) {
      LorentzPoint pts[3];
      for (auto& p : pts) p = lift(TangentEmbedding{oracle::random_vector(rng, 3, 1.5)}, m);
      const double dpr = geodesic_distance(pts[0], pts[2], m);
      const double dpq = geodesic_distance(pts[0], pts[1], m);
      const double dqr = geodesic_distance(pts[1], pts[2], m);
      CHECK(dpr <= dpq + dqr + 1e-9);
    }
  }
}

TEST_CASE("geodesic_distance: acosh argument far below 1 is a numerical error") {
  const Manifold m(1.0, 2);
  // Off-hyperboloid input whose acosh argument is 0.5.
  const LorentzPoint p{std::sqrt(0.5), {0.0, 0.0}};
  CHECK_THROWS_AS(geodesic_distance(p, p, m), NumericalError);
}

TEST_CASE("hyperbolic_radius: zero, small and large norm asymptotes") {
  const Manifold m(1.0, 3);
  CHECK(hyperbolic_radius(std::vector<double>(3, 0.0), m) == 0.0);
  const std::vector<double> small{1e-3, 0.0, 0.0};
  CHECK(std::abs(hyperbolic_radius(small, m) - 1e-3) / 1e-3 < 1e-5);
  const std::vector<double> large{1e3, 0.0, 0.0};
  const double r = hyperbolic_radius(large, m);
  CHECK(std::abs(r - std::log(2e3)) / std::log(2e3) < 0.01);
  // Against the acosh form of the same quantity.
  CHECK(r == doctest::Approx(std::acosh(std::sqrt(1.0 + 1e6))).epsilon(1e-12));
}

TEST_CASE("hyperbolic_radius: equals distance to the origin and is monotone") {
  std::mt19937_64 rng(23);
  for (double k : {0.1, 1.0, 10.0}) {
    const Manifold m(k, 5);
    const LorentzPoint o = origin(m);
    std::vector<double> norms;
    for (int trial = 0; trial < 500; ++trial) {
      const double n = 5.0 * std::uniform_real_distribution<>(0, 1)(rng);
      norms.push_back(n);
      // x read as the space component of a hyperboloid point.
      const auto x = oracle::random_with_norm(rng, 5, n);
      const LorentzPoint px = point_from_space(x, m);
      CHECK(std::abs(hyperbolic_radius(x, m) - geodesic_distance(px, o, m)) < 1e-9);
      // A lifted tangent vector v sits at distance |v| from the origin.
      const LorentzPoint pv = lift(TangentEmbedding{x}, m);
      CHECK(std::abs(hyperbolic_radius(pv.space, m) - n) < 1e-9);
      CHECK(std::abs(geodesic_distance(pv, o, m) - n) < 1e-9);
    }
    std::sort(norms.begin(), norms.end());
    double prev = -1.0;
    for (double n : norms) {
      const double r = hyperbolic_radius(std::vector<double>{n, 0, 0, 0, 0}, m);
      CHECK(r >= prev);
      prev = r;
    }
  }
}

TEST_CASE("tape instantiation matches the double path") {
  ad::Tape tape;
  const std::vector<double> v{0.3, -1.1, 0.8};
  const std::vector<double> w{-0.5, 0.2, 1.4};
  const Manifold m(0.7, 3);
  std::vector<ad::Var> vv, ww;
  for (double x : v) vv.push_back(tape.variable(x));
  for (double x : w) ww.push_back(tape.variable(x));
  const BasicManifold<ad::Var> mv(tape.variable(0.7), 3);
  const auto pv = lift(Tangent<ad::Var>{vv}, mv);
  const auto qv = lift(Tangent<ad::Var>{ww}, mv);
  const double expected = geodesic_distance(lift(TangentEmbedding{v}, m), lift(TangentEmbedding{w}, m), m);
  CHECK(geodesic_distance(pv, qv, mv).value() == doctest::Approx(expected).epsilon(1e-15));
  CHECK(hyperbolic_radius(vv, mv).value() == doctest::Approx(hyperbolic_radius(v, m)).epsilon(1e-15));
}
