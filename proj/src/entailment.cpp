#include "uncha/entailment.hpp"

#include <cmath>
#include <numbers>

namespace uncha {

void ConeParams::validate() const {
  require(aperture_k > 0.0, "cone: K must be positive");
  require(eta_inter > 0.0 && eta_intra > 0.0, "cone: eta values must be positive");
}

template <class T>
T aperture(const Point<T>& p, double k, const BasicManifold<T>& m) {
  const T r = norm(p.space);
  if (!(value(r) > 0.0)) throw DegenerateGeometryError("aperture is undefined for a cone apex at the origin");
  return asin_clamped(2.0 * k / (sqrt(m.curvature()) * r));
}

template <class T>
T exterior_angle(const Point<T>& p, const Point<T>& q, const BasicManifold<T>& m) {
  const T& kappa = m.curvature();
  const T rp = norm(p.space);
  const T rq = norm(q.space);
  if (!(value(rp) > 0.0)) throw DegenerateGeometryError("exterior angle is undefined at the origin");
  // q at the origin lies straight behind p.
  if (!(value(rq) > 0.0)) return 0.0 * rp + std::numbers::pi;

  // Triangle (origin, p, q): sides a = sqrt(kappa) |p|_H and b = sqrt(kappa)
  // |q|_H from the origin, angle theta between p_space and q_space at the
  // origin. The interior angle A at p satisfies
  //   tan A = sinh b sin theta / (sinh(a - b) + 2 cosh a sinh b sin^2(theta/2)),
  // which equals the closed form
  //   cos(pi - A) = (q_t + p_t k<p,q>) / (|p_space| sqrt((k<p,q>)^2 - 1))
  // but has no cancellation for points far from the origin.
  std::vector<T> a_dir, b_dir;
  a_dir.reserve(p.space.size());
  b_dir.reserve(q.space.size());
  for (const T& x : p.space) a_dir.push_back(rq * x);
  for (const T& x : q.space) b_dir.push_back(rp * x);
  // sin^2(theta/2) = |rq p - rp q|^2 / (4 rp^2 rq^2)
  const T s2 = clamp(squared_distance(std::span<const T>(a_dir), std::span<const T>(b_dir)) /
                         (4.0 * rp * rp * rq * rq),
                     0.0, 1.0);
  const T sk = sqrt(kappa);
  const T sinh_a = sk * rp;
  const T sinh_b = sk * rq;
  const T cosh_a = sqrt(1.0 + sinh_a * sinh_a);
  const T a = asinh(sinh_a);
  const T b = asinh(sinh_b);

  // sinh^2 of half the scaled distance p-q; zero means coincident points.
  const double half = std::sinh(0.5 * (value(a) - value(b)));
  const double h = half * half + value(sinh_a) * value(sinh_b) * value(s2);
  if (!(h > 1e-24)) throw DegenerateGeometryError("exterior angle is undefined for coincident points");

  const T sin_theta = 2.0 * sqrt(s2 * (1.0 - s2));
  const T y = sinh_b * sin_theta;
  const T x = sinh(a - b) + 2.0 * cosh_a * sinh_b * s2;
  return std::numbers::pi - atan2(y, x);
}

bool in_cone(const LorentzPoint& p, const LorentzPoint& q, const ConeParams& cone, double eta, const Manifold& m) {
  return exterior_angle(p, q, m) <= eta * aperture(p, cone.aperture_k, m);
}

template double aperture<double>(const LorentzPoint&, double, const Manifold&);
template ad::Var aperture<ad::Var>(const Point<ad::Var>&, double, const BasicManifold<ad::Var>&);
template double exterior_angle<double>(const LorentzPoint&, const LorentzPoint&, const Manifold&);
template ad::Var exterior_angle<ad::Var>(const Point<ad::Var>&, const Point<ad::Var>&, const BasicManifold<ad::Var>&);

}  // namespace uncha
