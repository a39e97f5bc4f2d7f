#pragma once

// Entailment cones on the hyperboloid: half-aperture of the cone at a point,
// exterior angle between two points, and cone membership.

#include "uncha/manifold.hpp"

namespace uncha {

/// Aperture constant K and the two aperture multipliers.
struct ConeParams {
  double aperture_k = 0.1;
  double eta_inter = 0.7;
  double eta_intra = 1.2;

  void validate() const;
};

/// asin(clamp(2K / (sqrt(kappa) |p_space|), 0, 1)). Throws
/// DegenerateGeometryError for p at the origin.
template <class T>
T aperture(const Point<T>& p, double k, const BasicManifold<T>& m);

/// Angle at p between the outward radial geodesic through p and the geodesic
/// from p to q. Throws DegenerateGeometryError for coincident points.
template <class T>
T exterior_angle(const Point<T>& p, const Point<T>& q, const BasicManifold<T>& m);

/// Boundary-inclusive: exterior_angle(p, q) <= eta * aperture(p).
bool in_cone(const LorentzPoint& p, const LorentzPoint& q, const ConeParams& cone, double eta, const Manifold& m);

extern template double aperture<double>(const LorentzPoint&, double, const Manifold&);
extern template ad::Var aperture<ad::Var>(const Point<ad::Var>&, double, const BasicManifold<ad::Var>&);
extern template double exterior_angle<double>(const LorentzPoint&, const LorentzPoint&, const Manifold&);
extern template ad::Var exterior_angle<ad::Var>(const Point<ad::Var>&, const Point<ad::Var>&,
                                                const BasicManifold<ad::Var>&);

}  // namespace uncha
