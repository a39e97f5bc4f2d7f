#pragma once

// Lorentz-model geometry. Every routine is templated on the scalar type so the
// same code runs on plain doubles and on gradient-tape variables (ad::Var).

#include <algorithm>
#include <cstddef>
#include <type_traits>
#include <span>
#include <vector>

#include "uncha/autodiff.hpp"
#include "uncha/scalar.hpp"

namespace uncha {

inline constexpr double kMinCurvature = 0.1;
inline constexpr double kMaxCurvature = 10.0;

/// Relative slack allowed for acosh/acos arguments that drift outside their
/// domain through rounding. Scaled by the magnitude of the inner-product terms.
inline constexpr double kDomainBudget = 1e-6;

/// Space-only vector in the tangent space at the hyperboloid origin; the time
/// component is identically zero.
template <class T>
struct Tangent {
  std::vector<T> space;
};

/// Point on the upper sheet, <p,p>_L = -1/kappa.
template <class T>
struct Point {
  T time{};
  std::vector<T> space;
};

using TangentEmbedding = Tangent<double>;
using LorentzPoint = Point<double>;

/// Curvature -kappa and dimension n. The double instantiation enforces
/// kappa in [0.1, 10]; tape instantiations only require kappa > 0 because a
/// parameter may sit outside the range between an update and its projection.
template <class T>
class BasicManifold {
 public:
  BasicManifold(T curvature, std::size_t dim) : curvature_(curvature), dim_(dim) {
    require(dim >= 1, "manifold dimension must be >= 1");
    if constexpr (std::is_same_v<T, double>) {
      require(curvature >= kMinCurvature && curvature <= kMaxCurvature,
              "curvature must lie in [0.1, 10]");
    } else {
      require(value(curvature) > 0.0, "curvature must be positive");
    }
  }

  /// Projects kappa into [0.1, 10] before construction.
  static BasicManifold clamped(double curvature, std::size_t dim)
    requires std::is_same_v<T, double>
  {
    return BasicManifold(std::clamp(curvature, kMinCurvature, kMaxCurvature), dim);
  }

  const T& curvature() const { return curvature_; }
  std::size_t dim() const { return dim_; }

 private:
  T curvature_;
  std::size_t dim_;
};

using Manifold = BasicManifold<double>;

template <class T>
T norm(const std::vector<T>& v) {
  return sqrt(dot(std::span<const T>(v), std::span<const T>(v)));
}

template <class T>
T lorentz_inner(const Point<T>& p, const Point<T>& q) {
  require(p.space.size() == q.space.size(), "lorentz_inner: dimension mismatch");
  return dot(std::span<const T>(p.space), std::span<const T>(q.space)) - p.time * q.time;
}

/// Inner product of raw (n+1)-vectors laid out as [time, space...].
double lorentz_inner(std::span<const double> p, std::span<const double> q);

LorentzPoint origin(const Manifold& m);

/// Builds the hyperboloid point with the given space component.
LorentzPoint point_from_space(std::vector<double> space, const Manifold& m);

/// Exponential map at the origin.
template <class T>
Point<T> lift(const Tangent<T>& v, const BasicManifold<T>& m) {
  require(v.space.size() == m.dim(), "lift: dimension mismatch");
  const T& kappa = m.curvature();
  const T factor = sinhc(sqrt(kappa) * norm(v.space));
  Point<T> p;
  p.space.reserve(v.space.size());
  for (const T& x : v.space) p.space.push_back(x * factor);
  // time from the constraint rather than cosh(.)/sqrt(kappa): same value,
  // but the hyperboloid identity then holds to rounding.
  p.time = sqrt(dot(std::span<const T>(p.space), std::span<const T>(p.space)) + 1.0 / kappa);
  return p;
}

/// Logarithmic map at the origin; the zero vector for p = origin.
/// acosh(sqrt(kappa) p_time) is evaluated as asinh(sqrt(kappa) |p_space|),
/// which is the same quantity on the hyperboloid and stays accurate near 0.
TangentEmbedding log_origin(const LorentzPoint& p, const Manifold& m);

template <class T>
T geodesic_distance(const Point<T>& p, const Point<T>& q, const BasicManifold<T>& m) {
  require(p.space.size() == q.space.size(), "geodesic_distance: dimension mismatch");
  const T& kappa = m.curvature();
  // Domain check on the acosh argument, in plain doubles.
  const double k = value(kappa);
  double inner = -value(p.time) * value(q.time);
  for (std::size_t i = 0; i < p.space.size(); ++i) inner += value(p.space[i]) * value(q.space[i]);
  const double scale = std::max(1.0, k * value(p.time) * value(q.time));
  prim::acosh_checked(-k * inner, kDomainBudget * scale);
  // Chord form: |p - q|_L^2 = (4/kappa) sinh^2(sqrt(kappa) d / 2). Exact zero
  // for p = q, where acosh near 1 loses half the digits.
  const T dt = p.time - q.time;
  const T chord2 = hinge(squared_distance(std::span<const T>(p.space), std::span<const T>(q.space)) - dt * dt);
  const T sqrt_k = sqrt(kappa);
  return 2.0 * asinh(0.5 * sqrt_k * sqrt(chord2)) / sqrt_k;
}

/// Geodesic distance from the origin of the hyperboloid point whose space
/// component is x: acosh(sqrt(1 + kappa |x|^2)) / sqrt(kappa), written in its
/// asinh form.
template <class T>
T hyperbolic_radius(const std::vector<T>& x, const BasicManifold<T>& m) {
  const T sqrt_k = sqrt(m.curvature());
  return asinh(sqrt_k * norm(x)) / sqrt_k;
}

}  // namespace uncha
