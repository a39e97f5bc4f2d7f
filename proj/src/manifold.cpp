#include "uncha/manifold.hpp"

#include <cmath>

namespace uncha {

double lorentz_inner(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "lorentz_inner: dimension mismatch");
  require(!p.empty(), "lorentz_inner: empty vectors");
  return dot(p.subspan(1), q.subspan(1)) - p[0] * q[0];
}

LorentzPoint origin(const Manifold& m) {
  return LorentzPoint{std::sqrt(1.0 / m.curvature()), std::vector<double>(m.dim(), 0.0)};
}

LorentzPoint point_from_space(std::vector<double> space, const Manifold& m) {
  require(space.size() == m.dim(), "point_from_space: dimension mismatch");
  const double t = std::sqrt(dot(space, space) + 1.0 / m.curvature());
  return LorentzPoint{t, std::move(space)};
}

TangentEmbedding log_origin(const LorentzPoint& p, const Manifold& m) {
  require(p.space.size() == m.dim(), "log_origin: dimension mismatch");
  const double r = norm(p.space);
  TangentEmbedding v{std::vector<double>(p.space.size(), 0.0)};
  if (r == 0.0) return v;
  const double sqrt_k = std::sqrt(m.curvature());
  const double factor = std::asinh(sqrt_k * r) / (sqrt_k * r);
  for (std::size_t k = 0; k < p.space.size(); ++k) v.space[k] = p.space[k] * factor;
  return v;
}

}  // namespace uncha
