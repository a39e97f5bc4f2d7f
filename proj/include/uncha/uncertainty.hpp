#pragma once

// Hyperbolic uncertainty u(x) = softplus(-|x|), its batch softmax and the
// entropy regularizer over it.

#include <span>
#include <vector>

#include "uncha/manifold.hpp"

namespace uncha {

/// Which magnitude feeds the softplus: the Euclidean norm of the tangent
/// parameterization (default) or the closed-form hyperbolic radius.
enum class UncertaintySource { kNorm, kRadius };

template <class T>
T uncertainty(const std::vector<T>& x) {
  return softplus(-norm(x));
}

template <class T>
T uncertainty(const std::vector<T>& x, const BasicManifold<T>& m, UncertaintySource source) {
  if (source == UncertaintySource::kRadius) return softplus(-hyperbolic_radius(x, m));
  return uncertainty(x);
}

/// Softmax weights over a batch of uncertainties; entries positive, sum 1.
struct NormalizedUncertainty {
  std::vector<double> weights;
};

NormalizedUncertainty normalize_uncertainty(std::span<const double> u);

/// -sum w log w with 0 log 0 = 0.
double entropy(const NormalizedUncertainty& w);

/// Entropy of softmax(u), computed from log-weights so it is differentiable
/// and stable on the tape.
template <class T>
T softmax_entropy(const std::vector<T>& u) {
  require(!u.empty(), "softmax_entropy: empty input");
  const T lse = log_sum_exp(std::span<const T>(u));
  std::vector<T> terms;
  terms.reserve(u.size());
  for (const T& ui : u) {
    const T log_w = ui - lse;
    terms.push_back(exp(log_w) * log_w);
  }
  return -sum(std::span<const T>(terms));
}

}  // namespace uncha
