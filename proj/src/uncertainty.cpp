#include "uncha/uncertainty.hpp"

#include <algorithm>
#include <cmath>

namespace uncha {

NormalizedUncertainty normalize_uncertainty(std::span<const double> u) {
  require(!u.empty(), "normalize_uncertainty: empty input");
  const double hi = *std::max_element(u.begin(), u.end());
  NormalizedUncertainty out;
  out.weights.reserve(u.size());
  double total = 0.0;
  for (double x : u) {
    out.weights.push_back(std::exp(x - hi));
    total += out.weights.back();
  }
  for (double& w : out.weights) w /= total;
  return out;
}

double entropy(const NormalizedUncertainty& w) {
  double h = 0.0;
  for (double x : w.weights) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace uncha
