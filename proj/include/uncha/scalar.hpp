#pragma once

// Scalar primitives shared by the plain-double geometry and the gradient tape.
// Every function here has a Var overload in autodiff.hpp with the same forward
// value, so templated geometry produces identical numbers on both routes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>

#include "uncha/error.hpp"

namespace uncha {

using std::acos;
using std::asin;
using std::asinh;
using std::atan2;
using std::cosh;
using std::exp;
using std::log;
using std::sinh;
using std::sqrt;

inline double value(double x) { return x; }

namespace prim {

// sinh(x)/x with the analytic limit at 0.
inline double sinhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

inline double sinhc_derivative(double x) {
  if (std::abs(x) < 1e-4) return x / 3.0;
  return (x * std::cosh(x) - std::sinh(x)) / (x * x);
}

inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// acosh with its argument clamped to [1, inf). Arguments below 1 - budget mean
// the caller's points are not on the same hyperboloid.
inline double acosh_checked(double x, double budget) {
  if (!(x >= 1.0 - budget)) {
    std::ostringstream os;
    os.precision(17);
    os << "acosh argument " << x << " below 1 beyond budget " << budget;
    throw NumericalError(os.str());
  }
  return std::acosh(std::max(x, 1.0));
}

inline double acos_checked(double x, double budget) {
  if (!(std::abs(x) <= 1.0 + budget)) {
    std::ostringstream os;
    os.precision(17);
    os << "acos argument " << x << " outside [-1, 1] beyond budget " << budget;
    throw NumericalError(os.str());
  }
  return std::acos(std::clamp(x, -1.0, 1.0));
}

inline double asin_clamped(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "squared_distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) throw ContractError("log_sum_exp of an empty set");
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (std::isinf(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace prim

inline double sinhc(double x) { return prim::sinhc(x); }
inline double softplus(double x) { return prim::softplus(x); }
inline double acosh_checked(double x, double budget) { return prim::acosh_checked(x, budget); }
inline double acos_checked(double x, double budget) { return prim::acos_checked(x, budget); }
inline double asin_clamped(double x) { return prim::asin_clamped(x); }
inline double hinge(double x) { return x > 0.0 ? x : 0.0; }
inline double clamp(double x, double lo, double hi) { return std::clamp(x, lo, hi); }
inline double stop_gradient(double x) { return x; }

inline double sum(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "squared_distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

inline double log_sum_exp(std::span<const double> xs) { return prim::log_sum_exp(xs); }

}  // namespace uncha
