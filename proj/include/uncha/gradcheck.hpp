#pragma once

// Central finite-difference verification of tape gradients.

#include <functional>
#include <string>
#include <vector>

#include "uncha/params.hpp"

namespace uncha {

/// Builds a scalar objective on the tape from bound parameters.
using Objective = std::function<ad::Var(ad::Tape&, const BoundParameters&)>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Coordinates checked per parameter; larger arrays are sub-sampled.
  std::size_t max_coords = 200;
  /// Coordinates whose +-guard_band probe crosses a kink are skipped.
  double guard_band = 1e-3;
  /// Denominator floor of the relative error |a - f| / max(|a|, |f|, floor).
  double relative_floor = 1e-3;
};

struct ParameterCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParameterCheck> params;

  bool passed() const;
  double max_rel_error() const;
};

double relative_error(double analytic, double numeric, double floor);

/// Stop-gradient factors are held at their base-point values while
/// differencing; check_stop_gradient covers the blocked paths.
GradCheckReport finite_diff_check(const Objective& f, const ParameterStore& store, const GradCheckOptions& opts = {});

/// Objective value without a backward pass.
double evaluate(const Objective& f, const ParameterStore& store);

/// Tape gradient of the objective at `store`.
GradientMap gradient(const Objective& f, const ParameterStore& store);

struct StopGradientCheck {
  double tape_grad_max_abs = 0.0;   // must be exactly 0
  double directional_fd = 0.0;      // must be nonzero
  bool passed = false;
};

/// For a parameter that reaches the objective only through stop-gradient
/// nodes: the tape gradient must be exactly zero while the directional finite
/// difference along a fixed pseudo-random direction is not.
StopGradientCheck check_stop_gradient(const Objective& f, const ParameterStore& store, const std::string& name,
                                      double step = 1e-5);

}  // namespace uncha
