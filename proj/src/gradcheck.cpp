#include "uncha/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace uncha {

namespace {

struct Probe {
  double value;
  std::vector<std::uint8_t> kinks;
  std::vector<double> frozen;
};

/// With `frozen`, stop-gradient nodes replay those values, so the difference
/// quotient sees the same function the tape differentiates.
Probe probe(const Objective& f, const ParameterStore& store, const std::vector<double>* frozen = nullptr) {
  ad::Tape tape;
  if (frozen != nullptr) tape.freeze_stop_gradients(*frozen);
  const BoundParameters bound(tape, store);
  const ad::Var y = f(tape, bound);
  return Probe{y.value(), tape.kink_signature(), tape.stop_gradient_values()};
}

std::vector<std::size_t> sample_coords(std::size_t size, std::size_t limit) {
  std::vector<std::size_t> coords;
  if (size <= limit) {
    for (std::size_t k = 0; k < size; ++k) coords.push_back(k);
    return coords;
  }
  for (std::size_t k = 0; k < limit; ++k) coords.push_back(k * size / limit);
  return coords;
}

}  // namespace

bool GradCheckReport::passed() const {
  return std::all_of(params.begin(), params.end(), [](const ParameterCheck& p) { return p.passed; });
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& p : params) m = std::max(m, p.max_rel_error);
  return m;
}

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

double evaluate(const Objective& f, const ParameterStore& store) { return probe(f, store).value; }

GradientMap gradient(const Objective& f, const ParameterStore& store) {
  ad::Tape tape;
  const BoundParameters bound(tape, store);
  const ad::Var y = f(tape, bound);
  return backward(tape, y, bound);
}

GradCheckReport finite_diff_check(const Objective& f, const ParameterStore& store, const GradCheckOptions& opts) {
  require(opts.step >= 1e-7 && opts.step <= 1e-3, "finite_diff_check: step must lie in [1e-7, 1e-3]");
  const GradientMap grads = gradient(f, store);
  const Probe base = probe(f, store);

  GradCheckReport report;
  ParameterStore work = store;
  for (const Parameter& p : store.all()) {
    ParameterCheck check{p.name, 0, 0, 0.0, true};
    const std::vector<double>& g = grads.at(p.name);
    std::vector<double>& slot = work.at(p.name).values;
    for (std::size_t k : sample_coords(p.values.size(), opts.max_coords)) {
      const double x0 = p.values[k];
      auto at = [&](double x) {
        slot[k] = x;
        Probe r = probe(f, work, &base.frozen);
        slot[k] = x0;
        return r;
      };
      const Probe guard_hi = at(x0 + opts.guard_band);
      const Probe guard_lo = at(x0 - opts.guard_band);
      if (guard_hi.kinks != base.kinks || guard_lo.kinks != base.kinks) {
        ++check.skipped;
        continue;
      }
      const Probe hi = at(x0 + opts.step);
      const Probe lo = at(x0 - opts.step);
      const double numeric = (hi.value - lo.value) / (2.0 * opts.step);
      const double err = relative_error(g[k], numeric, opts.relative_floor);
      check.max_rel_error = std::max(check.max_rel_error, err);
      ++check.checked;
    }
    check.passed = check.max_rel_error < opts.tolerance;
    report.params.push_back(check);
  }
  return report;
}

StopGradientCheck check_stop_gradient(const Objective& f, const ParameterStore& store, const std::string& name,
                                      double step) {
  const GradientMap grads = gradient(f, store);
  StopGradientCheck out;
  for (double g : grads.at(name)) out.tape_grad_max_abs = std::max(out.tape_grad_max_abs, std::abs(g));

  // Fixed direction: alternating signs with slowly varying magnitude.
  ParameterStore hi = store;
  ParameterStore lo = store;
  std::vector<double>& vh = hi.at(name).values;
  std::vector<double>& vl = lo.at(name).values;
  for (std::size_t k = 0; k < vh.size(); ++k) {
    const double dir = (k % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.25 * static_cast<double>(k % 3));
    vh[k] += step * dir;
    vl[k] -= step * dir;
  }
  out.directional_fd = (evaluate(f, hi) - evaluate(f, lo)) / (2.0 * step);
  out.passed = out.tape_grad_max_abs == 0.0 && std::abs(out.directional_fd) > 1e-8;
  return out;
}

}  // namespace uncha
