#include "uncha/params.hpp"

#include <algorithm>

#include "uncha/losses.hpp"
#include "uncha/manifold.hpp"

namespace uncha {

void ParameterStore::add(std::string name, std::size_t rows, std::size_t cols, std::vector<double> values) {
  require(!contains(name), "parameter registered twice: " + name);
  require(values.size() == rows * cols, "parameter shape mismatch: " + name);
  params_.push_back(Parameter{std::move(name), rows, cols, std::move(values)});
}

bool ParameterStore::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
}

Parameter& ParameterStore::at(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ContractError("unknown parameter: " + name);
}

const Parameter& ParameterStore::at(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->at(name);
}

double ParameterStore::scalar(const std::string& name) const {
  const Parameter& p = at(name);
  require(p.values.size() == 1, "parameter is not a scalar: " + name);
  return p.values[0];
}

void ParameterStore::set_scalar(const std::string& name, double value) {
  Parameter& p = at(name);
  require(p.values.size() == 1, "parameter is not a scalar: " + name);
  p.values[0] = value;
}

void ParameterStore::project() {
  using namespace param_names;
  if (contains(kCurvature)) {
    double& k = at(kCurvature).values[0];
    k = std::clamp(k, kMinCurvature, kMaxCurvature);
  }
  for (const char* tau : {kTauGlobal, kTauLocal, kTauGlobalLocal}) {
    if (contains(tau)) {
      double& t = at(tau).values[0];
      t = std::max(t, kMinTemperature);
    }
  }
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const Parameter& a = params_[k];
    const Parameter& b = other.params_[k];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols || a.values != b.values) return false;
  }
  return true;
}

BoundParameters::BoundParameters(ad::Tape& tape, const ParameterStore& store) : store_(&store) {
  for (const Parameter& p : store.all()) {
    std::vector<ad::Var> vars;
    vars.reserve(p.values.size());
    for (double v : p.values) vars.push_back(tape.variable(v));
    leaves_.emplace(p.name, std::move(vars));
    cols_.emplace(p.name, p.cols);
  }
}

ad::Var BoundParameters::scalar(const std::string& name) const {
  const auto vals = values(name);
  require(vals.size() == 1, "parameter is not a scalar: " + name);
  return vals[0];
}

std::span<const ad::Var> BoundParameters::values(const std::string& name) const {
  const auto it = leaves_.find(name);
  if (it == leaves_.end()) throw ContractError("unknown parameter: " + name);
  return it->second;
}

std::span<const ad::Var> BoundParameters::row(const std::string& name, std::size_t r) const {
  const auto vals = values(name);
  const std::size_t cols = cols_.at(name);
  require((r + 1) * cols <= vals.size(), "parameter row out of range: " + name);
  return vals.subspan(r * cols, cols);
}

GradientMap backward(const ad::Tape& tape, ad::Var loss, const BoundParameters& bound) {
  const std::vector<double> adj = tape.backward(loss);
  GradientMap grads;
  for (const auto& [name, vars] : bound.leaves_) {
    std::vector<double> g(vars.size(), 0.0);
    for (std::size_t k = 0; k < vars.size(); ++k) {
      if (vars[k].id() < adj.size()) g[k] = adj[vars[k].id()];
    }
    grads.emplace(name, std::move(g));
  }
  return grads;
}

}  // namespace uncha
