#pragma once

// Named learnable arrays and their binding onto a gradient tape.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "uncha/autodiff.hpp"

namespace uncha {

namespace param_names {
inline constexpr const char* kCurvature = "kappa";
inline constexpr const char* kTauGlobal = "tau_g";
inline constexpr const char* kTauLocal = "tau_l";
inline constexpr const char* kTauGlobalLocal = "tau_gl";
inline constexpr const char* kScaleImage = "c_img";
inline constexpr const char* kScaleText = "c_txt";
}  // namespace param_names

struct Parameter {
  std::string name;
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::vector<double> values;
};

/// Flat registry of learnable arrays in insertion order. Names are unique.
class ParameterStore {
 public:
  void add(std::string name, std::size_t rows, std::size_t cols, std::vector<double> values);
  void add_scalar(std::string name, double value) { add(std::move(name), 1, 1, {value}); }

  bool contains(const std::string& name) const;
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  double scalar(const std::string& name) const;
  void set_scalar(const std::string& name, double value);

  const std::vector<Parameter>& all() const { return params_; }
  std::vector<Parameter>& all() { return params_; }

  /// Projects curvature into [0.1, 10] and temperatures onto [0.01, inf).
  void project();

  bool operator==(const ParameterStore& other) const;

 private:
  std::vector<Parameter> params_;
};

using GradientMap = std::map<std::string, std::vector<double>>;

/// Every entry of every parameter registered as a leaf on one tape.
class BoundParameters {
 public:
  BoundParameters(ad::Tape& tape, const ParameterStore& store);

  ad::Var scalar(const std::string& name) const;
  std::span<const ad::Var> values(const std::string& name) const;
  std::span<const ad::Var> row(const std::string& name, std::size_t r) const;
  const ParameterStore& store() const { return *store_; }

 private:
  friend GradientMap backward(const ad::Tape&, ad::Var, const BoundParameters&);
  const ParameterStore* store_;
  std::map<std::string, std::vector<ad::Var>> leaves_;
  std::map<std::string, std::size_t> cols_;
};

/// Exact reverse-mode gradient of `loss` with respect to every bound
/// parameter. Parameters the loss does not reach get all-zero arrays.
GradientMap backward(const ad::Tape& tape, ad::Var loss, const BoundParameters& bound);

}  // namespace uncha
