#pragma once

// Training objectives: uncertainty-guided contrastive loss, leaky entailment,
// uncertainty calibration with the entropy regularizer, and their aggregate.
//
// All loss routines are templates over the scalar type and are explicitly
// instantiated for double and ad::Var in losses.cpp.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "uncha/entailment.hpp"
#include "uncha/uncertainty.hpp"

namespace uncha {

inline constexpr double kMinTemperature = 0.01;

/// Initial values of the three learnable temperatures.
struct TemperatureSet {
  double global = 0.07;
  double local = 0.07;
  double global_local = 0.06;
};

struct LossConfig {
  TemperatureSet temps;
  ConeParams cone;
  double alpha = 0.1;
  double lambda1 = 0.5;
  double lambda2 = 10.0;
  double lambda_ent = 0.2;
  /// +1 adds the entropy term as printed; -1 subtracts it (entropy maximized).
  double entropy_sign = 1.0;
  /// Adds the positive pair to the contrastive denominator (standard InfoNCE).
  bool include_positive = false;
  UncertaintySource uncertainty_source = UncertaintySource::kNorm;

  void validate() const;
};

/// Live temperature values for one evaluation.
template <class T>
struct Temperatures {
  T global;
  T local;
  T global_local;
};

/// Aligned whole-image, whole-text, part-image, part-text rows. part_of maps
/// part row i to the whole row it belongs to.
template <class T>
struct BatchT {
  std::vector<Tangent<T>> whole_image;
  std::vector<Tangent<T>> whole_text;
  std::vector<Tangent<T>> part_image;
  std::vector<Tangent<T>> part_text;
  std::vector<std::size_t> part_of;

  std::size_t size() const { return whole_image.size(); }
  /// Equal lengths B >= 2 and part_of a bijection onto [0, B).
  void validate() const;
};

using Batch = BatchT<double>;

/// Tangent vectors together with their lifted points.
template <class T>
struct Embedded {
  std::vector<Tangent<T>> tangent;
  std::vector<Point<T>> point;
};

template <class T>
Embedded<T> embed(const std::vector<Tangent<T>>& tangents, const BasicManifold<T>& m);

template <class T>
using Matrix = std::vector<std::vector<T>>;

/// d[i][k] = geodesic distance between anchors[i] and targets[k].
template <class T>
Matrix<T> distance_matrix(const std::vector<Point<T>>& anchors, const std::vector<Point<T>>& targets,
                          const BasicManifold<T>& m);

/// Contrastive loss over a precomputed distance matrix. Row i uses d[i][*]
/// (or column i when `transposed`), temperature taus[i], positive at k = i.
/// The denominator runs over k != i unless include_positive is set.
template <class T>
T contrastive_from_distances(const Matrix<T>& d, bool transposed, std::span<const T> taus, bool include_positive);

template <class T>
T contrastive(const std::vector<Point<T>>& anchors, const std::vector<Point<T>>& targets, std::span<const T> taus,
              const BasicManifold<T>& m, bool include_positive = false);

template <class T>
T contrastive(const std::vector<Point<T>>& anchors, const std::vector<Point<T>>& targets, const T& tau,
              const BasicManifold<T>& m, bool include_positive = false);

/// tau_i = exp(u(part_i) / 2) * tau_gl.
template <class T>
std::vector<T> adaptive_temperatures(const std::vector<Tangent<T>>& parts, const T& tau_gl,
                                     const BasicManifold<T>& m,
                                     UncertaintySource source = UncertaintySource::kNorm);

template <class T>
struct ContrastiveTerms {
  T global;
  T local;
  T global_local;

  T sum() const { return global_local + global + local; }
};

template <class T>
ContrastiveTerms<T> contrastive_total(const BatchT<T>& batch, const Temperatures<T>& temps,
                                      const BasicManifold<T>& m, const LossConfig& cfg);

/// max(0, phi(p, q) - eta * omega(p)).
template <class T>
T entail_hinge(const Point<T>& p, const Point<T>& q, double eta, const ConeParams& cone,
               const BasicManifold<T>& m);

/// Hinge plus alpha * phi(p, q).
template <class T>
T entail_leaky(const Point<T>& p, const Point<T>& q, double eta, const ConeParams& cone, double alpha,
               const BasicManifold<T>& m);

/// sum_i [ stopgrad(entail_leaky(p_i, q_i)) * exp(-u(p_i)) + u(p_i) ] + sign * H(softmax(u)).
/// p are the parts (cone apexes), q the wholes they belong to, row-aligned.
template <class T>
T calibration(const Embedded<T>& parts, const std::vector<Point<T>>& wholes, double eta, const LossConfig& cfg,
              const BasicManifold<T>& m);

template <class T>
struct EntailmentTerms {
  T inter;
  T intra;
  T calibration;

  /// inter + lambda1 * intra + lambda2 * calibration.
  T weighted(const LossConfig& cfg) const { return inter + cfg.lambda1 * intra + cfg.lambda2 * calibration; }
};

template <class T>
EntailmentTerms<T> entailment_total(const BatchT<T>& batch, const BasicManifold<T>& m, const LossConfig& cfg);

template <class T>
struct LossTerms {
  ContrastiveTerms<T> contrastive;
  EntailmentTerms<T> entailment;
  T total;
};

/// contrastive_total + lambda_ent * (inter + lambda1 * intra + lambda2 * calibration).
template <class T>
LossTerms<T> total_loss(const BatchT<T>& batch, const Temperatures<T>& temps, const BasicManifold<T>& m,
                        const LossConfig& cfg);

/// Plain-number decomposition of one total_loss evaluation.
struct LossReport {
  double total = 0.0;
  std::map<std::string, double> components;

  /// Recomputes the total from the components with the given weights.
  static double combine(const std::map<std::string, double>& components, const LossConfig& cfg);
};

template <class T>
LossReport make_report(const LossTerms<T>& terms);

}  // namespace uncha
