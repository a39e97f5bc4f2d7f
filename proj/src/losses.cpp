#include "uncha/losses.hpp"

#include <cmath>

namespace uncha {

void LossConfig::validate() const {
  cone.validate();
  require(temps.global >= kMinTemperature && temps.local >= kMinTemperature &&
              temps.global_local >= kMinTemperature,
          "temperatures must be >= 0.01");
  require(alpha >= 0.0, "alpha must be >= 0");
  require(entropy_sign == 1.0 || entropy_sign == -1.0, "entropy_sign must be +1 or -1");
  require(std::isfinite(lambda1) && std::isfinite(lambda2) && std::isfinite(lambda_ent), "loss weights must be finite");
}

template <class T>
void BatchT<T>::validate() const {
  const std::size_t b = whole_image.size();
  require(b >= 2, "batch: B must be >= 2");
  require(whole_text.size() == b && part_image.size() == b && part_text.size() == b && part_of.size() == b,
          "batch: all four embedding sets and part_of must have equal length");
  std::vector<bool> hit(b, false);
  for (std::size_t w : part_of) {
    require(w < b, "batch: part_of index out of range");
    require(!hit[w], "batch: part_of must map onto every whole exactly once");
    hit[w] = true;
  }
}

template <class T>
Embedded<T> embed(const std::vector<Tangent<T>>& tangents, const BasicManifold<T>& m) {
  Embedded<T> out;
  out.tangent = tangents;
  out.point.reserve(tangents.size());
  for (const auto& v : tangents) out.point.push_back(lift(v, m));
  return out;
}

template <class T>
Matrix<T> distance_matrix(const std::vector<Point<T>>& anchors, const std::vector<Point<T>>& targets,
                          const BasicManifold<T>& m) {
  Matrix<T> d(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    d[i].reserve(targets.size());
    for (const auto& t : targets) d[i].push_back(geodesic_distance(anchors[i], t, m));
  }
  return d;
}

template <class T>
T contrastive_from_distances(const Matrix<T>& d, bool transposed, std::span<const T> taus, bool include_positive) {
  const std::size_t b = d.size();
  require(b >= 2, "contrastive: B must be >= 2");
  require(taus.size() == b, "contrastive: one temperature per anchor row required");
  std::vector<T> rows;
  rows.reserve(b);
  std::vector<T> denominator;
  for (std::size_t i = 0; i < b; ++i) {
    require(d[i].size() == b, "contrastive: anchors and targets must have equal length");
    denominator.clear();
    T positive{};
    for (std::size_t k = 0; k < b; ++k) {
      const T& dist = transposed ? d[k][i] : d[i][k];
      const T logit = -dist / taus[i];
      if (k == i) {
        positive = logit;
        if (include_positive) denominator.push_back(logit);
      } else {
        denominator.push_back(logit);
      }
    }
    rows.push_back(log_sum_exp(std::span<const T>(denominator)) - positive);
  }
  return sum(std::span<const T>(rows));
}

template <class T>
T contrastive(const std::vector<Point<T>>& anchors, const std::vector<Point<T>>& targets, std::span<const T> taus,
              const BasicManifold<T>& m, bool include_positive) {
  require(anchors.size() == targets.size(), "contrastive: anchors and targets must have equal length");
  require(anchors.size() >= 2, "contrastive: B must be >= 2");
  return contrastive_from_distances(distance_matrix(anchors, targets, m), false, taus, include_positive);
}

template <class T>
T contrastive(const std::vector<Point<T>>& anchors, const std::vector<Point<T>>& targets, const T& tau,
              const BasicManifold<T>& m, bool include_positive) {
  const std::vector<T> taus(anchors.size(), tau);
  return contrastive(anchors, targets, std::span<const T>(taus), m, include_positive);
}

template <class T>
std::vector<T> adaptive_temperatures(const std::vector<Tangent<T>>& parts, const T& tau_gl,
                                     const BasicManifold<T>& m, UncertaintySource source) {
  require(!parts.empty(), "adaptive_temperatures: empty part set");
  std::vector<T> taus;
  taus.reserve(parts.size());
  for (const auto& p : parts) taus.push_back(exp(uncertainty(p.space, m, source) / 2.0) * tau_gl);
  return taus;
}

namespace {

template <class T>
std::vector<Point<T>> gather(const std::vector<Point<T>>& points, const std::vector<std::size_t>& index) {
  std::vector<Point<T>> out;
  out.reserve(index.size());
  for (std::size_t k : index) out.push_back(points[k]);
  return out;
}

template <class T>
struct EmbeddedBatch {
  Embedded<T> whole_image;
  Embedded<T> whole_text;
  Embedded<T> part_image;
  Embedded<T> part_text;
  // Wholes reordered so row i is the whole that part row i belongs to.
  std::vector<Point<T>> image_of_part;
  std::vector<Point<T>> text_of_part;
};

template <class T>
EmbeddedBatch<T> embed_batch(const BatchT<T>& batch, const BasicManifold<T>& m) {
  batch.validate();
  EmbeddedBatch<T> e{embed(batch.whole_image, m), embed(batch.whole_text, m), embed(batch.part_image, m),
                     embed(batch.part_text, m), {}, {}};
  e.image_of_part = gather(e.whole_image.point, batch.part_of);
  e.text_of_part = gather(e.whole_text.point, batch.part_of);
  return e;
}

template <class T>
ContrastiveTerms<T> contrastive_terms(const BatchT<T>& batch, const EmbeddedBatch<T>& e, const Temperatures<T>& temps,
                                      const BasicManifold<T>& m, const LossConfig& cfg) {
  const bool pos = cfg.include_positive;
  const std::size_t b = batch.size();

  const std::vector<T> tau_img = adaptive_temperatures(batch.part_image, temps.global_local, m, cfg.uncertainty_source);
  const std::vector<T> tau_txt = adaptive_temperatures(batch.part_text, temps.global_local, m, cfg.uncertainty_source);
  const std::vector<T> tau_g(b, temps.global);
  const std::vector<T> tau_l(b, temps.local);

  const Matrix<T> d_pi_t = distance_matrix(e.part_image.point, e.text_of_part, m);
  const Matrix<T> d_pt_i = distance_matrix(e.part_text.point, e.image_of_part, m);
  const Matrix<T> d_i_t = distance_matrix(e.whole_image.point, e.whole_text.point, m);
  const Matrix<T> d_pi_pt = distance_matrix(e.part_image.point, e.part_text.point, m);

  const T gl = contrastive_from_distances(d_pi_t, false, std::span<const T>(tau_img), pos) +
               contrastive_from_distances(d_pt_i, false, std::span<const T>(tau_txt), pos);
  const T global = contrastive_from_distances(d_i_t, false, std::span<const T>(tau_g), pos) +
                   contrastive_from_distances(d_i_t, true, std::span<const T>(tau_g), pos);
  const T local = contrastive_from_distances(d_pi_pt, false, std::span<const T>(tau_l), pos) +
                  contrastive_from_distances(d_pi_pt, true, std::span<const T>(tau_l), pos);
  return ContrastiveTerms<T>{global, local, gl};
}

template <class T>
T leaky_sum(const std::vector<Point<T>>& apex, const std::vector<Point<T>>& other, double eta, const LossConfig& cfg,
            const BasicManifold<T>& m) {
  std::vector<T> terms;
  terms.reserve(apex.size());
  for (std::size_t i = 0; i < apex.size(); ++i) {
    terms.push_back(entail_leaky(apex[i], other[i], eta, cfg.cone, cfg.alpha, m));
  }
  return sum(std::span<const T>(terms));
}

template <class T>
EntailmentTerms<T> entailment_terms(const EmbeddedBatch<T>& e, const BasicManifold<T>& m, const LossConfig& cfg) {
  const double eta_inter = cfg.cone.eta_inter;
  const double eta_intra = cfg.cone.eta_intra;
  // First argument is always the apex: text entails image, part entails whole.
  const T inter = leaky_sum(e.part_text.point, e.part_image.point, eta_inter, cfg, m) +
                  leaky_sum(e.whole_text.point, e.whole_image.point, eta_inter, cfg, m);
  const T intra = leaky_sum(e.part_text.point, e.text_of_part, eta_intra, cfg, m) +
                  leaky_sum(e.part_image.point, e.image_of_part, eta_intra, cfg, m);
  const T cal =
      calibration(e.part_text, e.text_of_part, eta_intra, cfg, m) + calibration(e.part_image, e.image_of_part, eta_intra, cfg, m);
  return EntailmentTerms<T>{inter, intra, cal};
}

template <class T>
T combine_terms(const ContrastiveTerms<T>& c, const EntailmentTerms<T>& e, const LossConfig& cfg) {
  return c.sum() + cfg.lambda_ent * e.weighted(cfg);
}

}  // namespace

template <class T>
ContrastiveTerms<T> contrastive_total(const BatchT<T>& batch, const Temperatures<T>& temps,
                                      const BasicManifold<T>& m, const LossConfig& cfg) {
  const EmbeddedBatch<T> e = embed_batch(batch, m);
  return contrastive_terms(batch, e, temps, m, cfg);
}

template <class T>
T entail_hinge(const Point<T>& p, const Point<T>& q, double eta, const ConeParams& cone, const BasicManifold<T>& m) {
  return hinge(exterior_angle(p, q, m) - eta * aperture(p, cone.aperture_k, m));
}

template <class T>
T entail_leaky(const Point<T>& p, const Point<T>& q, double eta, const ConeParams& cone, double alpha,
               const BasicManifold<T>& m) {
  require(alpha >= 0.0, "entail_leaky: alpha must be >= 0");
  const T phi = exterior_angle(p, q, m);
  return hinge(phi - eta * aperture(p, cone.aperture_k, m)) + alpha * phi;
}

template <class T>
T calibration(const Embedded<T>& parts, const std::vector<Point<T>>& wholes, double eta, const LossConfig& cfg,
              const BasicManifold<T>& m) {
  const std::size_t b = parts.point.size();
  require(b >= 1 && wholes.size() == b && parts.tangent.size() == b, "calibration: parts and wholes must be aligned");
  std::vector<T> u;
  std::vector<T> terms;
  u.reserve(b);
  terms.reserve(b);
  for (std::size_t i = 0; i < b; ++i) {
    u.push_back(uncertainty(parts.tangent[i].space, m, cfg.uncertainty_source));
    const T ent = stop_gradient(entail_leaky(parts.point[i], wholes[i], eta, cfg.cone, cfg.alpha, m));
    terms.push_back(ent * exp(-u.back()) + u.back());
  }
  return sum(std::span<const T>(terms)) + cfg.entropy_sign * softmax_entropy(u);
}

template <class T>
EntailmentTerms<T> entailment_total(const BatchT<T>& batch, const BasicManifold<T>& m, const LossConfig& cfg) {
  const EmbeddedBatch<T> e = embed_batch(batch, m);
  return entailment_terms(e, m, cfg);
}

template <class T>
LossTerms<T> total_loss(const BatchT<T>& batch, const Temperatures<T>& temps, const BasicManifold<T>& m,
                        const LossConfig& cfg) {
  const EmbeddedBatch<T> e = embed_batch(batch, m);
  const ContrastiveTerms<T> c = contrastive_terms(batch, e, temps, m, cfg);
  const EntailmentTerms<T> ent = entailment_terms(e, m, cfg);
  return LossTerms<T>{c, ent, combine_terms(c, ent, cfg)};
}

double LossReport::combine(const std::map<std::string, double>& c, const LossConfig& cfg) {
  const ContrastiveTerms<double> con{c.at("contrastive_global"), c.at("contrastive_local"),
                                     c.at("contrastive_globallocal")};
  const EntailmentTerms<double> ent{c.at("entail_inter"), c.at("entail_intra"), c.at("calibration")};
  return combine_terms(con, ent, cfg);
}

template <class T>
LossReport make_report(const LossTerms<T>& t) {
  LossReport r;
  r.total = value(t.total);
  r.components = {
      {"contrastive_global", value(t.contrastive.global)},
      {"contrastive_local", value(t.contrastive.local)},
      {"contrastive_globallocal", value(t.contrastive.global_local)},
      {"entail_inter", value(t.entailment.inter)},
      {"entail_intra", value(t.entailment.intra)},
      {"calibration", value(t.entailment.calibration)},
  };
  return r;
}

#define UNCHA_INSTANTIATE_LOSSES(T)                                                                                   \
  template struct BatchT<T>;                                                                                          \
  template Embedded<T> embed<T>(const std::vector<Tangent<T>>&, const BasicManifold<T>&);                             \
  template Matrix<T> distance_matrix<T>(const std::vector<Point<T>>&, const std::vector<Point<T>>&,                   \
                                        const BasicManifold<T>&);                                                     \
  template T contrastive_from_distances<T>(const Matrix<T>&, bool, std::span<const T>, bool);                         \
  template T contrastive<T>(const std::vector<Point<T>>&, const std::vector<Point<T>>&, std::span<const T>,           \
                            const BasicManifold<T>&, bool);                                                           \
  template T contrastive<T>(const std::vector<Point<T>>&, const std::vector<Point<T>>&, const T&,                     \
                            const BasicManifold<T>&, bool);                                                           \
  template std::vector<T> adaptive_temperatures<T>(const std::vector<Tangent<T>>&, const T&, const BasicManifold<T>&, \
                                                   UncertaintySource);                                                \
  template ContrastiveTerms<T> contrastive_total<T>(const BatchT<T>&, const Temperatures<T>&,                         \
                                                    const BasicManifold<T>&, const LossConfig&);                      \
  template T entail_hinge<T>(const Point<T>&, const Point<T>&, double, const ConeParams&, const BasicManifold<T>&);   \
  template T entail_leaky<T>(const Point<T>&, const Point<T>&, double, const ConeParams&, double,                     \
                             const BasicManifold<T>&);                                                                \
  template T calibration<T>(const Embedded<T>&, const std::vector<Point<T>>&, double, const LossConfig&,              \
                            const BasicManifold<T>&);                                                                 \
  template EntailmentTerms<T> entailment_total<T>(const BatchT<T>&, const BasicManifold<T>&, const LossConfig&);      \
  template LossTerms<T> total_loss<T>(const BatchT<T>&, const Temperatures<T>&, const BasicManifold<T>&,              \
                                      const LossConfig&);                                                             \
  template LossReport make_report<T>(const LossTerms<T>&);

UNCHA_INSTANTIATE_LOSSES(double)
UNCHA_INSTANTIATE_LOSSES(ad::Var)

#undef UNCHA_INSTANTIATE_LOSSES

}  // namespace uncha
