#include "uncha/model.hpp"

#include <cmath>

#include "uncha/rng.hpp"

namespace uncha {

namespace {

using namespace param_names;

// Stream index reserved for parameter initialization; batches use the step.
constexpr std::uint64_t kInitStream = 0xFFFFFFFFull;

std::vector<double> draws(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

const std::vector<double>& view_vector(const Concept& c, View view) {
  return view == View::kImage ? c.image_view : c.text_view;
}

const char* table_name(Level level, View view) {
  if (level == Level::kScene) return view == View::kImage ? kSceneImage : kSceneText;
  return view == View::kImage ? kPartImage : kPartText;
}

std::size_t table_row(const Corpus& corpus, const Concept& c) {
  return c.level == Level::kScene ? c.id : c.id - corpus.scenes().size();
}

template <class Store, class T>
Tangent<T> embed_generic(const Store& store, const Corpus& corpus, const TrainConfig& cfg, const Concept& c,
                         View view) {
  const std::size_t n = cfg.embed_dim;
  Tangent<T> out;
  out.space.reserve(n);
  const T scale = store.scalar(view == View::kImage ? kScaleImage : kScaleText);
  if (cfg.embedding == EmbeddingMode::kEncoder) {
    const char* name = view == View::kImage ? kEncoderImage : kEncoderText;
    const std::vector<double>& x = view_vector(c, view);
    for (std::size_t r = 0; r < n; ++r) {
      out.space.push_back(scale * dot(store.row(name, r), std::span<const double>(x)));
    }
  } else {
    const auto row = store.row(table_name(c.level, view), table_row(corpus, c));
    for (std::size_t k = 0; k < n; ++k) out.space.push_back(scale * row[k]);
  }
  return out;
}

/// Read-only view of a ParameterStore with the BoundParameters interface.
class PlainView {
 public:
  explicit PlainView(const ParameterStore& store) : store_(store) {}
  double scalar(const std::string& name) const { return store_.scalar(name); }
  std::span<const double> row(const std::string& name, std::size_t r) const {
    const Parameter& p = store_.at(name);
    require((r + 1) * p.cols <= p.values.size(), "parameter row out of range: " + name);
    return std::span<const double>(p.values).subspan(r * p.cols, p.cols);
  }

 private:
  const ParameterStore& store_;
};

template <class Store, class T>
BatchT<T> batch_generic(const Store& store, const Corpus& corpus, const TrainConfig& cfg,
                        const BatchIndices& indices) {
  require(indices.scenes.size() == indices.parts.size(), "batch index sets differ in length");
  BatchT<T> b;
  for (std::size_t k = 0; k < indices.scenes.size(); ++k) {
    const Concept& scene = corpus.scenes().at(indices.scenes[k]);
    const Concept& part = corpus.parts().at(indices.parts[k]);
    require(part.parent == scene.id, "batch row pairs a part with a scene it does not belong to");
    b.whole_image.push_back(embed_generic<Store, T>(store, corpus, cfg, scene, View::kImage));
    b.whole_text.push_back(embed_generic<Store, T>(store, corpus, cfg, scene, View::kText));
    b.part_image.push_back(embed_generic<Store, T>(store, corpus, cfg, part, View::kImage));
    b.part_text.push_back(embed_generic<Store, T>(store, corpus, cfg, part, View::kText));
    b.part_of.push_back(k);
  }
  return b;
}

}  // namespace

ParameterStore init_parameters(const Corpus& corpus, const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(mix_seed(cfg.seed, kInitStream));
  const std::size_t n = cfg.embed_dim;
  ParameterStore store;
  store.add_scalar(kCurvature, 1.0);
  store.add_scalar(kTauGlobal, cfg.loss.temps.global);
  store.add_scalar(kTauLocal, cfg.loss.temps.local);
  store.add_scalar(kTauGlobalLocal, cfg.loss.temps.global_local);
  const double c0 = 1.0 / std::sqrt(static_cast<double>(n));
  store.add_scalar(kScaleImage, c0);
  store.add_scalar(kScaleText, c0);
  if (cfg.embedding == EmbeddingMode::kEncoder) {
    const std::size_t d = corpus.latent_dim();
    store.add(kEncoderImage, n, d, draws(rng, n * d, cfg.init_scale));
    store.add(kEncoderText, n, d, draws(rng, n * d, cfg.init_scale));
  } else {
    const std::size_t s = corpus.scenes().size();
    const std::size_t p = corpus.parts().size();
    store.add(kSceneImage, s, n, draws(rng, s * n, cfg.init_scale));
    store.add(kSceneText, s, n, draws(rng, s * n, cfg.init_scale));
    store.add(kPartImage, p, n, draws(rng, p * n, cfg.init_scale));
    store.add(kPartText, p, n, draws(rng, p * n, cfg.init_scale));
  }
  return store;
}

TangentEmbedding embed_concept(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg,
                               std::size_t concept_id, View view) {
  return embed_generic<PlainView, double>(PlainView(store), corpus, cfg, corpus.concept_by_id(concept_id), view);
}

EmbeddingSet embed_all(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg) {
  const PlainView v(store);
  EmbeddingSet out;
  for (const Concept& c : corpus.scenes()) {
    out.whole_image.push_back(embed_generic<PlainView, double>(v, corpus, cfg, c, View::kImage));
    out.whole_text.push_back(embed_generic<PlainView, double>(v, corpus, cfg, c, View::kText));
  }
  for (const Concept& c : corpus.parts()) {
    out.part_image.push_back(embed_generic<PlainView, double>(v, corpus, cfg, c, View::kImage));
    out.part_text.push_back(embed_generic<PlainView, double>(v, corpus, cfg, c, View::kText));
  }
  return out;
}

BatchT<ad::Var> bind_batch(const BoundParameters& bound, const Corpus& corpus, const TrainConfig& cfg,
                           const BatchIndices& indices) {
  return batch_generic<BoundParameters, ad::Var>(bound, corpus, cfg, indices);
}

Batch make_batch(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg,
                 const BatchIndices& indices) {
  return batch_generic<PlainView, double>(PlainView(store), corpus, cfg, indices);
}

LossTerms<ad::Var> batch_loss(const BoundParameters& bound, const Corpus& corpus, const TrainConfig& cfg,
                              const BatchIndices& indices) {
  const BatchT<ad::Var> batch = bind_batch(bound, corpus, cfg, indices);
  const BasicManifold<ad::Var> m(bound.scalar(kCurvature), cfg.embed_dim);
  const Temperatures<ad::Var> temps{bound.scalar(kTauGlobal), bound.scalar(kTauLocal),
                                    bound.scalar(kTauGlobalLocal)};
  return total_loss(batch, temps, m, cfg.loss);
}

LossReport batch_report(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg,
                        const BatchIndices& indices) {
  const Batch batch = make_batch(store, corpus, cfg, indices);
  const Manifold m(store.scalar(kCurvature), cfg.embed_dim);
  const Temperatures<double> temps{store.scalar(kTauGlobal), store.scalar(kTauLocal), store.scalar(kTauGlobalLocal)};
  return make_report(total_loss(batch, temps, m, cfg.loss));
}

}  // namespace uncha
