#pragma once

// Learnable parameters of a run and the map from (parameters, concept, view)
// to a tangent embedding.
//
// Encoder mode: tangent = c_view * W_view * view_vector, with W_view an
// embed_dim x latent_dim matrix shared by all concepts of one modality.
// Table mode: tangent = c_view * row, with one free row per concept and view
// in the tables scene_image, scene_text, part_image, part_text.

#include <vector>

#include "uncha/config.hpp"
#include "uncha/params.hpp"
#include "uncha/synthdata.hpp"

namespace uncha {

namespace param_names {
inline constexpr const char* kEncoderImage = "encoder_image";
inline constexpr const char* kEncoderText = "encoder_text";
inline constexpr const char* kSceneImage = "scene_image";
inline constexpr const char* kSceneText = "scene_text";
inline constexpr const char* kPartImage = "part_image";
inline constexpr const char* kPartText = "part_text";
}  // namespace param_names

enum class View { kImage, kText };

/// kappa = 1, tau_g = tau_l = 0.07, tau_gl = 0.06 (or the configured initial
/// temperatures), c_img = c_txt = 1/sqrt(embed_dim), matrices/tables drawn
/// from N(0, init_scale^2) with a stream derived from cfg.seed.
ParameterStore init_parameters(const Corpus& corpus, const TrainConfig& cfg);

/// Tangent embedding of one concept under a plain-number store.
TangentEmbedding embed_concept(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg,
                               std::size_t concept_id, View view);

/// Tangent embeddings of every concept, grouped the way the metrics report them.
struct EmbeddingSet {
  std::vector<TangentEmbedding> whole_image;  // indexed by scene
  std::vector<TangentEmbedding> whole_text;
  std::vector<TangentEmbedding> part_image;   // indexed like Corpus::parts()
  std::vector<TangentEmbedding> part_text;
};

EmbeddingSet embed_all(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg);

/// The batch rows as tape variables: row b holds scene indices.scenes[b] and
/// its part indices.parts[b]; part_of is the identity.
BatchT<ad::Var> bind_batch(const BoundParameters& bound, const Corpus& corpus, const TrainConfig& cfg,
                           const BatchIndices& indices);

/// Same rows as plain numbers.
Batch make_batch(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg,
                 const BatchIndices& indices);

/// Total loss of one batch on the tape, with curvature and temperatures
/// taken from the bound parameters.
LossTerms<ad::Var> batch_loss(const BoundParameters& bound, const Corpus& corpus, const TrainConfig& cfg,
                              const BatchIndices& indices);

/// Plain-number evaluation of the same loss.
LossReport batch_report(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg,
                        const BatchIndices& indices);

}  // namespace uncha
