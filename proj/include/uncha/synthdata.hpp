#pragma once

// Deterministic synthetic part/whole corpus. Scenes are well-separated latent
// points on a sphere of common radius (every scene sits at the same taxonomy
// level); each part is its scene's latent displaced toward the generic centre
// by an amount that grows as its representativeness falls. Every concept has
// an image view and a text view: latent plus independent Gaussian noise.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uncha/rng.hpp"

namespace uncha {

enum class Level { kScene, kPart };

struct Concept {
  std::size_t id = 0;
  std::optional<std::size_t> parent;  // scene id, parts only
  Level level = Level::kScene;
  std::vector<double> latent;
  std::vector<double> image_view;
  std::vector<double> text_view;
  std::optional<double> representativeness;  // parts only, in [0, 1]
};

struct GeneratorParams {
  std::size_t num_scenes = 64;
  std::size_t parts_per_scene = 4;
  std::size_t latent_dim = 16;
  double noise_scale = 0.05;
  /// Norm of every scene latent.
  double scene_norm = 4.0;
  /// Displacement of a part with representativeness r is (1 - r) * spread.
  double spread = 3.0;
  /// Minimum pairwise distance between scene latents.
  double min_separation = 1.0;
  double repr_min = 0.2;
  double repr_max = 1.0;
  std::uint64_t seed = 7;

  void validate() const;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(GeneratorParams params, std::vector<Concept> scenes, std::vector<Concept> parts);

  const GeneratorParams& params() const { return params_; }
  const std::vector<Concept>& scenes() const { return scenes_; }
  const std::vector<Concept>& parts() const { return parts_; }
  std::size_t latent_dim() const { return params_.latent_dim; }

  /// Concepts are numbered scenes first (0..S-1), then parts.
  const Concept& concept_by_id(std::size_t id) const;
  /// Indices into parts() of the parts of scene s.
  const std::vector<std::size_t>& parts_of(std::size_t scene) const { return parts_by_scene_.at(scene); }

  bool operator==(const Corpus& other) const;

 private:
  GeneratorParams params_;
  std::vector<Concept> scenes_;
  std::vector<Concept> parts_;
  std::vector<std::vector<std::size_t>> parts_by_scene_;
};

Corpus generate(const GeneratorParams& params);

/// Text format documented in docs/formats.md; numbers round-trip exactly.
void write_corpus(const Corpus& corpus, std::ostream& out);
Corpus read_corpus(std::istream& in);
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

/// Row b pairs scene scenes[b] with part parts[b] (an index into
/// Corpus::parts()), which belongs to that scene.
struct BatchIndices {
  std::vector<std::size_t> scenes;
  std::vector<std::size_t> parts;
};

/// B distinct scenes, one uniformly chosen part per scene.
BatchIndices sample_batch(const Corpus& corpus, std::size_t b, Rng& stream);

}  // namespace uncha
