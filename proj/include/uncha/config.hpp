#pragma once

// Training configuration: every optimizer, schedule and loss setting, read
// from flat `key = value` text and dumped in a canonical sorted form whose
// FNV-1a hash identifies a run.

#include <cstdint>
#include <string>
#include <vector>

#include "uncha/losses.hpp"

namespace uncha {

/// How concept embeddings are produced from parameters.
enum class EmbeddingMode {
  /// Per-modality linear map of the concept's fixed view vector.
  kEncoder,
  /// One free tangent vector per concept and view.
  kTable,
};

struct TrainConfig {
  std::size_t steps = 5000;
  std::size_t batch_size = 32;
  double lr = 5e-4;
  std::size_t warmup = 200;
  double weight_decay = 0.2;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  std::size_t eval_interval = 250;
  std::size_t checkpoint_interval = 1000;
  std::uint64_t seed = 7;
  std::size_t embed_dim = 16;
  double init_scale = 0.02;
  EmbeddingMode embedding = EmbeddingMode::kEncoder;
  /// Parameters that receive no weight decay.
  std::vector<std::string> decay_exclude = {"kappa", "tau_g", "tau_l", "tau_gl", "c_img", "c_txt"};
  LossConfig loss;

  void validate() const;
};

/// Applies one `key = value` assignment. Throws ConfigError for unknown keys
/// and for values that do not parse as the key's type.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
void apply_config_text(TrainConfig& cfg, const std::string& text);
void apply_config_file(TrainConfig& cfg, const std::string& path);

/// Every key, sorted, one `key = value` per line; doubles round-trip exactly.
std::string dump_config(const TrainConfig& cfg);

std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const TrainConfig& cfg);

const char* to_string(EmbeddingMode mode);

}  // namespace uncha
