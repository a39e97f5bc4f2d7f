#pragma once

// Training loop: AdamW with decoupled weight decay, cosine schedule with
// linear warm-up, parameter projection, JSON checkpoints and JSONL metrics.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "uncha/config.hpp"
#include "uncha/evalmetrics.hpp"
#include "uncha/model.hpp"

namespace uncha {

inline constexpr int kCheckpointVersion = 1;

struct AdamState {
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
  std::uint64_t t = 0;

  bool operator==(const AdamState&) const = default;
};

struct TrainState {
  std::size_t step = 0;
  ParameterStore store;
  AdamState adam;
};

/// Linear warm-up from 0 to the peak over `warmup` steps, then half-cosine
/// decay to 0 at `steps`.
double learning_rate(const TrainConfig& cfg, std::size_t step);

/// The batch used at a given step; depends only on (seed, step).
BatchIndices batch_for_step(const Corpus& corpus, const TrainConfig& cfg, std::size_t step);

TrainState initial_state(const Corpus& corpus, const TrainConfig& cfg);

/// Forward, backward, AdamW update with learning rate `lr`, projection.
/// Returns the report of the forward pass (before the update). Throws
/// NumericalError, naming the batch, if the loss is not finite.
LossReport train_step(TrainState& state, const Corpus& corpus, const TrainConfig& cfg, const BatchIndices& batch,
                      double lr);

/// One metrics record (single-line JSON) describing the state at its step.
std::string metrics_record(const TrainState& state, const Corpus& corpus, const TrainConfig& cfg);

std::string checkpoint_json(const TrainState& state, const TrainConfig& cfg);
void save_checkpoint(const std::string& path, const TrainState& state, const TrainConfig& cfg);

struct LoadedCheckpoint {
  TrainState state;
  std::string config_text;
  std::string config_hash;
};

LoadedCheckpoint parse_checkpoint(const std::string& json_text);
LoadedCheckpoint load_checkpoint(const std::string& path);

using LogFn = std::function<void(const std::string&)>;

struct TrainOptions {
  /// Directory for metrics.jsonl, checkpoint_<step>.json and final.json;
  /// empty keeps everything in memory.
  std::string out_dir;
  /// Checkpoint to continue from; its config hash must match.
  std::string resume;
  LogFn log;
};

struct TrainResult {
  TrainState state;
  /// Metrics records written by this invocation, in order.
  std::vector<std::string> records;
};

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const TrainOptions& opts = {});

}  // namespace uncha
