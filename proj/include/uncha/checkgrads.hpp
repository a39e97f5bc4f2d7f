#pragma once

// Finite-difference verification of every loss against every parameter class
// over a grid of batch sizes, embedding dimensions and embedding modes.

#include <string>
#include <vector>

#include "uncha/gradcheck.hpp"
#include "uncha/trainer.hpp"

namespace uncha {

struct CheckGradsOptions {
  std::uint64_t seed = 1;
  std::vector<std::size_t> batch_sizes = {2, 4, 8};
  std::vector<std::size_t> dims = {3, 16};
  std::vector<EmbeddingMode> modes = {EmbeddingMode::kEncoder, EmbeddingMode::kTable};
  GradCheckOptions fd;
};

struct CheckGradsRow {
  std::string objective;
  EmbeddingMode mode = EmbeddingMode::kEncoder;
  std::size_t batch = 0;
  std::size_t dim = 0;
  ParameterCheck check;
};

struct StopGradientRow {
  std::string param;
  EmbeddingMode mode = EmbeddingMode::kTable;
  std::size_t batch = 0;
  std::size_t dim = 0;
  StopGradientCheck check;
};

struct CheckGradsReport {
  std::vector<CheckGradsRow> rows;
  std::vector<StopGradientRow> stop_gradient;

  /// "objective/param" pairs with no checked coordinate in any configuration.
  std::vector<std::string> uncovered() const;
  /// Every row and stop-gradient check passed and nothing is uncovered.
  bool passed() const;
  double max_rel_error() const;
};

/// Names of the checked objectives, in report order.
const std::vector<std::string>& gradcheck_objectives();

/// The named objective on the batch `indices`.
Objective make_objective(const std::string& name, const Corpus& corpus, const TrainConfig& cfg,
                         const BatchIndices& indices);

CheckGradsReport run_check_grads(const CheckGradsOptions& opts, const LogFn& log = {});

/// Fixed-width table, one line per row, then a summary line.
std::string format_check_grads(const CheckGradsReport& report);

}  // namespace uncha
