#pragma once

// Hierarchical classification metrics, retrieval recall, radius-distribution
// distances and the uncertainty/representativeness correlation.

#include <map>
#include <optional>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "uncha/config.hpp"
#include "uncha/model.hpp"

namespace uncha {

/// Rooted tree of labels. Edge weights default to 1.
class Taxonomy {
 public:
  /// (child, parent, weight) triples; exactly one entry has an empty parent
  /// (the root). Throws ConfigError for cycles, duplicates, dangling parents.
  static Taxonomy from_edges(const std::vector<std::tuple<std::string, std::string, double>>& edges);

  /// root -> scene_<id> -> part_<id>, unit weights.
  static Taxonomy synthetic(const Corpus& corpus);

  /// One `child parent [weight]` line per node, `-` as the root's parent.
  static Taxonomy load(const std::string& path);

  std::size_t size() const { return labels_.size(); }
  std::size_t root() const { return root_; }
  std::size_t index_of(const std::string& label) const;
  const std::string& label(std::size_t node) const { return labels_.at(node); }
  std::optional<std::size_t> parent(std::size_t node) const;
  std::size_t depth(std::size_t node) const { return depth_.at(node); }
  double weight_to_parent(std::size_t node) const { return weight_.at(node); }
  std::size_t lca(std::size_t a, std::size_t b) const;
  /// The node and all its ancestors except the root.
  std::vector<std::size_t> ancestors(std::size_t node) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> parent_;  // root points at itself
  std::vector<double> weight_;
  std::vector<std::size_t> depth_;
  std::map<std::string, std::size_t> index_;
  std::size_t root_ = 0;
};

std::string scene_label(std::size_t scene_id);
std::string part_label(std::size_t part_concept_id);

/// Edge count on the tree path between the two labels.
std::size_t tie(const std::string& pred, const std::string& truth, const Taxonomy& t);

/// Weighted distance from pred to LCA plus from truth to LCA.
double lca_error(const std::string& pred, const std::string& truth, const Taxonomy& t);

struct SetMetrics {
  double jaccard = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

SetMetrics hierarchical_set_metrics(const std::string& pred, const std::string& truth, const Taxonomy& t);

/// Fraction of queries whose truth set meets the k most similar gallery items,
/// similarity = -geodesic distance, ties broken toward the lower gallery index.
double recall_at_k(const std::vector<LorentzPoint>& queries, const std::vector<LorentzPoint>& gallery,
                   const std::vector<std::vector<std::size_t>>& truth, std::size_t k, const Manifold& m);

struct DistributionDistances {
  double w1 = 0.0;
  double w2 = 0.0;
  /// Biased (V-statistic) squared MMD, Gaussian kernel, median-heuristic
  /// bandwidth on the pooled sample.
  double mmd2 = 0.0;
};

double wasserstein(std::vector<double> a, std::vector<double> b, int p);
double mmd2(const std::vector<double>& a, const std::vector<double>& b);
DistributionDistances distribution_distances(const std::vector<double>& a, const std::vector<double>& b);

struct Correlation {
  double value = 0.0;
  /// Set when either input has zero variance; value is then 0.
  bool degenerate = false;
};

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);
/// Pearson on average ranks.
Correlation spearman(const std::vector<double>& x, const std::vector<double>& y);

struct UncertaintyCorrelation {
  /// u(part image) vs -d(part image, whole image).
  Correlation similarity;
  /// u(part image) vs 1 - representativeness.
  Correlation representativeness;
  std::size_t parts = 0;
};

UncertaintyCorrelation uncertainty_correlation(const Corpus& corpus, const ParameterStore& store,
                                               const TrainConfig& cfg);

/// Radius (distance from the origin of the lifted point) and uncertainty of
/// every concept in each embedding group.
struct GroupStats {
  std::vector<double> radius;
  std::vector<double> uncertainty;

  double mean_radius() const;
  double mean_uncertainty() const;
};

struct EmbeddingStats {
  GroupStats whole_image;
  GroupStats whole_text;
  GroupStats part_image;
  GroupStats part_text;
};

EmbeddingStats embedding_stats(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double mean_tie = 0.0;
  double mean_lca = 0.0;
  double jaccard = 0.0;
  double precision_h = 0.0;
  double recall_h = 0.0;
};

struct EvalReport {
  /// Whole image -> nearest scene text.
  ClassificationMetrics scenes;
  /// Part image -> nearest part text.
  ClassificationMetrics parts;
  /// "image_to_text@k" / "text_to_image@k" for wholes and parts.
  std::map<std::string, double> recall;
  DistributionDistances dist_image;
  DistributionDistances dist_text;
  UncertaintyCorrelation correlation;
  EmbeddingStats stats;
};

EvalReport evaluate(const Corpus& corpus, const ParameterStore& store, const TrainConfig& cfg,
                    const Taxonomy& taxonomy);

/// Structured text: one `key = value` line per metric.
std::string format_report(const EvalReport& report);

/// CSV with header id,view,level,radius,uncertainty,v0..v(n-1).
std::string export_csv(const Corpus& corpus, const ParameterStore& store, const TrainConfig& cfg);

}  // namespace uncha
