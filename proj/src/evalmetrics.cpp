#include "uncha/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace uncha {

Taxonomy Taxonomy::from_edges(const std::vector<std::tuple<std::string, std::string, double>>& edges) {
  Taxonomy t;
  std::vector<std::string> parent_label;
  for (const auto& [child, parent, weight] : edges) {
    if (child.empty()) throw ConfigError("taxonomy: empty label");
    if (t.index_.count(child)) throw ConfigError("taxonomy: duplicate label '" + child + "'");
    if (!(weight > 0.0) || !std::isfinite(weight)) throw ConfigError("taxonomy: edge weight must be positive");
    t.index_[child] = t.labels_.size();
    t.labels_.push_back(child);
    t.weight_.push_back(parent.empty() ? 0.0 : weight);
    parent_label.push_back(parent);
  }
  if (t.labels_.empty()) throw ConfigError("taxonomy: no nodes");
  std::size_t roots = 0;
  t.parent_.resize(t.labels_.size());
  for (std::size_t k = 0; k < t.labels_.size(); ++k) {
    if (parent_label[k].empty()) {
      ++roots;
      t.root_ = k;
      t.parent_[k] = k;
      continue;
    }
    const auto it = t.index_.find(parent_label[k]);
    if (it == t.index_.end()) throw ConfigError("taxonomy: unknown parent '" + parent_label[k] + "'");
    t.parent_[k] = it->second;
  }
  if (roots != 1) throw ConfigError("taxonomy: expected exactly one root, found " + std::to_string(roots));
  // Depths by walking up; a walk longer than the node count means a cycle.
  t.depth_.assign(t.labels_.size(), 0);
  for (std::size_t k = 0; k < t.labels_.size(); ++k) {
    std::size_t d = 0;
    for (std::size_t v = k; v != t.root_; v = t.parent_[v]) {
      if (++d > t.labels_.size()) throw ConfigError("taxonomy: cycle through '" + t.labels_[k] + "'");
    }
    t.depth_[k] = d;
  }
  return t;
}

std::string scene_label(std::size_t scene_id) { return "scene_" + std::to_string(scene_id); }
std::string part_label(std::size_t part_concept_id) { return "part_" + std::to_string(part_concept_id); }

Taxonomy Taxonomy::synthetic(const Corpus& corpus) {
  std::vector<std::tuple<std::string, std::string, double>> edges;
  edges.emplace_back("root", "", 1.0);
  for (const Concept& s : corpus.scenes()) edges.emplace_back(scene_label(s.id), "root", 1.0);
  for (const Concept& p : corpus.parts()) edges.emplace_back(part_label(p.id), scene_label(*p.parent), 1.0);
  return from_edges(edges);
}

Taxonomy Taxonomy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open taxonomy '" + path + "'");
  std::vector<std::tuple<std::string, std::string, double>> edges;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string child, parent, extra;
    double weight = 1.0;
    if (!(ls >> child)) continue;
    if (!(ls >> parent)) throw ConfigError("taxonomy: line " + std::to_string(no) + " needs 'child parent'");
    std::string w;
    if (ls >> w) {
      try {
        std::size_t used = 0;
        weight = std::stod(w, &used);
        if (used != w.size()) throw std::invalid_argument(w);
      } catch (const std::exception&) {
        throw ConfigError("taxonomy: bad weight at line " + std::to_string(no));
      }
    }
    if (ls >> extra) throw ConfigError("taxonomy: trailing data at line " + std::to_string(no));
    edges.emplace_back(child, parent == "-" ? "" : parent, weight);
  }
  return from_edges(edges);
}

std::size_t Taxonomy::index_of(const std::string& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) throw ConfigError("label not in taxonomy: '" + label + "'");
  return it->second;
}

std::optional<std::size_t> Taxonomy::parent(std::size_t node) const {
  if (node == root_) return std::nullopt;
  return parent_.at(node);
}

std::size_t Taxonomy::lca(std::size_t a, std::size_t b) const {
  while (depth_[a] > depth_[b]) a = parent_[a];
  while (depth_[b] > depth_[a]) b = parent_[b];
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
  }
  return a;
}

std::vector<std::size_t> Taxonomy::ancestors(std::size_t node) const {
  std::vector<std::size_t> out;
  for (std::size_t v = node; v != root_; v = parent_[v]) out.push_back(v);
  return out;
}

std::size_t tie(const std::string& pred, const std::string& truth, const Taxonomy& t) {
  const std::size_t a = t.index_of(pred);
  const std::size_t b = t.index_of(truth);
  const std::size_t c = t.lca(a, b);
  return t.depth(a) + t.depth(b) - 2 * t.depth(c);
}

double lca_error(const std::string& pred, const std::string& truth, const Taxonomy& t) {
  const std::size_t a = t.index_of(pred);
  const std::size_t b = t.index_of(truth);
  const std::size_t c = t.lca(a, b);
  double d = 0.0;
  for (std::size_t v = a; v != c; v = *t.parent(v)) d += t.weight_to_parent(v);
  for (std::size_t v = b; v != c; v = *t.parent(v)) d += t.weight_to_parent(v);
  return d;
}

SetMetrics hierarchical_set_metrics(const std::string& pred, const std::string& truth, const Taxonomy& t) {
  const auto ap = t.ancestors(t.index_of(pred));
  const auto at = t.ancestors(t.index_of(truth));
  const std::set<std::size_t> sp(ap.begin(), ap.end());
  const std::set<std::size_t> st(at.begin(), at.end());
  std::size_t inter = 0;
  for (std::size_t v : sp) inter += st.count(v);
  const std::size_t uni = sp.size() + st.size() - inter;
  SetMetrics m;
  // Both sets are empty only when pred = truth = root.
  if (uni == 0) return SetMetrics{1.0, 1.0, 1.0};
  m.jaccard = static_cast<double>(inter) / static_cast<double>(uni);
  m.precision = sp.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(sp.size());
  m.recall = st.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(st.size());
  return m;
}

namespace {

/// Gallery indices ordered by decreasing similarity, ties by index.
std::vector<std::size_t> ranking(const LorentzPoint& q, const std::vector<LorentzPoint>& gallery, const Manifold& m) {
  std::vector<double> d(gallery.size());
  for (std::size_t g = 0; g < gallery.size(); ++g) d[g] = geodesic_distance(q, gallery[g], m);
  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  return order;
}

}  // namespace

double recall_at_k(const std::vector<LorentzPoint>& queries, const std::vector<LorentzPoint>& gallery,
                   const std::vector<std::vector<std::size_t>>& truth, std::size_t k, const Manifold& m) {
  require(!gallery.empty(), "recall_at_k: empty gallery");
  require(k >= 1, "recall_at_k: k must be >= 1");
  require(!queries.empty(), "recall_at_k: no queries");
  require(truth.size() == queries.size(), "recall_at_k: one truth set per query required");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto order = ranking(queries[q], gallery, m);
    const std::size_t top = std::min(k, order.size());
    bool hit = false;
    for (std::size_t r = 0; r < top && !hit; ++r) {
      hit = std::find(truth[q].begin(), truth[q].end(), order[r]) != truth[q].end();
    }
    hits += hit ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

double wasserstein(std::vector<double> a, std::vector<double> b, int p) {
  require(!a.empty() && !b.empty(), "wasserstein: empty sample");
  require(p == 1 || p == 2, "wasserstein: p must be 1 or 2");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Quantile coupling on the merged grid of breakpoints i/n and j/m, kept
  // exact by working in units of 1/(n m).
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::size_t i = 0, j = 0, pos = 0;
  double acc = 0.0;
  while (i < n && j < m) {
    const std::size_t next = std::min((i + 1) * m, (j + 1) * n);
    const double mass = static_cast<double>(next - pos) / static_cast<double>(n * m);
    const double gap = std::abs(a[i] - b[j]);
    acc += mass * (p == 1 ? gap : gap * gap);
    pos = next;
    if (pos == (i + 1) * m) ++i;
    if (pos == (j + 1) * n) ++j;
  }
  return p == 1 ? acc : std::sqrt(acc);
}

double mmd2(const std::vector<double>& a, const std::vector<double>& b) {
  require(!a.empty() && !b.empty(), "mmd: empty sample");
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> gaps;
  gaps.reserve(pooled.size() * (pooled.size() - 1) / 2);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    for (std::size_t j = i + 1; j < pooled.size(); ++j) gaps.push_back(std::abs(pooled[i] - pooled[j]));
  }
  double h = 1.0;
  if (!gaps.empty()) {
    // Lower median, so the bandwidth is an actual sample gap.
    auto mid = gaps.begin() + static_cast<std::ptrdiff_t>((gaps.size() - 1) / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    if (*mid > 0.0) h = *mid;
  }
  const double inv = 1.0 / (2.0 * h * h);
  auto mean_kernel = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (double xi : x) {
      for (double yj : y) s += std::exp(-(xi - yj) * (xi - yj) * inv);
    }
    return s / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  };
  return mean_kernel(a, a) + mean_kernel(b, b) - 2.0 * mean_kernel(a, b);
}

DistributionDistances distribution_distances(const std::vector<double>& a, const std::vector<double>& b) {
  return DistributionDistances{wasserstein(a, b, 1), wasserstein(a, b, 2), mmd2(a, b)};
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "correlation: length mismatch");
  require(x.size() >= 2, "correlation: need at least two samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return Correlation{0.0, true};
  return Correlation{std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

GroupStats group_stats(const std::vector<TangentEmbedding>& vs, const Manifold& m, UncertaintySource source) {
  GroupStats g;
  for (const auto& v : vs) {
    g.radius.push_back(hyperbolic_radius(lift(v, m).space, m));
    g.uncertainty.push_back(uncertainty(v.space, m, source));
  }
  return g;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<LorentzPoint> lift_all(const std::vector<TangentEmbedding>& vs, const Manifold& m) {
  std::vector<LorentzPoint> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(lift(v, m));
  return out;
}

Manifold store_manifold(const ParameterStore& store, const TrainConfig& cfg) {
  return Manifold::clamped(store.scalar(param_names::kCurvature), cfg.embed_dim);
}

std::vector<std::vector<std::size_t>> identity_truth(std::size_t n) {
  std::vector<std::vector<std::size_t>> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = {k};
  return t;
}

ClassificationMetrics classify(const std::vector<LorentzPoint>& queries, const std::vector<LorentzPoint>& gallery,
                               const std::vector<std::string>& labels, const Taxonomy& t, const Manifold& m) {
  ClassificationMetrics c;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const std::size_t pred = ranking(queries[q], gallery, m).front();
    const SetMetrics s = hierarchical_set_metrics(labels[pred], labels[q], t);
    c.accuracy += pred == q ? 1.0 : 0.0;
    c.mean_tie += static_cast<double>(tie(labels[pred], labels[q], t));
    c.mean_lca += lca_error(labels[pred], labels[q], t);
    c.jaccard += s.jaccard;
    c.precision_h += s.precision;
    c.recall_h += s.recall;
  }
  const double n = static_cast<double>(queries.size());
  for (double* f : {&c.accuracy, &c.mean_tie, &c.mean_lca, &c.jaccard, &c.precision_h, &c.recall_h}) *f /= n;
  return c;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Correlation spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "correlation: length mismatch");
  return pearson(average_ranks(x), average_ranks(y));
}

double GroupStats::mean_radius() const { return mean(radius); }
double GroupStats::mean_uncertainty() const { return mean(uncertainty); }

EmbeddingStats embedding_stats(const ParameterStore& store, const Corpus& corpus, const TrainConfig& cfg) {
  const Manifold m = store_manifold(store, cfg);
  const EmbeddingSet e = embed_all(store, corpus, cfg);
  const UncertaintySource src = cfg.loss.uncertainty_source;
  return EmbeddingStats{group_stats(e.whole_image, m, src), group_stats(e.whole_text, m, src),
                        group_stats(e.part_image, m, src), group_stats(e.part_text, m, src)};
}

UncertaintyCorrelation uncertainty_correlation(const Corpus& corpus, const ParameterStore& store,
                                               const TrainConfig& cfg) {
  require(corpus.parts().size() >= 3, "uncertainty_correlation: need at least 3 parts");
  const Manifold m = store_manifold(store, cfg);
  std::vector<double> u, sim, unrep;
  for (const Concept& p : corpus.parts()) {
    const TangentEmbedding part = embed_concept(store, corpus, cfg, p.id, View::kImage);
    const TangentEmbedding whole = embed_concept(store, corpus, cfg, *p.parent, View::kImage);
    u.push_back(uncertainty(part.space, m, cfg.loss.uncertainty_source));
    sim.push_back(-geodesic_distance(lift(part, m), lift(whole, m), m));
    unrep.push_back(1.0 - *p.representativeness);
  }
  return UncertaintyCorrelation{pearson(u, sim), spearman(u, unrep), u.size()};
}

EvalReport evaluate(const Corpus& corpus, const ParameterStore& store, const TrainConfig& cfg,
                    const Taxonomy& taxonomy) {
  const Manifold m = store_manifold(store, cfg);
  const EmbeddingSet e = embed_all(store, corpus, cfg);
  const auto wi = lift_all(e.whole_image, m);
  const auto wt = lift_all(e.whole_text, m);
  const auto pi = lift_all(e.part_image, m);
  const auto pt = lift_all(e.part_text, m);

  std::vector<std::string> scene_labels, part_labels;
  for (const Concept& s : corpus.scenes()) scene_labels.push_back(scene_label(s.id));
  for (const Concept& p : corpus.parts()) part_labels.push_back(part_label(p.id));

  EvalReport r;
  r.scenes = classify(wi, wt, scene_labels, taxonomy, m);
  r.parts = classify(pi, pt, part_labels, taxonomy, m);
  for (std::size_t k : {1, 5, 10}) {
    const std::string at = "@" + std::to_string(k);
    r.recall["whole_image_to_text" + at] = recall_at_k(wi, wt, identity_truth(wi.size()), k, m);
    r.recall["whole_text_to_image" + at] = recall_at_k(wt, wi, identity_truth(wt.size()), k, m);
    r.recall["part_image_to_text" + at] = recall_at_k(pi, pt, identity_truth(pi.size()), k, m);
    r.recall["part_text_to_image" + at] = recall_at_k(pt, pi, identity_truth(pt.size()), k, m);
  }
  r.stats = embedding_stats(store, corpus, cfg);
  r.dist_image = distribution_distances(r.stats.part_image.radius, r.stats.whole_image.radius);
  r.dist_text = distribution_distances(r.stats.part_text.radius, r.stats.whole_text.radius);
  r.correlation = uncertainty_correlation(corpus, store, cfg);
  return r;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  auto line = [&](const std::string& key, double v) { out << key << " = " << fmt(v) << '\n'; };
  for (const auto& [name, c] : {std::pair{"scenes", r.scenes}, std::pair{"parts", r.parts}}) {
    const std::string p = std::string("classify.") + name + ".";
    line(p + "accuracy", c.accuracy);
    line(p + "tie", c.mean_tie);
    line(p + "lca", c.mean_lca);
    line(p + "jaccard", c.jaccard);
    line(p + "precision_h", c.precision_h);
    line(p + "recall_h", c.recall_h);
  }
  for (const auto& [k, v] : r.recall) line("recall." + k, v);
  for (const auto& [name, d] : {std::pair{"image", r.dist_image}, std::pair{"text", r.dist_text}}) {
    const std::string p = std::string("radius_dist.") + name + ".";
    line(p + "w1", d.w1);
    line(p + "w2", d.w2);
    line(p + "mmd2", d.mmd2);
  }
  line("mean_radius.whole_image", r.stats.whole_image.mean_radius());
  line("mean_radius.whole_text", r.stats.whole_text.mean_radius());
  line("mean_radius.part_image", r.stats.part_image.mean_radius());
  line("mean_radius.part_text", r.stats.part_text.mean_radius());
  line("uncertainty_corr.similarity.pearson", r.correlation.similarity.value);
  out << "uncertainty_corr.similarity.degenerate = " << (r.correlation.similarity.degenerate ? "true" : "false")
      << '\n';
  line("uncertainty_corr.representativeness.spearman", r.correlation.representativeness.value);
  out << "uncertainty_corr.representativeness.degenerate = "
      << (r.correlation.representativeness.degenerate ? "true" : "false") << '\n';
  out << "uncertainty_corr.parts = " << r.correlation.parts << '\n';
  return out.str();
}

std::string export_csv(const Corpus& corpus, const ParameterStore& store, const TrainConfig& cfg) {
  const Manifold m = store_manifold(store, cfg);
  std::ostringstream out;
  out << "id,view,level,radius,uncertainty";
  for (std::size_t k = 0; k < cfg.embed_dim; ++k) out << ",v" << k;
  out << '\n';
  for (const auto* list : {&corpus.scenes(), &corpus.parts()}) {
    for (const Concept& c : *list) {
      for (View view : {View::kImage, View::kText}) {
        const TangentEmbedding v = embed_concept(store, corpus, cfg, c.id, view);
        out << c.id << ',' << (view == View::kImage ? "image" : "text") << ','
            << (c.level == Level::kScene ? "scene" : "part") << ',' << fmt(hyperbolic_radius(lift(v, m).space, m))
            << ',' << fmt(uncertainty(v.space, m, cfg.loss.uncertainty_source));
        for (double x : v.space) out << ',' << fmt(x);
        out << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace uncha
