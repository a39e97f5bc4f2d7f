#include "uncha/checkgrads.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace uncha {

namespace {

using namespace param_names;

struct Setup {
  BatchT<ad::Var> batch;
  BasicManifold<ad::Var> m;
  Temperatures<ad::Var> temps;
};

Setup bind(const BoundParameters& bound, const Corpus& corpus, const TrainConfig& cfg, const BatchIndices& idx) {
  return Setup{bind_batch(bound, corpus, cfg, idx), BasicManifold<ad::Var>(bound.scalar(kCurvature), cfg.embed_dim),
               Temperatures<ad::Var>{bound.scalar(kTauGlobal), bound.scalar(kTauLocal),
                                     bound.scalar(kTauGlobalLocal)}};
}

std::vector<Point<ad::Var>> points(const std::vector<Tangent<ad::Var>>& ts, const BasicManifold<ad::Var>& m) {
  return embed(ts, m).point;
}

/// Sum over rows and both inter pairs (part text -> part image, whole text ->
/// whole image) of a pairwise entailment loss.
template <class F>
ad::Var pairwise_sum(const Setup& s, F&& loss) {
  const auto pt = points(s.batch.part_text, s.m);
  const auto pi = points(s.batch.part_image, s.m);
  const auto wt = points(s.batch.whole_text, s.m);
  const auto wi = points(s.batch.whole_image, s.m);
  std::vector<ad::Var> terms;
  for (std::size_t k = 0; k < pt.size(); ++k) {
    terms.push_back(loss(pt[k], pi[k]));
    terms.push_back(loss(wt[k], wi[k]));
  }
  return sum(std::span<const ad::Var>(terms));
}

const char* mode_name(EmbeddingMode m) { return to_string(m); }

}  // namespace

const std::vector<std::string>& gradcheck_objectives() {
  static const std::vector<std::string> names = {"contrastive",      "contrastive_total", "entail_hinge",
                                                 "entail_leaky",     "calibration",       "entailment_total",
                                                 "total_loss"};
  return names;
}

Objective make_objective(const std::string& name, const Corpus& corpus, const TrainConfig& cfg,
                         const BatchIndices& indices) {
  const LossConfig& lc = cfg.loss;
  if (name == "contrastive") {
    return [&corpus, cfg, indices](ad::Tape&, const BoundParameters& b) {
      const Setup s = bind(b, corpus, cfg, indices);
      return contrastive(points(s.batch.whole_image, s.m), points(s.batch.whole_text, s.m), s.temps.global, s.m,
                         cfg.loss.include_positive);
    };
  }
  if (name == "contrastive_total") {
    return [&corpus, cfg, indices](ad::Tape&, const BoundParameters& b) {
      const Setup s = bind(b, corpus, cfg, indices);
      return contrastive_total(s.batch, s.temps, s.m, cfg.loss).sum();
    };
  }
  if (name == "entail_hinge") {
    return [&corpus, cfg, indices, lc](ad::Tape&, const BoundParameters& b) {
      const Setup s = bind(b, corpus, cfg, indices);
      return pairwise_sum(s, [&](const Point<ad::Var>& p, const Point<ad::Var>& q) {
        return entail_hinge(p, q, lc.cone.eta_inter, lc.cone, s.m);
      });
    };
  }
  if (name == "entail_leaky") {
    return [&corpus, cfg, indices, lc](ad::Tape&, const BoundParameters& b) {
      const Setup s = bind(b, corpus, cfg, indices);
      return pairwise_sum(s, [&](const Point<ad::Var>& p, const Point<ad::Var>& q) {
        return entail_leaky(p, q, lc.cone.eta_inter, lc.cone, lc.alpha, s.m);
      });
    };
  }
  if (name == "calibration") {
    return [&corpus, cfg, indices, lc](ad::Tape&, const BoundParameters& b) {
      const Setup s = bind(b, corpus, cfg, indices);
      const Embedded<ad::Var> parts_t = embed(s.batch.part_text, s.m);
      const Embedded<ad::Var> parts_i = embed(s.batch.part_image, s.m);
      return calibration(parts_t, points(s.batch.whole_text, s.m), lc.cone.eta_intra, lc, s.m) +
             calibration(parts_i, points(s.batch.whole_image, s.m), lc.cone.eta_intra, lc, s.m);
    };
  }
  if (name == "entailment_total") {
    return [&corpus, cfg, indices](ad::Tape&, const BoundParameters& b) {
      const Setup s = bind(b, corpus, cfg, indices);
      return entailment_total(s.batch, s.m, cfg.loss).weighted(cfg.loss);
    };
  }
  if (name == "total_loss") {
    return [&corpus, cfg, indices](ad::Tape&, const BoundParameters& b) {
      return batch_loss(b, corpus, cfg, indices).total;
    };
  }
  throw ContractError("unknown gradient-check objective '" + name + "'");
}

std::vector<std::string> CheckGradsReport::uncovered() const {
  std::map<std::string, std::size_t> checked;
  for (const auto& r : rows) checked[r.objective + "/" + r.check.name] += r.check.checked;
  std::vector<std::string> out;
  for (const auto& [key, n] : checked) {
    if (n == 0) out.push_back(key);
  }
  return out;
}

bool CheckGradsReport::passed() const {
  return uncovered().empty() && std::all_of(rows.begin(), rows.end(), [](const CheckGradsRow& r) { return r.check.passed; }) &&
         std::all_of(stop_gradient.begin(), stop_gradient.end(),
                     [](const StopGradientRow& r) { return r.check.passed; });
}

double CheckGradsReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.check.max_rel_error);
  return m;
}

CheckGradsReport run_check_grads(const CheckGradsOptions& opts, const LogFn& log) {
  CheckGradsReport report;
  for (EmbeddingMode mode : opts.modes) {
    for (std::size_t n : opts.dims) {
      for (std::size_t b : opts.batch_sizes) {
        GeneratorParams gp;
        gp.num_scenes = std::max<std::size_t>(b, 2);
        gp.parts_per_scene = 2;
        gp.latent_dim = 4;
        gp.seed = opts.seed;
        const Corpus corpus = generate(gp);

        TrainConfig cfg;
        cfg.seed = opts.seed;
        cfg.embed_dim = n;
        cfg.batch_size = b;
        cfg.embedding = mode;
        // Spread points away from the origin so cones, hinges and distances
        // are all in their non-trivial regimes.
        cfg.init_scale = mode == EmbeddingMode::kTable ? 0.6 : 0.5;
        const ParameterStore store = init_parameters(corpus, cfg);
        Rng stream(mix_seed(opts.seed, b * 100 + n));
        const BatchIndices idx = sample_batch(corpus, b, stream);

        for (const std::string& name : gradcheck_objectives()) {
          const GradCheckReport r = finite_diff_check(make_objective(name, corpus, cfg, idx), store, opts.fd);
          for (const ParameterCheck& pc : r.params) report.rows.push_back(CheckGradsRow{name, mode, b, n, pc});
          if (log) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%-18s %-7s B=%zu n=%-2zu max_rel_err=%.3e %s", name.c_str(),
                          mode_name(mode), b, n, r.max_rel_error(), r.passed() ? "ok" : "FAIL");
            log(buf);
          }
        }
        // The wholes and (with norm-based uncertainty) the curvature reach the
        // calibration term only through its stop-gradient factor.
        if (mode == EmbeddingMode::kTable) {
          const Objective cal = make_objective("calibration", corpus, cfg, idx);
          std::vector<std::string> blocked = {kSceneImage, kSceneText};
          if (cfg.loss.uncertainty_source == UncertaintySource::kNorm) blocked.push_back(kCurvature);
          for (const std::string& p : blocked) {
            report.stop_gradient.push_back(StopGradientRow{p, mode, b, n, check_stop_gradient(cal, store, p)});
          }
        }
      }
    }
  }
  return report;
}

std::string format_check_grads(const CheckGradsReport& report) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-18s %-7s %3s %3s %-14s %7s %7s %12s %s\n", "objective", "mode", "B", "n",
                "param", "checked", "skipped", "max_rel_err", "result");
  out += buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-18s %-7s %3zu %3zu %-14s %7zu %7zu %12.3e %s\n", r.objective.c_str(),
                  mode_name(r.mode), r.batch, r.dim, r.check.name.c_str(), r.check.checked, r.check.skipped,
                  r.check.max_rel_error, r.check.passed ? "ok" : "FAIL");
    out += buf;
  }
  for (const auto& r : report.stop_gradient) {
    std::snprintf(buf, sizeof buf, "stop_gradient calibration %-7s B=%zu n=%zu %-12s tape_grad=%.1e fd=%.3e %s\n",
                  mode_name(r.mode), r.batch, r.dim, r.param.c_str(), r.check.tape_grad_max_abs,
                  r.check.directional_fd, r.check.passed ? "ok" : "FAIL");
    out += buf;
  }
  for (const auto& key : report.uncovered()) out += "uncovered " + key + " FAIL\n";
  std::snprintf(buf, sizeof buf, "summary: rows=%zu stop_gradient=%zu max_rel_err=%.3e %s\n", report.rows.size(),
                report.stop_gradient.size(), report.max_rel_error(), report.passed() ? "PASS" : "FAIL");
  out += buf;
  return out;
}

}  // namespace uncha
