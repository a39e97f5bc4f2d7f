#include "uncha/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace uncha {

using nlohmann::json;

double learning_rate(const TrainConfig& cfg, std::size_t step) {
  const double peak = cfg.lr;
  if (step < cfg.warmup) return peak * static_cast<double>(step) / static_cast<double>(cfg.warmup);
  if (cfg.steps <= cfg.warmup) return peak;
  const double progress =
      static_cast<double>(step - cfg.warmup) / static_cast<double>(cfg.steps - cfg.warmup);
  return peak * 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(progress, 1.0)));
}

BatchIndices batch_for_step(const Corpus& corpus, const TrainConfig& cfg, std::size_t step) {
  Rng stream(mix_seed(cfg.seed, step));
  return sample_batch(corpus, cfg.batch_size, stream);
}

TrainState initial_state(const Corpus& corpus, const TrainConfig& cfg) {
  TrainState s;
  s.store = init_parameters(corpus, cfg);
  for (const Parameter& p : s.store.all()) {
    s.adam.m[p.name].assign(p.values.size(), 0.0);
    s.adam.v[p.name].assign(p.values.size(), 0.0);
  }
  return s;
}

namespace {

std::string describe_batch(const BatchIndices& b, const LossReport& report) {
  std::ostringstream out;
  out << "scenes=[";
  for (std::size_t k = 0; k < b.scenes.size(); ++k) out << (k ? "," : "") << b.scenes[k];
  out << "] parts=[";
  for (std::size_t k = 0; k < b.parts.size(); ++k) out << (k ? "," : "") << b.parts[k];
  out << "] total=" << report.total;
  for (const auto& [k, v] : report.components) out << ' ' << k << '=' << v;
  return out.str();
}

bool excluded(const TrainConfig& cfg, const std::string& name) {
  return std::find(cfg.decay_exclude.begin(), cfg.decay_exclude.end(), name) != cfg.decay_exclude.end();
}

}  // namespace

LossReport train_step(TrainState& state, const Corpus& corpus, const TrainConfig& cfg, const BatchIndices& batch,
                      double lr) {
  // Reused across steps so the node arrays keep their capacity.
  thread_local ad::Tape tape;
  tape.clear();
  const BoundParameters bound(tape, state.store);
  const LossTerms<ad::Var> terms = [&] {
    try {
      return batch_loss(bound, corpus, cfg, batch);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at step " + std::to_string(state.step) + ": " +
                           describe_batch(batch, LossReport{std::nan(""), {}}));
    }
  }();
  const LossReport report = make_report(terms);
  if (!std::isfinite(report.total)) {
    throw NumericalError("non-finite loss at step " + std::to_string(state.step) + ": " +
                         describe_batch(batch, report));
  }
  GradientMap grads;
  try {
    grads = backward(tape, terms.total, bound);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at step " + std::to_string(state.step) + ": " +
                         describe_batch(batch, report));
  }

  AdamState& adam = state.adam;
  adam.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.t));
  for (Parameter& p : state.store.all()) {
    const std::vector<double>& g = grads.at(p.name);
    std::vector<double>& m = adam.m.at(p.name);
    std::vector<double>& v = adam.v.at(p.name);
    const double decay = excluded(cfg, p.name) ? 1.0 : 1.0 - lr * cfg.weight_decay;
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p.values[k] = p.values[k] * decay - lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
  state.store.project();
  state.step += 1;
  return report;
}

std::string metrics_record(const TrainState& state, const Corpus& corpus, const TrainConfig& cfg) {
  using namespace param_names;
  const LossReport report = batch_report(state.store, corpus, cfg, batch_for_step(corpus, cfg, state.step));
  const EmbeddingStats stats = embedding_stats(state.store, corpus, cfg);
  json j;
  j["step"] = state.step;
  j["lr"] = learning_rate(cfg, state.step);
  j["loss"]["total"] = report.total;
  for (const auto& [k, v] : report.components) j["loss"][k] = v;
  const std::pair<const char*, const GroupStats*> groups[] = {{"whole_image", &stats.whole_image},
                                                              {"whole_text", &stats.whole_text},
                                                              {"part_image", &stats.part_image},
                                                              {"part_text", &stats.part_text}};
  for (const auto& [name, g] : groups) {
    j["mean_radius"][name] = g->mean_radius();
    j["mean_uncertainty"][name] = g->mean_uncertainty();
  }
  for (const char* name : {kCurvature, kTauGlobal, kTauLocal, kTauGlobalLocal, kScaleImage, kScaleText}) {
    j["params"][name] = state.store.scalar(name);
  }
  const auto put = [&](const char* key, const DistributionDistances& d) {
    j[key] = {{"w1", d.w1}, {"w2", d.w2}, {"mmd2", d.mmd2}};
  };
  put("dist_image", distribution_distances(stats.part_image.radius, stats.whole_image.radius));
  put("dist_text", distribution_distances(stats.part_text.radius, stats.whole_text.radius));
  return j.dump();
}

std::string checkpoint_json(const TrainState& state, const TrainConfig& cfg) {
  json j;
  j["format"] = "uncha-checkpoint";
  j["version"] = kCheckpointVersion;
  j["step"] = state.step;
  j["config_hash"] = config_hash(cfg);
  j["config"] = dump_config(cfg);
  json params = json::array();
  for (const Parameter& p : state.store.all()) {
    params.push_back({{"name", p.name}, {"rows", p.rows}, {"cols", p.cols}, {"values", p.values}});
  }
  j["params"] = params;
  j["adam"] = {{"t", state.adam.t}, {"m", state.adam.m}, {"v", state.adam.v}};
  j["schedule"] = {{"peak_lr", cfg.lr},
                   {"warmup", cfg.warmup},
                   {"steps", cfg.steps},
                   {"next_lr", learning_rate(cfg, state.step)}};
  return j.dump(1) + "\n";
}

void save_checkpoint(const std::string& path, const TrainState& state, const TrainConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << checkpoint_json(state, cfg);
  if (!out) throw ConfigError("write failed: " + path);
}

LoadedCheckpoint parse_checkpoint(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    if (j.at("format") != "uncha-checkpoint") throw ConfigError("checkpoint: wrong format tag");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ConfigError("checkpoint: unsupported version " + j.at("version").dump());
    }
    LoadedCheckpoint c;
    c.state.step = j.at("step").get<std::size_t>();
    c.config_text = j.at("config").get<std::string>();
    c.config_hash = j.at("config_hash").get<std::string>();
    for (const json& p : j.at("params")) {
      c.state.store.add(p.at("name").get<std::string>(), p.at("rows").get<std::size_t>(),
                        p.at("cols").get<std::size_t>(), p.at("values").get<std::vector<double>>());
    }
    const json& a = j.at("adam");
    c.state.adam.t = a.at("t").get<std::uint64_t>();
    c.state.adam.m = a.at("m").get<std::map<std::string, std::vector<double>>>();
    c.state.adam.v = a.at("v").get<std::map<std::string, std::vector<double>>>();
    for (const Parameter& p : c.state.store.all()) {
      if (c.state.adam.m.at(p.name).size() != p.values.size() || c.state.adam.v.at(p.name).size() != p.values.size()) {
        throw ConfigError("checkpoint: optimizer moments do not match parameter '" + p.name + "'");
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed JSON: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("checkpoint: missing entry: ") + e.what());
  } catch (const ContractError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  require(cfg.batch_size <= corpus.scenes().size(), "batch_size exceeds the number of scenes");
  const auto log = [&](const std::string& line) {
    if (opts.log) opts.log(line);
  };

  TrainResult result;
  if (opts.resume.empty()) {
    result.state = initial_state(corpus, cfg);
  } else {
    LoadedCheckpoint c = load_checkpoint(opts.resume);
    if (c.config_hash != config_hash(cfg)) {
      throw ConfigError("resume: checkpoint config hash " + c.config_hash + " differs from current " +
                        config_hash(cfg));
    }
    // Structural check against a fresh init: same names and shapes.
    const ParameterStore fresh = init_parameters(corpus, cfg);
    require(fresh.all().size() == c.state.store.all().size(), "resume: parameter set differs from the corpus/config");
    for (std::size_t k = 0; k < fresh.all().size(); ++k) {
      const Parameter& a = fresh.all()[k];
      const Parameter& b = c.state.store.all()[k];
      require(a.name == b.name && a.rows == b.rows && a.cols == b.cols,
              "resume: parameter '" + b.name + "' does not match the corpus/config");
    }
    require(c.state.step <= cfg.steps, "resume: checkpoint step beyond configured steps");
    result.state = std::move(c.state);
    log("resumed from " + opts.resume + " at step " + std::to_string(result.state.step));
  }

  std::ofstream metrics;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    const std::string path = opts.out_dir + "/metrics.jsonl";
    metrics.open(path, std::ios::binary | std::ios::trunc);
    if (!metrics) throw ConfigError("cannot open '" + path + "' for writing");
  }

  TrainState& state = result.state;
  while (true) {
    const std::size_t s = state.step;
    if (s % cfg.eval_interval == 0 || s == cfg.steps) {
      std::string rec = metrics_record(state, corpus, cfg);
      if (metrics.is_open()) {
        metrics << rec << '\n';
        metrics.flush();
      }
      log(rec);
      result.records.push_back(std::move(rec));
    }
    if (!opts.out_dir.empty() && cfg.checkpoint_interval > 0 && s > 0 && s % cfg.checkpoint_interval == 0) {
      save_checkpoint(opts.out_dir + "/checkpoint_" + std::to_string(s) + ".json", state, cfg);
    }
    if (s >= cfg.steps) break;
    train_step(state, corpus, cfg, batch_for_step(corpus, cfg, s), learning_rate(cfg, s));
  }
  if (!opts.out_dir.empty()) save_checkpoint(opts.out_dir + "/final.json", state, cfg);
  return result;
}

}  // namespace uncha
