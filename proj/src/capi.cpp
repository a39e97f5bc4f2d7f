#include "uncha/uncha.h"

#include <fstream>
#include <string>

#include "uncha/checkgrads.hpp"
#include "uncha/evalmetrics.hpp"
#include "uncha/trainer.hpp"

struct uncha_corpus {
  uncha::Corpus corpus;
};

struct uncha_config {
  uncha::TrainConfig cfg;
  std::string text;
  std::string hash;
};

namespace {

thread_local std::string last_error;

template <class F>
int guarded(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const uncha::NumericalError& e) {
    last_error = e.what();
    return UNCHA_ERR_NUMERICAL;
  } catch (const uncha::ContractError& e) {
    last_error = e.what();
    return UNCHA_ERR_CONTRACT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return UNCHA_ERR_CONTRACT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return UNCHA_ERR_CONTRACT;
  }
}

void require_arg(const void* p, const char* name) {
  if (p == nullptr) throw uncha::ContractError(std::string("null argument: ") + name);
}

uncha::LogFn forward_log(uncha_log_fn log, void* user) {
  if (log == nullptr) return {};
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

uncha::TrainConfig checkpoint_config(const uncha::LoadedCheckpoint& c) {
  uncha::TrainConfig cfg;
  uncha::apply_config_text(cfg, c.config_text);
  cfg.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw uncha::ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw uncha::ConfigError("write failed: " + path);
}

void log_lines(const std::string& text, uncha_log_fn log, void* user) {
  if (log == nullptr) return;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    log(text.substr(start, end - start).c_str(), user);
    if (end == std::string::npos) break;
    start = end + 1;
  }
}

}  // namespace

extern "C" {

const char* uncha_version(void) { return "1.0.0"; }

const char* uncha_last_error(void) { return last_error.c_str(); }

const char* uncha_status_name(int status) {
  switch (status) {
    case UNCHA_OK:
      return "ok";
    case UNCHA_ERR_CONTRACT:
      return "contract";
    case UNCHA_ERR_NUMERICAL:
      return "numerical";
    case UNCHA_ERR_CHECK_FAILED:
      return "check_failed";
    default:
      return "unknown";
  }
}

void uncha_generator_defaults(uncha_generator_params* params) {
  if (params == nullptr) return;
  const uncha::GeneratorParams d;
  *params = uncha_generator_params{d.num_scenes, d.parts_per_scene, d.latent_dim, d.noise_scale, d.scene_norm, d.spread,
                                   d.min_separation, d.repr_min, d.repr_max, d.seed};
}

int uncha_corpus_generate(const uncha_generator_params* params, uncha_corpus** out) {
  return guarded([&] {
    require_arg(params, "params");
    require_arg(out, "out");
    uncha::GeneratorParams p;
    p.num_scenes = params->num_scenes;
    p.parts_per_scene = params->parts_per_scene;
    p.latent_dim = params->latent_dim;
    p.noise_scale = params->noise_scale;
    p.scene_norm = params->scene_norm;
    p.spread = params->spread;
    p.min_separation = params->min_separation;
    p.repr_min = params->repr_min;
    p.repr_max = params->repr_max;
    p.seed = params->seed;
    *out = new uncha_corpus{uncha::generate(p)};
    return UNCHA_OK;
  });
}

int uncha_corpus_load(const char* path, uncha_corpus** out) {
  return guarded([&] {
    require_arg(path, "path");
    require_arg(out, "out");
    *out = new uncha_corpus{uncha::load_corpus(path)};
    return UNCHA_OK;
  });
}

int uncha_corpus_save(const uncha_corpus* corpus, const char* path) {
  return guarded([&] {
    require_arg(corpus, "corpus");
    require_arg(path, "path");
    uncha::save_corpus(corpus->corpus, path);
    return UNCHA_OK;
  });
}

size_t uncha_corpus_num_scenes(const uncha_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.scenes().size();
}

size_t uncha_corpus_num_parts(const uncha_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.parts().size();
}

void uncha_corpus_free(uncha_corpus* corpus) { delete corpus; }

int uncha_config_new(uncha_config** out) {
  return guarded([&] {
    require_arg(out, "out");
    *out = new uncha_config{};
    return UNCHA_OK;
  });
}

int uncha_config_set(uncha_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require_arg(cfg, "cfg");
    require_arg(key, "key");
    require_arg(value, "value");
    uncha::set_config_value(cfg->cfg, key, value);
    return UNCHA_OK;
  });
}

int uncha_config_load_file(uncha_config* cfg, const char* path) {
  return guarded([&] {
    require_arg(cfg, "cfg");
    require_arg(path, "path");
    uncha::apply_config_file(cfg->cfg, path);
    return UNCHA_OK;
  });
}

const char* uncha_config_text(uncha_config* cfg) {
  if (cfg == nullptr) return "";
  cfg->text = uncha::dump_config(cfg->cfg);
  return cfg->text.c_str();
}

const char* uncha_config_hash(uncha_config* cfg) {
  if (cfg == nullptr) return "";
  cfg->hash = uncha::config_hash(cfg->cfg);
  return cfg->hash.c_str();
}

void uncha_config_free(uncha_config* cfg) { delete cfg; }

int uncha_train(const uncha_corpus* corpus, const uncha_config* cfg, const char* out_dir, const char* resume,
                uncha_log_fn log, void* user) {
  return guarded([&] {
    require_arg(corpus, "corpus");
    require_arg(cfg, "cfg");
    require_arg(out_dir, "out_dir");
    uncha::TrainOptions opts;
    opts.out_dir = out_dir;
    if (resume != nullptr) opts.resume = resume;
    opts.log = forward_log(log, user);
    uncha::train(corpus->corpus, cfg->cfg, opts);
    return UNCHA_OK;
  });
}

int uncha_eval(const uncha_corpus* corpus, const char* checkpoint, const char* taxonomy, const char* out_path,
               uncha_log_fn log, void* user) {
  return guarded([&] {
    require_arg(corpus, "corpus");
    require_arg(checkpoint, "checkpoint");
    const uncha::LoadedCheckpoint c = uncha::load_checkpoint(checkpoint);
    const uncha::TrainConfig cfg = checkpoint_config(c);
    const uncha::Taxonomy t =
        taxonomy != nullptr ? uncha::Taxonomy::load(taxonomy) : uncha::Taxonomy::synthetic(corpus->corpus);
    const std::string text = uncha::format_report(uncha::evaluate(corpus->corpus, c.state.store, cfg, t));
    if (out_path != nullptr) write_file(out_path, text);
    log_lines(text, log, user);
    return UNCHA_OK;
  });
}

int uncha_export(const uncha_corpus* corpus, const char* checkpoint, const char* out_csv) {
  return guarded([&] {
    require_arg(corpus, "corpus");
    require_arg(checkpoint, "checkpoint");
    require_arg(out_csv, "out_csv");
    const uncha::LoadedCheckpoint c = uncha::load_checkpoint(checkpoint);
    write_file(out_csv, uncha::export_csv(corpus->corpus, c.state.store, checkpoint_config(c)));
    return UNCHA_OK;
  });
}

int uncha_check_grads(uint64_t seed, uncha_log_fn log, void* user) {
  return guarded([&] {
    uncha::CheckGradsOptions opts;
    opts.seed = seed;
    const uncha::CheckGradsReport r = uncha::run_check_grads(opts);
    const std::string table = uncha::format_check_grads(r);
    log_lines(table, log, user);
    if (!r.passed()) {
      last_error = "gradient check failed, max relative error " + std::to_string(r.max_rel_error());
      return UNCHA_ERR_CHECK_FAILED;
    }
    return UNCHA_OK;
  });
}

}  // extern "C"
