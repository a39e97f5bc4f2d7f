// Command-line front end over the C API.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uncha/uncha.h"

namespace {

void print_line(const char* line, void*) { std::printf("%s\n", line); }

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int fail(int status, const std::string& detail) {
  const std::string reason = one_line(uncha_last_error()[0] != '\0' ? uncha_last_error() : detail);
  std::fprintf(stderr, "error: code=%s reason=%s\n", uncha_status_name(status), reason.c_str());
  if (!detail.empty()) std::fprintf(stderr, "detail: %s\n", detail.c_str());
  return status;
}

/// --seed if given, else UNCHA_SEED, else the built-in default.
std::optional<std::uint64_t> resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv("UNCHA_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != nullptr && *end == '\0') return v;
    throw CLI::ValidationError("UNCHA_SEED", std::string("not a non-negative integer: '") + env + "'");
  }
  return std::nullopt;
}

void log_config(uncha_config* cfg) {
  std::printf("# resolved config (hash %s)\n", uncha_config_hash(cfg));
  const std::string text = uncha_config_text(cfg);
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    std::printf("#   %s\n", text.substr(start, end - start).c_str());
    start = end + 1;
  }
}

struct Generate {
  uncha_generator_params p{};
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct Train {
  std::string corpus, out, config, resume;
  std::optional<std::uint64_t> steps, batch_size, warmup, seed;
  std::optional<double> lr;
  std::vector<std::string> sets;
};

struct Eval {
  std::string checkpoint, corpus, taxonomy, out;
};

struct Export {
  std::string checkpoint, corpus, out;
};

int run_generate(Generate& g) {
  if (auto s = resolve_seed(g.seed)) g.p.seed = *s;
  std::printf("# generate scenes=%zu parts=%zu latent_dim=%zu noise_scale=%.17g scene_norm=%.17g spread=%.17g "
              "min_separation=%.17g repr_min=%.17g repr_max=%.17g seed=%llu\n",
              g.p.num_scenes, g.p.parts_per_scene, g.p.latent_dim, g.p.noise_scale, g.p.scene_norm, g.p.spread, g.p.min_separation,
              g.p.repr_min, g.p.repr_max, static_cast<unsigned long long>(g.p.seed));
  uncha_corpus* corpus = nullptr;
  int rc = uncha_corpus_generate(&g.p, &corpus);
  if (rc != UNCHA_OK) return fail(rc, "corpus generation failed");
  rc = uncha_corpus_save(corpus, g.out.c_str());
  uncha_corpus_free(corpus);
  if (rc != UNCHA_OK) return fail(rc, "could not write " + g.out);
  std::printf("wrote %s\n", g.out.c_str());
  return UNCHA_OK;
}

int run_train(Train& t) {
  uncha_config* cfg = nullptr;
  uncha_config_new(&cfg);
  auto set = [&](const std::string& key, const std::string& value) {
    const int rc = uncha_config_set(cfg, key.c_str(), value.c_str());
    if (rc != UNCHA_OK) throw rc;
  };
  int rc = UNCHA_OK;
  uncha_corpus* corpus = nullptr;
  try {
    if (!t.config.empty()) {
      rc = uncha_config_load_file(cfg, t.config.c_str());
      if (rc != UNCHA_OK) throw rc;
    }
    for (const std::string& kv : t.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        uncha_config_free(cfg);
        return fail(UNCHA_ERR_CONTRACT, "--set expects key=value, got '" + kv + "'");
      }
      set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (t.steps) set("steps", std::to_string(*t.steps));
    if (t.batch_size) set("batch_size", std::to_string(*t.batch_size));
    if (t.warmup) set("warmup", std::to_string(*t.warmup));
    if (t.lr) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", *t.lr);
      set("lr", buf);
    }
    if (auto s = resolve_seed(t.seed)) set("seed", std::to_string(*s));
  } catch (int code) {
    uncha_config_free(cfg);
    return fail(code, "invalid configuration");
  }
  log_config(cfg);
  rc = uncha_corpus_load(t.corpus.c_str(), &corpus);
  if (rc != UNCHA_OK) {
    uncha_config_free(cfg);
    return fail(rc, "could not load corpus " + t.corpus);
  }
  rc = uncha_train(corpus, cfg, t.out.c_str(), t.resume.empty() ? nullptr : t.resume.c_str(), print_line, nullptr);
  uncha_corpus_free(corpus);
  uncha_config_free(cfg);
  if (rc != UNCHA_OK) return fail(rc, "training aborted");
  std::printf("wrote %s/metrics.jsonl and %s/final.json\n", t.out.c_str(), t.out.c_str());
  return UNCHA_OK;
}

int run_eval(const Eval& e) {
  uncha_corpus* corpus = nullptr;
  int rc = uncha_corpus_load(e.corpus.c_str(), &corpus);
  if (rc != UNCHA_OK) return fail(rc, "could not load corpus " + e.corpus);
  rc = uncha_eval(corpus, e.checkpoint.c_str(), e.taxonomy.empty() ? nullptr : e.taxonomy.c_str(),
                  e.out.empty() ? nullptr : e.out.c_str(), print_line, nullptr);
  uncha_corpus_free(corpus);
  if (rc != UNCHA_OK) return fail(rc, "evaluation failed");
  return UNCHA_OK;
}

int run_export(const Export& x) {
  uncha_corpus* corpus = nullptr;
  int rc = uncha_corpus_load(x.corpus.c_str(), &corpus);
  if (rc != UNCHA_OK) return fail(rc, "could not load corpus " + x.corpus);
  rc = uncha_export(corpus, x.checkpoint.c_str(), x.out.c_str());
  uncha_corpus_free(corpus);
  if (rc != UNCHA_OK) return fail(rc, "export failed");
  std::printf("wrote %s\n", x.out.c_str());
  return UNCHA_OK;
}

int run_check_grads(std::optional<std::uint64_t> flag) {
  const std::uint64_t seed = resolve_seed(flag).value_or(1);
  std::printf("# check-grads seed=%llu\n", static_cast<unsigned long long>(seed));
  const int rc = uncha_check_grads(seed, print_line, nullptr);
  if (rc != UNCHA_OK) return fail(rc, rc == UNCHA_ERR_CHECK_FAILED ? "see the table above" : "check-grads aborted");
  return UNCHA_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncha: uncertainty-guided hyperbolic part/whole alignment at desk scale"};
  app.require_subcommand(1);
  app.set_version_flag("--version", uncha_version());

  Generate gen;
  uncha_generator_defaults(&gen.p);
  auto* g = app.add_subcommand("generate", "write a synthetic part/whole corpus");
  g->add_option("--scenes", gen.p.num_scenes, "number of scenes")->capture_default_str();
  g->add_option("--parts", gen.p.parts_per_scene, "parts per scene")->capture_default_str();
  g->add_option("--latent-dim", gen.p.latent_dim, "latent dimension")->capture_default_str();
  g->add_option("--noise", gen.p.noise_scale, "view noise scale")->capture_default_str();
  g->add_option("--scene-norm", gen.p.scene_norm, "norm of every scene latent")->capture_default_str();
  g->add_option("--spread", gen.p.spread, "part displacement at representativeness 0")->capture_default_str();
  g->add_option("--min-separation", gen.p.min_separation, "minimum scene latent distance")->capture_default_str();
  g->add_option("--repr-min", gen.p.repr_min, "lower bound of representativeness")->capture_default_str();
  g->add_option("--repr-max", gen.p.repr_max, "upper bound of representativeness")->capture_default_str();
  g->add_option("--seed", gen.seed, "generator seed (default: $UNCHA_SEED, else 7)");
  g->add_option("--out", gen.out, "output corpus file")->required();

  Train tr;
  auto* t = app.add_subcommand("train", "train embeddings and write metrics and checkpoints");
  t->add_option("--corpus", tr.corpus, "corpus file")->required();
  t->add_option("--out", tr.out, "output directory")->required();
  t->add_option("--config", tr.config, "key = value config file (flags override it)");
  t->add_option("--set", tr.sets, "extra key=value override, repeatable");
  t->add_option("--steps", tr.steps, "optimizer steps");
  t->add_option("--batch-size", tr.batch_size, "scenes per batch");
  t->add_option("--lr", tr.lr, "peak learning rate");
  t->add_option("--warmup", tr.warmup, "linear warm-up steps");
  t->add_option("--seed", tr.seed, "run seed (default: $UNCHA_SEED, else 7)");
  t->add_option("--resume", tr.resume, "checkpoint to resume from");

  Eval ev;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
  e->add_option("--corpus", ev.corpus, "corpus file")->required();
  e->add_option("--taxonomy", ev.taxonomy, "taxonomy file (default: synthetic scene/part tree)");
  e->add_option("--out", ev.out, "metrics output file");

  std::optional<std::uint64_t> cg_seed;
  auto* c = app.add_subcommand("check-grads", "finite-difference check of every loss gradient");
  c->add_option("--seed", cg_seed, "seed (default: $UNCHA_SEED, else 1)");

  Export ex;
  auto* x = app.add_subcommand("export", "dump embeddings with radius and uncertainty as CSV");
  x->add_option("--checkpoint", ex.checkpoint, "checkpoint file")->required();
  x->add_option("--corpus", ex.corpus, "corpus file")->required();
  x->add_option("--out", ex.out, "output CSV")->required();

  try {
    app.parse(argc, argv);
    if (g->parsed()) return run_generate(gen);
    if (t->parsed()) return run_train(tr);
    if (e->parsed()) return run_eval(ev);
    if (c->parsed()) return run_check_grads(cg_seed);
    return run_export(ex);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::Error& err) {
    return fail(UNCHA_ERR_CONTRACT, one_line(err.what()));
  }
}
