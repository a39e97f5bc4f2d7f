// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uncha/uncha.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uncha_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); }

uncha_corpus* small_corpus() {
  uncha_generator_params p;
  uncha_generator_defaults(&p);
  p.num_scenes = 8;
  p.parts_per_scene = 2;
  p.latent_dim = 4;
  uncha_corpus* c = nullptr;
  REQUIRE(uncha_corpus_generate(&p, &c) == UNCHA_OK);
  return c;
}

uncha_config* small_config(std::size_t steps) {
  uncha_config* cfg = nullptr;
  REQUIRE(uncha_config_new(&cfg) == UNCHA_OK);
  const std::string s = std::to_string(steps);
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{{"steps", s},
                                                                             {"batch_size", "4"},
                                                                             {"warmup", "2"},
                                                                             {"embed_dim", "4"},
                                                                             {"eval_interval", "5"},
                                                                             {"checkpoint_interval", "5"}}) {
    REQUIRE(uncha_config_set(cfg, k.c_str(), v.c_str()) == UNCHA_OK);
  }
  return cfg;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(uncha_version()) > 0);
  CHECK(std::string(uncha_status_name(UNCHA_OK)) == "ok");
  CHECK(std::string(uncha_status_name(UNCHA_ERR_CONTRACT)) == "contract");
  CHECK(std::string(uncha_status_name(UNCHA_ERR_NUMERICAL)) == "numerical");
  CHECK(std::string(uncha_status_name(UNCHA_ERR_CHECK_FAILED)) == "check_failed");
}

TEST_CASE("corpus: generate, save, load, counts") {
  uncha_corpus* c = small_corpus();
  CHECK(uncha_corpus_num_scenes(c) == 8);
  CHECK(uncha_corpus_num_parts(c) == 16);
  const fs::path dir = scratch("corpus");
  const std::string a = (dir / "a.corpus").string(), b = (dir / "b.corpus").string();
  REQUIRE(uncha_corpus_save(c, a.c_str()) == UNCHA_OK);
  uncha_corpus* back = nullptr;
  REQUIRE(uncha_corpus_load(a.c_str(), &back) == UNCHA_OK);
  REQUIRE(uncha_corpus_save(back, b.c_str()) == UNCHA_OK);
  CHECK(slurp(a) == slurp(b));
  uncha_corpus_free(back);
  uncha_corpus_free(c);
  uncha_corpus_free(nullptr);
}

TEST_CASE("errors are reported by code and message") {
  uncha_corpus* c = nullptr;
  CHECK(uncha_corpus_load("/nonexistent/data.corpus", &c) == UNCHA_ERR_CONTRACT);
  CHECK(c == nullptr);
  CHECK(std::strlen(uncha_last_error()) > 0);

  uncha_generator_params p;
  uncha_generator_defaults(&p);
  p.num_scenes = 0;
  CHECK(uncha_corpus_generate(&p, &c) == UNCHA_ERR_CONTRACT);
  CHECK(uncha_corpus_generate(nullptr, &c) == UNCHA_ERR_CONTRACT);
  CHECK(std::string(uncha_last_error()).find("null") != std::string::npos);

  uncha_config* cfg = nullptr;
  REQUIRE(uncha_config_new(&cfg) == UNCHA_OK);
  CHECK(std::strlen(uncha_last_error()) == 0);
  CHECK(uncha_config_set(cfg, "no_such_key", "1") == UNCHA_ERR_CONTRACT);
  CHECK(std::string(uncha_last_error()).find("no_such_key") != std::string::npos);
  CHECK(uncha_config_load_file(cfg, "/nonexistent/config.txt") == UNCHA_ERR_CONTRACT);
  uncha_config_free(cfg);
}

TEST_CASE("config: text and hash follow modifications") {
  uncha_config* cfg = nullptr;
  REQUIRE(uncha_config_new(&cfg) == UNCHA_OK);
  const std::string h0 = uncha_config_hash(cfg);
  CHECK(h0.size() == 16);
  REQUIRE(uncha_config_set(cfg, "lr", "0.001") == UNCHA_OK);
  CHECK(std::string(uncha_config_text(cfg)).find("lr = 0.001") != std::string::npos);
  CHECK(std::string(uncha_config_hash(cfg)) != h0);

  const fs::path dir = scratch("config");
  const fs::path file = dir / "c.txt";
  std::ofstream(file) << uncha_config_text(cfg);
  uncha_config* again = nullptr;
  REQUIRE(uncha_config_new(&again) == UNCHA_OK);
  REQUIRE(uncha_config_load_file(again, file.string().c_str()) == UNCHA_OK);
  CHECK(std::string(uncha_config_hash(again)) == uncha_config_hash(cfg));
  uncha_config_free(again);
  uncha_config_free(cfg);
}

TEST_CASE("train, resume, eval and export through the C surface") {
  uncha_corpus* c = small_corpus();
  uncha_config* cfg = small_config(10);
  const fs::path full = scratch("train_full"), tail = scratch("train_tail");
  std::vector<std::string> log;
  REQUIRE(uncha_train(c, cfg, full.string().c_str(), nullptr, collect, &log) == UNCHA_OK);
  CHECK_FALSE(log.empty());
  CHECK(fs::exists(full / "metrics.jsonl"));
  CHECK(fs::exists(full / "checkpoint_5.json"));
  CHECK(fs::exists(full / "final.json"));

  const std::string mid = (full / "checkpoint_5.json").string();
  REQUIRE(uncha_train(c, cfg, tail.string().c_str(), mid.c_str(), nullptr, nullptr) == UNCHA_OK);
  CHECK(slurp(full / "final.json") == slurp(tail / "final.json"));

  uncha_config* other = small_config(12);
  CHECK(uncha_train(c, other, tail.string().c_str(), mid.c_str(), nullptr, nullptr) == UNCHA_ERR_CONTRACT);
  CHECK(std::string(uncha_last_error()).find("hash") != std::string::npos);
  uncha_config_free(other);

  const std::string fin = (full / "final.json").string();
  const std::string report = (full / "eval.txt").string();
  std::vector<std::string> eval_log;
  REQUIRE(uncha_eval(c, fin.c_str(), nullptr, report.c_str(), collect, &eval_log) == UNCHA_OK);
  const std::string text = slurp(report);
  CHECK(text.find("classify.scenes.accuracy = ") != std::string::npos);
  CHECK(text.find("recall.whole_image_to_text@1 = ") != std::string::npos);
  CHECK_FALSE(eval_log.empty());
  CHECK(uncha_eval(c, "/nonexistent.json", nullptr, nullptr, nullptr, nullptr) == UNCHA_ERR_CONTRACT);

  const std::string csv = (full / "emb.csv").string();
  REQUIRE(uncha_export(c, fin.c_str(), csv.c_str()) == UNCHA_OK);
  std::istringstream rows(slurp(csv));
  std::string line;
  std::size_t n = 0;
  while (std::getline(rows, line)) ++n;
  CHECK(n == 1 + 2 * (8 + 16));

  uncha_config_free(cfg);
  uncha_corpus_free(c);
}
