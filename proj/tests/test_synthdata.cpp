#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "uncha/evalmetrics.hpp"
#include "uncha/synthdata.hpp"

using namespace uncha;

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) ab += a[k] * b[k];
  return ab / (oracle::euclid_norm(a) * oracle::euclid_norm(b));
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Plain Spearman: Pearson on ranks, no ties expected.
double rank_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (rx[k] - mean) * (ry[k] - mean);
    sxx += (rx[k] - mean) * (rx[k] - mean);
    syy += (ry[k] - mean) * (ry[k] - mean);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("generate: structure, ids and invariants of the default corpus") {
  const GeneratorParams params;
  const Corpus c = generate(params);
  REQUIRE(c.scenes().size() == 64);
  REQUIRE(c.parts().size() == 256);
  for (std::size_t s = 0; s < c.scenes().size(); ++s) {
    const Concept& scene = c.scenes()[s];
    CHECK(scene.id == s);
    CHECK(!scene.parent);
    CHECK(!scene.representativeness);
    CHECK(scene.latent.size() == 16);
    CHECK(oracle::euclid_norm(scene.latent) == doctest::Approx(params.scene_norm).epsilon(1e-12));
    CHECK(c.parts_of(s).size() == 4);
    for (std::size_t t = s + 1; t < c.scenes().size(); ++t) {
      CHECK(distance(scene.latent, c.scenes()[t].latent) >= params.min_separation);
    }
  }
  for (std::size_t k = 0; k < c.parts().size(); ++k) {
    const Concept& part = c.parts()[k];
    CHECK(part.id == 64 + k);
    CHECK(&c.concept_by_id(part.id) == &part);
    REQUIRE(part.parent);
    REQUIRE(part.representativeness);
    const double r = *part.representativeness;
    CHECK(r >= 0.2);
    CHECK(r <= 1.0);
    // Displacement magnitude is (1 - r) * spread.
    const auto& scene = c.scenes()[*part.parent].latent;
    CHECK(distance(part.latent, scene) == doctest::Approx((1.0 - r) * params.spread).epsilon(1e-9));
    const auto& siblings = c.parts_of(*part.parent);
    CHECK(std::find(siblings.begin(), siblings.end(), k) != siblings.end());
  }
  CHECK_THROWS_AS(c.concept_by_id(64 + 256), ContractError);
}

TEST_CASE("generate: same seed reproduces the corpus, other seeds differ") {
  GeneratorParams p;
  p.num_scenes = 16;
  const Corpus a = generate(p);
  const Corpus b = generate(p);
  CHECK(a == b);
  std::ostringstream sa, sb;
  write_corpus(a, sa);
  write_corpus(b, sb);
  CHECK(sa.str() == sb.str());
  p.seed = 8;
  CHECK(!(generate(p) == a));
}

TEST_CASE("generate: noise 0 and representativeness 1 give equal views") {
  GeneratorParams p;
  p.num_scenes = 8;
  p.noise_scale = 0.0;
  p.repr_min = 1.0;
  p.repr_max = 1.0;
  const Corpus c = generate(p);
  for (const Concept& part : c.parts()) {
    const Concept& scene = c.scenes()[*part.parent];
    CHECK(part.image_view == scene.image_view);
    CHECK(part.text_view == scene.text_view);
    CHECK(part.image_view == part.latent);
  }
}

TEST_CASE("generate: part-to-scene cosine rises with representativeness") {
  const Corpus c = generate(GeneratorParams{});
  std::vector<double> cos, repr;
  for (const Concept& part : c.parts()) {
    cos.push_back(cosine(part.image_view, c.scenes()[*part.parent].image_view));
    repr.push_back(*part.representativeness);
  }
  CHECK(rank_correlation(cos, repr) > 0.9);
}

TEST_CASE("generate: parameter validation and infeasible separation") {
  GeneratorParams p;
  p.num_scenes = 1;
  CHECK_THROWS_AS(generate(p), ContractError);
  p = GeneratorParams{};
  p.parts_per_scene = 0;
  CHECK_THROWS_AS(generate(p), ContractError);
  p = GeneratorParams{};
  p.noise_scale = -0.1;
  CHECK_THROWS_AS(generate(p), ContractError);
  p = GeneratorParams{};
  p.repr_min = 0.9;
  p.repr_max = 0.5;
  CHECK_THROWS_AS(generate(p), ContractError);
  // Two scenes on a sphere of radius 1 cannot be 3 apart.
  p = GeneratorParams{};
  p.num_scenes = 2;
  p.scene_norm = 1.0;
  p.min_separation = 3.0;
  CHECK_THROWS_AS(generate(p), ContractError);
}

TEST_CASE("corpus file: exact round trip and malformed input") {
  GeneratorParams p;
  p.num_scenes = 6;
  p.parts_per_scene = 3;
  p.latent_dim = 5;
  const Corpus c = generate(p);
  const auto path = std::filesystem::temp_directory_path() / "uncha_test_corpus.txt";
  save_corpus(c, path.string());
  const Corpus back = load_corpus(path.string());
  CHECK(back == c);
  std::filesystem::remove(path);

  std::ostringstream text;
  write_corpus(c, text);
  const std::string good = text.str();
  const auto read = [](const std::string& s) {
    std::istringstream in(s);
    return read_corpus(in);
  };
  CHECK(read(good) == c);
  CHECK_THROWS_AS(read(""), ConfigError);
  CHECK_THROWS_AS(read("not-a-corpus 1\n"), ConfigError);
  CHECK_THROWS_AS(read(good.substr(0, good.size() / 2)), ConfigError);
  std::string bad_version = good;
  bad_version.replace(bad_version.find("uncha-corpus 1"), 14, "uncha-corpus 9");
  CHECK_THROWS_AS(read(bad_version), ConfigError);
  std::string bad_number = good;
  const auto at = bad_number.find("concept 0 scene");
  bad_number.replace(bad_number.find("latent", at) + 7, 1, "x");
  CHECK_THROWS_AS(read(bad_number), ConfigError);
  // Field edits on the first part record (concept id 6).
  const auto part_line = good.find("concept 6 part ");
  const auto edited = [&](const std::string& replacement) {
    std::string s = good;
    const auto end = s.find(" latent", part_line);
    s.replace(part_line, end - part_line, replacement);
    return s;
  };
  CHECK_THROWS_AS(read(edited("concept 6 part 0 1.5")), ConfigError);
  CHECK_THROWS_AS(read(edited("concept 6 part 0 -0.1")), ConfigError);
  CHECK_THROWS_AS(read(edited("concept 6 part 99 0.5")), ConfigError);
  CHECK_THROWS_AS(read(edited("concept 6 blob 0 0.5")), ConfigError);
  CHECK(read(edited("concept 6 part 0 0.5")).parts()[0].representativeness == 0.5);
  std::string trailing = good;
  trailing.insert(good.find('\n', part_line), " 7");
  CHECK_THROWS_AS(read(trailing), ConfigError);
  CHECK_THROWS_AS(load_corpus("/nonexistent/dir/corpus.txt"), ConfigError);
}

TEST_CASE("sample_batch: distinct scenes, parts of their scene, permutation at B = S") {
  const Corpus c = generate(GeneratorParams{});
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const BatchIndices b = sample_batch(c, 32, rng);
    REQUIRE(b.scenes.size() == 32);
    REQUIRE(b.parts.size() == 32);
    CHECK(std::set<std::size_t>(b.scenes.begin(), b.scenes.end()).size() == 32);
    for (std::size_t i = 0; i < 32; ++i) CHECK(*c.parts()[b.parts[i]].parent == b.scenes[i]);
  }
  const BatchIndices all = sample_batch(c, 64, rng);
  std::vector<std::size_t> sorted = all.scenes;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expected(64);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(sorted == expected);
  CHECK_THROWS_AS(sample_batch(c, 65, rng), ContractError);
  CHECK_THROWS_AS(sample_batch(c, 0, rng), ContractError);
}

TEST_CASE("sample_batch: seeded streams reproduce, parts drawn uniformly") {
  const Corpus c = generate(GeneratorParams{});
  Rng a(11), b(11);
  for (int trial = 0; trial < 20; ++trial) {
    const BatchIndices x = sample_batch(c, 16, a);
    const BatchIndices y = sample_batch(c, 16, b);
    CHECK(x.scenes == y.scenes);
    CHECK(x.parts == y.parts);
  }
  Rng rng(13);
  std::map<std::size_t, int> count;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const BatchIndices x = sample_batch(c, 64, rng);
    for (std::size_t i = 0; i < 64; ++i) {
      if (x.scenes[i] == 5) ++count[x.parts[i]];
    }
  }
  REQUIRE(count.size() == 4);
  for (const auto& [part, n] : count) {
    CHECK(std::abs(static_cast<double>(n) / draws - 0.25) < 0.02);
  }
}
