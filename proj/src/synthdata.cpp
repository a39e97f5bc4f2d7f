#include "uncha/synthdata.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "uncha/error.hpp"
#include "uncha/scalar.hpp"

namespace uncha {

namespace {

constexpr std::size_t kMaxRejections = 10000;

std::vector<double> gaussian(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

std::vector<double> noisy(const std::vector<double>& latent, Rng& rng, double scale) {
  std::vector<double> v = latent;
  for (double& x : v) x += scale * rng.normal();
  return v;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_vector(std::ostream& out, const char* tag, const std::vector<double>& v) {
  out << ' ' << tag;
  for (double x : v) out << ' ' << fmt(x);
}

}  // namespace

void GeneratorParams::validate() const {
  require(num_scenes >= 2, "num_scenes must be >= 2");
  require(parts_per_scene >= 1, "parts_per_scene must be >= 1");
  require(latent_dim >= 1, "latent_dim must be >= 1");
  require(noise_scale >= 0.0 && std::isfinite(noise_scale), "noise_scale must be finite and >= 0");
  require(scene_norm > 0.0 && std::isfinite(scene_norm), "scene_norm must be finite and > 0");
  require(spread >= 0.0 && std::isfinite(spread), "spread must be finite and >= 0");
  require(min_separation >= 0.0, "min_separation must be >= 0");
  require(repr_min >= 0.0 && repr_min <= repr_max && repr_max <= 1.0,
          "representativeness range must satisfy 0 <= repr_min <= repr_max <= 1");
}

Corpus::Corpus(GeneratorParams params, std::vector<Concept> scenes, std::vector<Concept> parts)
    : params_(params), scenes_(std::move(scenes)), parts_(std::move(parts)) {
  parts_by_scene_.resize(scenes_.size());
  for (std::size_t k = 0; k < scenes_.size(); ++k) {
    require(scenes_[k].id == k && scenes_[k].level == Level::kScene && !scenes_[k].parent,
            "corpus: scenes must be numbered 0..S-1 without parents");
  }
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    const Concept& p = parts_[k];
    require(p.id == scenes_.size() + k && p.level == Level::kPart, "corpus: parts must follow the scenes");
    require(p.parent && *p.parent < scenes_.size(), "corpus: every part needs a scene parent");
    require(p.representativeness.has_value(), "corpus: part without representativeness");
    require(*p.representativeness >= 0.0 && *p.representativeness <= 1.0,
            "corpus: representativeness outside [0, 1]");
    parts_by_scene_[*p.parent].push_back(k);
  }
  for (const auto& group : parts_by_scene_) require(!group.empty(), "corpus: scene without parts");
  for (const auto* list : {&scenes_, &parts_}) {
    for (const Concept& c : *list) {
      require(c.latent.size() == params_.latent_dim && c.image_view.size() == params_.latent_dim &&
                  c.text_view.size() == params_.latent_dim,
              "corpus: vector length differs from latent_dim");
    }
  }
}

const Concept& Corpus::concept_by_id(std::size_t id) const {
  if (id < scenes_.size()) return scenes_[id];
  require(id - scenes_.size() < parts_.size(), "unknown concept id " + std::to_string(id));
  return parts_[id - scenes_.size()];
}

bool Corpus::operator==(const Corpus& other) const {
  auto same = [](const Concept& a, const Concept& b) {
    return a.id == b.id && a.parent == b.parent && a.level == b.level && a.latent == b.latent &&
           a.image_view == b.image_view && a.text_view == b.text_view &&
           a.representativeness == b.representativeness;
  };
  if (scenes_.size() != other.scenes_.size() || parts_.size() != other.parts_.size()) return false;
  for (std::size_t k = 0; k < scenes_.size(); ++k) {
    if (!same(scenes_[k], other.scenes_[k])) return false;
  }
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    if (!same(parts_[k], other.parts_[k])) return false;
  }
  const GeneratorParams& a = params_;
  const GeneratorParams& b = other.params_;
  return a.num_scenes == b.num_scenes && a.parts_per_scene == b.parts_per_scene && a.latent_dim == b.latent_dim &&
         a.noise_scale == b.noise_scale && a.scene_norm == b.scene_norm && a.spread == b.spread && a.min_separation == b.min_separation &&
         a.repr_min == b.repr_min && a.repr_max == b.repr_max && a.seed == b.seed;
}

Corpus generate(const GeneratorParams& params) {
  params.validate();
  Rng rng(params.seed);
  const std::size_t n = params.latent_dim;

  std::vector<Concept> scenes;
  std::size_t rejections = 0;
  while (scenes.size() < params.num_scenes) {
    std::vector<double> z = gaussian(rng, n, 1.0);
    const double z_norm = std::sqrt(dot(z, z));
    for (double& x : z) x *= params.scene_norm / z_norm;
    bool ok = true;
    for (const Concept& s : scenes) {
      if (distance(s.latent, z) < params.min_separation) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      if (++rejections > kMaxRejections) {
        throw ContractError("generate: scene separation infeasible (more than 10000 rejections)");
      }
      continue;
    }
    Concept c;
    c.id = scenes.size();
    c.level = Level::kScene;
    c.latent = std::move(z);
    scenes.push_back(std::move(c));
  }

  // Part displacement points toward the shared centre, perturbed by an
  // isotropic unit-scale direction so parts of one scene do not collapse.
  std::vector<Concept> parts;
  for (const Concept& s : scenes) {
    const double s_norm = std::sqrt(dot(s.latent, s.latent));
    for (std::size_t j = 0; j < params.parts_per_scene; ++j) {
      const double r = rng.uniform(params.repr_min, params.repr_max);
      std::vector<double> dir = gaussian(rng, n, 1.0 / std::sqrt(static_cast<double>(n)));
      if (s_norm > 0.0) {
        for (std::size_t k = 0; k < n; ++k) dir[k] -= s.latent[k] / s_norm;
      }
      const double d_norm = std::sqrt(dot(dir, dir));
      const double magnitude = (1.0 - r) * params.spread;
      Concept p;
      p.id = params.num_scenes + parts.size();
      p.parent = s.id;
      p.level = Level::kPart;
      p.representativeness = r;
      p.latent = s.latent;
      if (d_norm > 0.0) {
        for (std::size_t k = 0; k < n; ++k) p.latent[k] += magnitude * dir[k] / d_norm;
      }
      parts.push_back(std::move(p));
    }
  }

  for (auto* list : {&scenes, &parts}) {
    for (Concept& c : *list) {
      c.image_view = noisy(c.latent, rng, params.noise_scale);
      c.text_view = noisy(c.latent, rng, params.noise_scale);
    }
  }
  return Corpus(params, std::move(scenes), std::move(parts));
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  const GeneratorParams& p = corpus.params();
  out << "uncha-corpus 1\n";
  out << "num_scenes " << p.num_scenes << '\n';
  out << "parts_per_scene " << p.parts_per_scene << '\n';
  out << "latent_dim " << p.latent_dim << '\n';
  out << "noise_scale " << fmt(p.noise_scale) << '\n';
  out << "scene_norm " << fmt(p.scene_norm) << '\n';
  out << "spread " << fmt(p.spread) << '\n';
  out << "min_separation " << fmt(p.min_separation) << '\n';
  out << "repr_min " << fmt(p.repr_min) << '\n';
  out << "repr_max " << fmt(p.repr_max) << '\n';
  out << "seed " << p.seed << '\n';
  for (const auto* list : {&corpus.scenes(), &corpus.parts()}) {
    for (const Concept& c : *list) {
      out << "concept " << c.id << ' ' << (c.level == Level::kScene ? "scene" : "part") << ' ';
      if (c.parent) {
        out << *c.parent;
      } else {
        out << '-';
      }
      out << ' ' << (c.representativeness ? fmt(*c.representativeness) : std::string("-"));
      write_vector(out, "latent", c.latent);
      write_vector(out, "image", c.image_view);
      write_vector(out, "text", c.text_view);
      out << '\n';
    }
  }
  out << "end\n";
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next() {
    std::string line;
    if (!std::getline(in_, line)) throw ConfigError("corpus: unexpected end of file after line " + std::to_string(no_));
    ++no_;
    return std::istringstream(line);
  }

  std::size_t line_no() const { return no_; }

 private:
  std::istream& in_;
  std::size_t no_ = 0;
};

template <class V>
V header_field(LineReader& r, const std::string& key) {
  std::istringstream line = r.next();
  std::string k;
  V v{};
  if (!(line >> k >> v) || k != key) {
    throw ConfigError("corpus: expected '" + key + "' at line " + std::to_string(r.line_no()));
  }
  return v;
}

double parse_double(const std::string& token, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used == token.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("corpus: bad number '" + token + "' at line " + std::to_string(line));
}

std::vector<double> read_vector(std::istringstream& line, const std::string& tag, std::size_t n, std::size_t no) {
  std::string t;
  if (!(line >> t) || t != tag) throw ConfigError("corpus: expected '" + tag + "' at line " + std::to_string(no));
  std::vector<double> v(n);
  for (double& x : v) {
    if (!(line >> t)) throw ConfigError("corpus: short '" + tag + "' vector at line " + std::to_string(no));
    x = parse_double(t, no);
  }
  return v;
}

}  // namespace

Corpus read_corpus(std::istream& in) {
  LineReader r(in);
  {
    std::istringstream line = r.next();
    std::string magic;
    int version = 0;
    if (!(line >> magic >> version) || magic != "uncha-corpus") throw ConfigError("corpus: missing 'uncha-corpus' header");
    if (version != 1) throw ConfigError("corpus: unsupported format version " + std::to_string(version));
  }
  GeneratorParams p;
  p.num_scenes = header_field<std::size_t>(r, "num_scenes");
  p.parts_per_scene = header_field<std::size_t>(r, "parts_per_scene");
  p.latent_dim = header_field<std::size_t>(r, "latent_dim");
  p.noise_scale = header_field<double>(r, "noise_scale");
  p.scene_norm = header_field<double>(r, "scene_norm");
  p.spread = header_field<double>(r, "spread");
  p.min_separation = header_field<double>(r, "min_separation");
  p.repr_min = header_field<double>(r, "repr_min");
  p.repr_max = header_field<double>(r, "repr_max");
  p.seed = header_field<std::uint64_t>(r, "seed");
  try {
    p.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("corpus header: ") + e.what());
  }

  std::vector<Concept> scenes;
  std::vector<Concept> parts;
  const std::size_t total = p.num_scenes * (1 + p.parts_per_scene);
  for (std::size_t k = 0; k < total; ++k) {
    std::istringstream line = r.next();
    const std::size_t no = r.line_no();
    std::string tag, level, parent, repr;
    Concept c;
    if (!(line >> tag >> c.id >> level >> parent >> repr) || tag != "concept") {
      throw ConfigError("corpus: malformed concept record at line " + std::to_string(no));
    }
    if (level == "scene") {
      c.level = Level::kScene;
    } else if (level == "part") {
      c.level = Level::kPart;
    } else {
      throw ConfigError("corpus: unknown level '" + level + "' at line " + std::to_string(no));
    }
    if (parent != "-") c.parent = static_cast<std::size_t>(parse_double(parent, no));
    if (repr != "-") c.representativeness = parse_double(repr, no);
    c.latent = read_vector(line, "latent", p.latent_dim, no);
    c.image_view = read_vector(line, "image", p.latent_dim, no);
    c.text_view = read_vector(line, "text", p.latent_dim, no);
    std::string extra;
    if (line >> extra) throw ConfigError("corpus: trailing data at line " + std::to_string(no));
    (c.level == Level::kScene ? scenes : parts).push_back(std::move(c));
  }
  {
    std::istringstream line = r.next();
    std::string tag;
    if (!(line >> tag) || tag != "end") throw ConfigError("corpus: missing 'end' marker");
  }
  try {
    return Corpus(p, std::move(scenes), std::move(parts));
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_corpus(corpus, out);
  if (!out) throw ConfigError("write failed: " + path);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open corpus '" + path + "'");
  return read_corpus(in);
}

BatchIndices sample_batch(const Corpus& corpus, std::size_t b, Rng& stream) {
  const std::size_t s = corpus.scenes().size();
  require(b >= 1, "sample_batch: batch size must be >= 1");
  require(b <= s, "sample_batch: batch size " + std::to_string(b) + " exceeds scene count " + std::to_string(s));
  // Partial Fisher-Yates over scene indices.
  std::vector<std::size_t> order(s);
  for (std::size_t k = 0; k < s; ++k) order[k] = k;
  BatchIndices out;
  out.scenes.reserve(b);
  out.parts.reserve(b);
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(stream.below(s - k));
    std::swap(order[k], order[j]);
    const auto& group = corpus.parts_of(order[k]);
    out.scenes.push_back(order[k]);
    out.parts.push_back(group[static_cast<std::size_t>(stream.below(group.size()))]);
  }
  return out;
}

}  // namespace uncha
