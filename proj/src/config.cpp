#include "uncha/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "uncha/error.hpp"

namespace uncha {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects a finite real, got '" + v + "'");
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

struct Field {
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto count = [&](const char* key, auto member) {
      t[key] = {[member, key](TrainConfig& c, const std::string& v) {
                  std::invoke(member, c) = static_cast<std::remove_reference_t<decltype(std::invoke(member, c))>>(
                      parse_count(key, v));
                },
                [member](const TrainConfig& c) { return std::to_string(std::invoke(member, c)); }};
    };
    auto real = [&](const char* key, auto get_ref) {
      t[key] = {[get_ref, key](TrainConfig& c, const std::string& v) { get_ref(c) = parse_real(key, v); },
                [get_ref](const TrainConfig& c) { return fmt(get_ref(const_cast<TrainConfig&>(c))); }};
    };
    count("steps", &TrainConfig::steps);
    count("batch_size", &TrainConfig::batch_size);
    count("warmup", &TrainConfig::warmup);
    count("eval_interval", &TrainConfig::eval_interval);
    count("checkpoint_interval", &TrainConfig::checkpoint_interval);
    count("seed", &TrainConfig::seed);
    count("embed_dim", &TrainConfig::embed_dim);
    real("lr", [](TrainConfig& c) -> double& { return c.lr; });
    real("weight_decay", [](TrainConfig& c) -> double& { return c.weight_decay; });
    real("beta1", [](TrainConfig& c) -> double& { return c.beta1; });
    real("beta2", [](TrainConfig& c) -> double& { return c.beta2; });
    real("adam_eps", [](TrainConfig& c) -> double& { return c.adam_eps; });
    real("init_scale", [](TrainConfig& c) -> double& { return c.init_scale; });
    real("tau_g", [](TrainConfig& c) -> double& { return c.loss.temps.global; });
    real("tau_l", [](TrainConfig& c) -> double& { return c.loss.temps.local; });
    real("tau_gl", [](TrainConfig& c) -> double& { return c.loss.temps.global_local; });
    real("cone_k", [](TrainConfig& c) -> double& { return c.loss.cone.aperture_k; });
    real("eta_inter", [](TrainConfig& c) -> double& { return c.loss.cone.eta_inter; });
    real("eta_intra", [](TrainConfig& c) -> double& { return c.loss.cone.eta_intra; });
    real("alpha", [](TrainConfig& c) -> double& { return c.loss.alpha; });
    real("lambda1", [](TrainConfig& c) -> double& { return c.loss.lambda1; });
    real("lambda2", [](TrainConfig& c) -> double& { return c.loss.lambda2; });
    real("lambda_ent", [](TrainConfig& c) -> double& { return c.loss.lambda_ent; });
    real("entropy_sign", [](TrainConfig& c) -> double& { return c.loss.entropy_sign; });
    t["include_positive"] = {
        [](TrainConfig& c, const std::string& v) { c.loss.include_positive = parse_bool("include_positive", v); },
        [](const TrainConfig& c) { return std::string(c.loss.include_positive ? "true" : "false"); }};
    t["uncertainty"] = {[](TrainConfig& c, const std::string& v) {
                          if (v == "norm") {
                            c.loss.uncertainty_source = UncertaintySource::kNorm;
                          } else if (v == "radius") {
                            c.loss.uncertainty_source = UncertaintySource::kRadius;
                          } else {
                            throw ConfigError("config: 'uncertainty' expects norm or radius, got '" + v + "'");
                          }
                        },
                        [](const TrainConfig& c) {
                          return std::string(c.loss.uncertainty_source == UncertaintySource::kNorm ? "norm"
                                                                                                 : "radius");
                        }};
    t["embedding"] = {[](TrainConfig& c, const std::string& v) {
                        if (v == "encoder") {
                          c.embedding = EmbeddingMode::kEncoder;
                        } else if (v == "table") {
                          c.embedding = EmbeddingMode::kTable;
                        } else {
                          throw ConfigError("config: 'embedding' expects encoder or table, got '" + v + "'");
                        }
                      },
                      [](const TrainConfig& c) { return std::string(to_string(c.embedding)); }};
    t["decay_exclude"] = {[](TrainConfig& c, const std::string& v) {
                            c.decay_exclude.clear();
                            std::istringstream in(v);
                            std::string name;
                            while (std::getline(in, name, ',')) {
                              name = trim(name);
                              if (!name.empty()) c.decay_exclude.push_back(name);
                            }
                          },
                          [](const TrainConfig& c) {
                            std::string s;
                            for (const auto& n : c.decay_exclude) s += (s.empty() ? "" : ",") + n;
                            return s;
                          }};
    return t;
  }();
  return table;
}

}  // namespace

const char* to_string(EmbeddingMode mode) { return mode == EmbeddingMode::kEncoder ? "encoder" : "table"; }

void TrainConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  check(batch_size >= 2, "batch_size must be >= 2");
  check(lr >= 0.0, "lr must be >= 0");
  check(weight_decay >= 0.0, "weight_decay must be >= 0");
  check(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  check(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  check(adam_eps > 0.0, "adam_eps must be > 0");
  check(eval_interval >= 1, "eval_interval must be >= 1");
  check(embed_dim >= 1, "embed_dim must be >= 1");
  check(init_scale >= 0.0, "init_scale must be >= 0");
  try {
    loss.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  const auto& t = fields();
  const auto it = t.find(key);
  if (it == t.end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second.set(cfg, trim(value));
}

void apply_config_text(TrainConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(no) + " is not 'key = value'");
    set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void apply_config_file(TrainConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

std::string dump_config(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const TrainConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(dump_config(cfg))));
  return buf;
}

}  // namespace uncha
