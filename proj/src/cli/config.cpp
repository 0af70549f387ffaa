#include <fstream>
#include <set>
#include <sstream>

#include "frheston/cli.hpp"
#include "json.hpp"

namespace frh::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ArgumentError("config: '" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ArgumentError("config: unknown key '" + where + "." + it.key() + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ArgumentError("config: bad value for '" + where + "." + key + "': " + e.what());
  }
}

template <class T>
void read_opt(const json& obj, const char* key, std::optional<T>& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  T v{};
  read(obj, key, v, where);
  dst = v;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"schema_version", "model", "alphas", "rhos", "scheme", "positivity", "delta", "grid", "mc",
                  "quantization", "simulation", "output"},
                 "root");
  if (!doc.contains("schema_version")) throw ArgumentError("config: missing schema_version");
  int version = 0;
  read(doc, "schema_version", version, "root");
  if (version != kSchemaVersion) {
    throw ArgumentError("config: unsupported schema_version " + std::to_string(version));
  }

  ScenarioConfig c;
  if (doc.contains("model")) {
    const json& m = doc["model"];
    reject_unknown(m, {"r", "lambda", "kappa", "theta", "sigma", "rho", "gamma", "alpha", "v0", "z0", "w0", "horizon", "s0"},
                   "model");
    read(m, "r", c.model.r, "model");
    read(m, "lambda", c.model.lambda, "model");
    read(m, "kappa", c.model.kappa, "model");
    read(m, "theta", c.model.theta, "model");
    read(m, "sigma", c.model.sigma, "model");
    read(m, "rho", c.model.rho, "model");
    read(m, "gamma", c.model.gamma, "model");
    read(m, "alpha", c.model.alpha, "model");
    read(m, "v0", c.model.v0, "model");
    read(m, "z0", c.model.z0, "model");
    read(m, "w0", c.model.w0, "model");
    read(m, "horizon", c.model.horizon, "model");
    read(m, "s0", c.s0, "model");
  }
  read_opt(doc, "alphas", c.alphas, "root");
  read_opt(doc, "rhos", c.rhos, "root");
  read(doc, "scheme", c.scheme, "root");
  if (doc.contains("positivity")) {
    std::string s;
    read(doc, "positivity", s, "root");
    c.positivity = positivity_from_string(s);
  }
  read(doc, "delta", c.delta, "root");
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    reject_unknown(g, {"h", "horizon"}, "grid");
    read(g, "h", c.h, "grid");
    read_opt(g, "horizon", c.horizon, "grid");
  }
  if (doc.contains("mc")) {
    const json& m = doc["mc"];
    reject_unknown(m, {"paths", "seed", "threads"}, "mc");
    read_opt(m, "paths", c.paths, "mc");
    read(m, "seed", c.seed, "mc");
    read(m, "threads", c.threads, "mc");
  }
  if (doc.contains("quantization")) {
    const json& q = doc["quantization"];
    reject_unknown(q, {"base_atoms", "levels", "scheme_level"}, "quantization");
    read(q, "base_atoms", c.base_atoms, "quantization");
    read(q, "levels", c.levels, "quantization");
    read(q, "scheme_level", c.scheme_level, "quantization");
  }
  if (doc.contains("simulation")) {
    const json& s = doc["simulation"];
    reject_unknown(s, {"sample_paths", "preset"}, "simulation");
    read(s, "sample_paths", c.sample_paths, "simulation");
    read(s, "preset", c.preset, "simulation");
  }
  read(doc, "output", c.out, "root");

  if (c.scheme != "euler" && c.scheme != "quantized") throw ArgumentError("config: scheme must be 'euler' or 'quantized'");
  if (c.preset != "fractional" && c.preset != "rough") throw ArgumentError("config: preset must be 'fractional' or 'rough'");
  if (!(c.h > 0.0)) throw ArgumentError("config: grid.h must be positive");
  if (c.base_atoms < 2) throw ArgumentError("config: quantization.base_atoms must be at least 2");
  if (c.scheme_level < 0) throw ArgumentError("config: quantization.scheme_level must be nonnegative");
  for (int l : c.levels) {
    if (l < 0) throw ArgumentError("config: quantization.levels must be nonnegative");
  }
  // full model validation (Feller, ranges, regime)
  ModelParams{c.model};
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config(const ScenarioConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"r", c.model.r},         {"lambda", c.model.lambda}, {"kappa", c.model.kappa},
                {"theta", c.model.theta}, {"sigma", c.model.sigma},   {"rho", c.model.rho},
                {"gamma", c.model.gamma}, {"alpha", c.model.alpha},   {"v0", c.model.v0},
                {"z0", c.model.z0},       {"w0", c.model.w0},         {"horizon", c.model.horizon},
                {"s0", c.s0}};
  j["alphas"] = c.alphas ? json(*c.alphas) : json(nullptr);
  j["rhos"] = c.rhos ? json(*c.rhos) : json(nullptr);
  j["scheme"] = c.scheme;
  j["positivity"] = to_string(c.positivity);
  j["delta"] = c.delta;
  j["grid"] = {{"h", c.h}, {"horizon", c.horizon ? json(*c.horizon) : json(nullptr)}};
  j["mc"] = {{"paths", c.paths ? json(*c.paths) : json(nullptr)}, {"seed", c.seed}};
  j["quantization"] = {{"base_atoms", c.base_atoms}, {"levels", c.levels}, {"scheme_level", c.scheme_level}};
  j["simulation"] = {{"sample_paths", c.sample_paths}, {"preset", c.preset}};
  return j.dump();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace frh::cli
