#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "frheston/core.hpp"
#include "frheston/vol.hpp"

namespace frh::cli {

inline constexpr int kSchemaVersion = 1;

// Exit codes of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitFailedRows = 2;
inline constexpr int kExitIo = 3;

struct ScenarioConfig {
  ModelInputs model;
  double s0 = 100.0;
  std::optional<std::vector<double>> alphas;  // command defaults when absent
  std::optional<std::vector<double>> rhos;
  std::string scheme = "euler";  // "euler" or "quantized"
  PositivityMap positivity = PositivityMap::AbsoluteValue;
  double delta = 0.49;
  double h = 0.001;
  std::optional<double> horizon;  // overrides model.horizon
  std::optional<std::size_t> paths;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::size_t base_atoms = 16;
  std::vector<int> levels = {0, 1, 2};
  int scheme_level = 2;
  std::size_t sample_paths = 5;
  std::string preset = "fractional";  // simulate: "fractional" or "rough"
  std::string out = "out";
};

// Parses a JSON document; unknown keys and a missing or wrong schema_version throw ArgumentError.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

// Canonical JSON of the fields that determine outputs (threads and output directory excluded).
std::string canonical_config(const ScenarioConfig& c);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

// Runs one subcommand: simulate, quantize, value, wealth, longterm, converge.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace frh::cli
