#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"

namespace frh::cli {

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_manifest(Context& ctx, const std::string& command) {
  nlohmann::json files = nlohmann::json::array();
  std::vector<std::string> names = ctx.files;
  std::sort(names.begin(), names.end());
  for (const auto& n : names) {
    const std::string bytes = slurp(ctx.out_dir / n);
    files.push_back({{"name", n}, {"bytes", bytes.size()}, {"fnv1a", fnv1a_hex(bytes)}});
  }
  const std::string canon = canonical_config(ctx.cfg);
  nlohmann::json m = {{"schema_version", kSchemaVersion},
                      {"command", command},
                      {"config_hash", fnv1a_hex(canon)},
                      {"config", nlohmann::json::parse(canon)},
                      {"failed_rows", ctx.failed_rows},
                      {"files", files}};
  const auto path = ctx.out_dir / "manifest.json";
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << m.dump(2) << '\n';
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Portfolio optimization in fractional and rough Heston models", "frheston"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::size_t> paths;
  std::optional<double> step;
  app.add_option("--config", config_path, "JSON scenario file");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--paths", paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
  app.add_option("--step", step, "time step h")->check(CLI::PositiveNumber);

  struct Cmd {
    const char* name;
    const char* help;
    void (*fn)(Context&);
  };
  const Cmd cmds[] = {
      {"simulate", "sample paths of Z, nu, S, W", cmd_simulate},
      {"quantize", "quantized kernel measures", cmd_quantize},
      {"value", "affine and Monte Carlo values", cmd_value},
      {"wealth", "optimal wealth paths and terminal statistics", cmd_wealth},
      {"longterm", "long-horizon volatility and stock quantiles", cmd_longterm},
      {"converge", "convergence across quantization levels", cmd_converge},
  };
  for (const auto& c : cmds) app.add_subcommand(c.name, c.help);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const Cmd* chosen = nullptr;
  for (const auto& c : cmds) {
    if (app.got_subcommand(c.name)) chosen = &c;
  }

  ScenarioConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out = *out_dir;
    if (threads) cfg.threads = *threads;
    if (paths) cfg.paths = *paths;
    if (step) cfg.h = *step;
    if (cfg.paths && *cfg.paths < 2) throw ArgumentError("--paths must be at least 2");
  } catch (const std::exception& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  Context ctx{cfg, std::filesystem::path(cfg.out), out, err, {}, 0};
  try {
    std::filesystem::create_directories(ctx.out_dir);
  } catch (const std::exception& e) {
    err << "cannot create output directory '" << cfg.out << "': " << e.what() << '\n';
    return kExitIo;
  }

  try {
    chosen->fn(ctx);
    write_manifest(ctx, chosen->name);
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  out << chosen->name << ": wrote " << ctx.files.size() << " file(s) to " << ctx.out_dir.string() << '\n';
  if (ctx.failed_rows > 0) {
    err << ctx.failed_rows << " row(s) failed\n";
    return kExitFailedRows;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace frh::cli
