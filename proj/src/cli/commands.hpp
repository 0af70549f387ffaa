#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "frheston/cli.hpp"

namespace frh::cli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  ScenarioConfig cfg;
  std::filesystem::path out_dir;
  std::ostream& log;
  std::ostream& diag;
  std::vector<std::string> files;
  int failed_rows = 0;

  // Writes out_dir/name through `body` and records it for the manifest.
  void write_file(const std::string& name, const std::function<void(std::ostream&)>& body);
  void fail_row(const std::string& what);
};

void cmd_simulate(Context& ctx);
void cmd_quantize(Context& ctx);
void cmd_value(Context& ctx);
void cmd_wealth(Context& ctx);
void cmd_longterm(Context& ctx);
void cmd_converge(Context& ctx);

}  // namespace frh::cli
