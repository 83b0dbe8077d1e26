// qbranch command-line front end. Talks to the library exclusively through
// the C API in qbranch/qbranch.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qbranch/qbranch.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int exit_code(qb_status status) {
  switch (status) {
    case QB_OK: return kExitOk;
    case QB_ERR_CONFIG: return kExitConfig;
    case QB_ERR_INVALID_ARGUMENT: return kExitConfig;
    case QB_ERR_NUMERIC: return kExitNumeric;
    case QB_ERR_IO: return kExitIo;
  }
  return kExitNumeric;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) return std::nullopt;
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  if (!stream && !stream.eof()) return std::nullopt;
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qbranch: branch decompositions, real-state trajectories and "
               "horizon-sweep diagnostics for closed bipartite quantum systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qb_version()));

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool quiet = false;

  CLI::App* run_cmd = app.add_subcommand("run", "execute a run configuration");
  run_cmd->add_option("config", config_path, "path to a JSON run configuration")
      ->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides the config)");
  run_cmd->add_option("--seed", seed, "sampling seed (overrides the config)")
      ->trigger_on_parse()
      ->each([&](const std::string&) { seed_given = true; });
  run_cmd->add_flag("--quiet", quiet, "suppress progress output");

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "parse and validate a configuration only");
  validate_cmd->add_option("config", config_path, "path to a JSON run configuration")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  const auto config_text = read_file(config_path);
  if (!config_text) {
    std::cerr << "error: cannot read config file '" << config_path << "'\n";
    return kExitIo;
  }

  if (validate_cmd->parsed()) {
    const qb_status status = qb_validate_config(config_text->c_str());
    if (status != QB_OK) {
      std::cerr << "error: " << qb_last_error() << "\n";
      return exit_code(status);
    }
    std::cout << "ok: " << config_path << "\n";
    return kExitOk;
  }

  char* summary = nullptr;
  const qb_status status =
      qb_run_config(config_text->c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                    seed_given ? &seed : nullptr, &summary);
  if (status != QB_OK) {
    std::cerr << "error: " << qb_last_error() << "\n";
    return exit_code(status);
  }
  if (!quiet && summary) std::cout << summary;
  qb_string_free(summary);
  return kExitOk;
}
