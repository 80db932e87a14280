#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "domp/domp.h"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct ConfigDeleter {
  void operator()(domp_config* c) const { domp_config_free(c); }
};
using ConfigHandle = std::unique_ptr<domp_config, ConfigDeleter>;

int exit_code(domp_status st) {
  switch (st) {
    case DOMP_OK: return 0;
    case DOMP_ERR_CONFIG:
    case DOMP_ERR_INVALID_ARGUMENT: return kExitConfig;
    default: return kExitRuntime;
  }
}

int fail(domp_status st) {
  std::cerr << "error: " << domp_last_error() << '\n';
  return exit_code(st);
}

// Prints and frees a string produced by the library.
void emit(char* text) {
  if (!text) return;
  std::fputs(text, stdout);
  domp_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed orthogonal matching pursuit: simulation, sweeps and theory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(domp_version()));

  std::string config_path;
  std::string algo;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::uint32_t machine = 0;
  bool quiet = false;

  auto* simulate = app.add_subcommand("simulate", "One protocol run; prints estimate, bits and rounds");
  simulate->add_option("--config", config_path, "JSON config file")->required();
  simulate->add_option("--algo", algo, "single | centralized | ds:L | dj | djf[:P] | dc")->required();
  simulate->add_option("--seed", seed, "Master seed (overrides gen.master_seed)");

  auto* sweep = app.add_subcommand("sweep", "Success-rate sweep over the theta_min grid");
  sweep->add_option("--config", config_path, "JSON config file")->required();
  sweep->add_option("--out", out_path, "CSV output path")->required();
  sweep->add_option("--seed", seed, "Master seed (overrides gen.master_seed)");
  sweep->add_flag("--quiet", quiet, "No per-grid-point log on stderr");

  auto* theory = app.add_subcommand("theory", "Theorem hypotheses and machine counts");
  theory->add_option("--config", config_path, "JSON config file")->required();
  theory->add_option("--seed", seed, "Master seed (overrides gen.master_seed)");

  auto* datagen = app.add_subcommand("datagen", "Write one generated shard as a binary file");
  datagen->add_option("--config", config_path, "JSON config file")->required();
  datagen->add_option("--out", out_path, "Output file")->required();
  datagen->add_option("--seed", seed, "Master seed (overrides gen.master_seed)");
  datagen->add_option("--machine", machine, "Machine index (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  domp_config* raw = nullptr;
  if (const domp_status st = domp_config_load(config_path.c_str(), &raw); st != DOMP_OK) {
    return fail(st);
  }
  ConfigHandle cfg(raw);
  if (seed) {
    if (const domp_status st = domp_config_set_seed(cfg.get(), *seed); st != DOMP_OK) return fail(st);
  }

  char* text = nullptr;
  domp_status st = DOMP_OK;
  if (*simulate) {
    st = domp_simulate(cfg.get(), algo.c_str(), &text);
  } else if (*sweep) {
    domp_config_set_verbose(cfg.get(), quiet ? 0 : 1);
    st = domp_sweep(cfg.get(), out_path.c_str(), &text);
  } else if (*theory) {
    st = domp_theory(cfg.get(), &text);
  } else if (*datagen) {
    st = domp_datagen(cfg.get(), out_path.c_str(), machine);
  }
  if (st != DOMP_OK) return fail(st);
  emit(text);
  return 0;
}
