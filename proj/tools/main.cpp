// floqep command-line front end. Talks to the library exclusively through
// the public C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "floqep.h"

namespace {

int exit_code_of(floqep_status st) {
  switch (st) {
    case FLOQEP_OK:
      return 0;
    case FLOQEP_ERR_CONFIG:
    case FLOQEP_ERR_INVALID_ARGUMENT:
      return 2;
    case FLOQEP_ERR_CERTIFICATION:
      return 4;
    default:
      return 3;  // numerical / io
  }
}

struct CommonArgs {
  std::string config;
  std::string out = "out";
  int workers = 1;
  std::int64_t seed = -1;
  std::vector<std::string> tol;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "experiment config file (JSON)")->required();
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--workers", a.workers, "worker threads for sweeps");
  cmd->add_option("--seed", a.seed, "override the config seed (>= 0)");
  cmd->add_option("--tol", a.tol, "tolerance override key=value (repeatable)");
}

int run(const CommonArgs& a, const char* kind) {
  std::string tols;
  for (const auto& t : a.tol) {
    if (!tols.empty()) tols += ",";
    tols += t;
  }
  const floqep_status st = floqep_run_experiment(a.config.c_str(), a.out.c_str(), a.workers,
                                                 a.seed, tols.empty() ? nullptr : tols.c_str());
  if (st != FLOQEP_OK)
    std::fprintf(stderr, "floqep %s: %s\n", kind, floqep_last_error());
  else
    std::printf("floqep %s: results written to %s\n", kind, a.out.c_str());
  return exit_code_of(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subwavelength spectra, Floquet quasi-frequencies and asymptotic exceptional "
               "points of time-modulated elastic lattices"};
  app.set_version_flag("--version", std::string(floqep_version()));
  app.require_subcommand(1);

  const char* kinds[] = {"static-spectrum", "band",       "floquet",       "ep-construct",
                         "ep-verify",       "appendix2d", "green-validate"};
  std::vector<CommonArgs> args(std::size(kinds));
  for (std::size_t k = 0; k < std::size(kinds); ++k) {
    CLI::App* sub = app.add_subcommand(kinds[k]);
    add_common(sub, args[k]);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t k = 0; k < std::size(kinds); ++k)
    if (app.got_subcommand(kinds[k])) return run(args[k], kinds[k]);
  return 2;
}
