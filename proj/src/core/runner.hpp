#ifndef FLOQEP_CORE_RUNNER_HPP
#define FLOQEP_CORE_RUNNER_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core/config.hpp"
#include "core/table.hpp"

namespace floqep {

struct RunResult {
  std::vector<std::pair<std::string, ResultTable>> tables;
  std::vector<std::pair<std::string, std::string>> documents;
  bool certification_failed = false;
};

/// Deterministic under fixed config+seed; worker count never changes results.
RunResult run_experiment(const ExperimentConfig& cfg, int workers = 1);

/// Writes <prefix>.<name>.csv / .txt under out_dir (created if needed).
std::vector<std::string> write_results(const RunResult& r, const ExperimentConfig& cfg,
                                       const std::string& out_dir);

/// Index-parallel map with deterministic result placement.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace floqep

#endif
