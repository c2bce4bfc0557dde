#ifndef FLOQEP_CORE_CONFIG_HPP
#define FLOQEP_CORE_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/common.hpp"

namespace floqep {

enum class ExperimentKind {
  static_spectrum,
  band,
  floquet,
  ep_construct,
  ep_verify,
  appendix2d,
  green_validate,
};

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from(const std::string& s);
std::vector<std::string> experiment_kind_names();

/// Validated experiment configuration. The canonical JSON form (sorted keys,
/// compact dump) defines the config hash.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::static_spectrum;
  std::uint64_t seed = 1;
  std::string output_prefix = "result";
  nlohmann::json raw;  // normalized document

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
  std::string serialize() const;   // pretty, stable ordering
  std::string hash() const;        // fnv1a64 of the compact dump, hex

  const nlohmann::json& section(const char* name) const;
  bool has(const char* name) const { return raw.contains(name); }
};

}  // namespace floqep

#endif
