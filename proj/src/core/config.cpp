#include "core/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace floqep {

namespace {

const std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::static_spectrum, "static-spectrum"},
    {ExperimentKind::band, "band"},
    {ExperimentKind::floquet, "floquet"},
    {ExperimentKind::ep_construct, "ep-construct"},
    {ExperimentKind::ep_verify, "ep-verify"},
    {ExperimentKind::appendix2d, "appendix2d"},
    {ExperimentKind::green_validate, "green-validate"},
};

}  // namespace

const char* to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "?";
}

std::vector<std::string> experiment_kind_names() {
  std::vector<std::string> v;
  for (const auto& [kind, name] : kKinds) v.emplace_back(name);
  return v;
}

ExperimentKind experiment_kind_from(const std::string& s) {
  for (const auto& [kind, name] : kKinds)
    if (s == name) return kind;
  std::ostringstream os;
  os << "unknown experiment kind '" << s << "'; valid kinds:";
  for (const auto& [kind, name] : kKinds) os << " " << name;
  fail(Errc::config, os.str());
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::config, std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::config, "config must be a JSON object");
  if (!j.contains("experiment") || !j["experiment"].is_string())
    fail(Errc::config, "config: missing string key 'experiment'");

  ExperimentConfig cfg;
  cfg.kind = experiment_kind_from(j["experiment"].get<std::string>());
  if (!j.contains("seed")) j["seed"] = 1;
  if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
    fail(Errc::config, "config: 'seed' must be an integer");
  cfg.seed = j["seed"].get<std::uint64_t>();
  if (!j.contains("output")) j["output"] = nlohmann::json::object();
  if (!j["output"].contains("prefix")) j["output"]["prefix"] = to_string(cfg.kind);
  cfg.output_prefix = j["output"]["prefix"].get<std::string>();

  // capacitance source: exactly one, and referenced files must exist
  const bool needs_cap = cfg.kind == ExperimentKind::static_spectrum ||
                         cfg.kind == ExperimentKind::band || cfg.kind == ExperimentKind::floquet;
  if (needs_cap) {
    if (!j.contains("capacitance")) fail(Errc::config, "config: missing 'capacitance' section");
    const auto& cap = j["capacitance"];
    const bool c2d = cap.contains("computed2d");
    const bool f3d = cap.contains("file");
    if (c2d == f3d)
      fail(Errc::config,
           "config: 'capacitance' must name exactly one source ('computed2d' or 'file')");
    if (f3d) {
      const std::string path = cap["file"].get<std::string>();
      if (!std::filesystem::exists(path))
        fail(Errc::config, "config: capacitance file does not exist: " + path);
    }
    if (c2d) {
      if (!cap["computed2d"].contains("disks") || cap["computed2d"]["disks"].empty())
        fail(Errc::config, "config: computed2d needs a nonempty 'disks' list");
      if (!j.contains("lattice")) fail(Errc::config, "config: computed2d needs a 'lattice'");
      if (!j.contains("medium")) fail(Errc::config, "config: computed2d needs a 'medium'");
      if (!j.contains("alpha")) fail(Errc::config, "config: computed2d needs 'alpha'");
    }
    if (!j.contains("contrast") || !j["contrast"].contains("epsilon"))
      fail(Errc::config, "config: missing 'contrast.epsilon'");
  }
  if (cfg.kind == ExperimentKind::band) {
    if (!j.contains("band") || !j["band"].contains("path") || j["band"]["path"].size() < 2)
      fail(Errc::config, "config: band experiment needs 'band.path' with at least two vertices");
    if (j["band"].value("samples", 0) < 2)
      fail(Errc::config, "config: 'band.samples' must be at least 2");
  }
  if (cfg.kind == ExperimentKind::floquet) {
    if (!j.contains("modulation")) fail(Errc::config, "config: floquet needs 'modulation'");
    if (!j.contains("sweep")) fail(Errc::config, "config: floquet needs 'sweep'");
    if (j["sweep"].value("samples", 0) < 1)
      fail(Errc::config, "config: 'sweep.samples' must be positive");
  }
  if (cfg.kind == ExperimentKind::ep_construct) {
    if (!j.contains("ep")) fail(Errc::config, "config: ep-construct needs an 'ep' section");
    const int c = j["ep"].value("case", 0);
    if (c != 1 && c != 2) fail(Errc::config, "config: 'ep.case' must be 1 or 2");
  }
  if (cfg.kind == ExperimentKind::ep_verify) {
    if (!j.contains("ep") || !j["ep"].contains("params"))
      fail(Errc::config, "config: ep-verify needs 'ep.params'");
    if (!j["ep"].contains("omega") || !j["ep"].contains("n"))
      fail(Errc::config, "config: ep-verify needs 'ep.omega' and 'ep.n'");
  }
  if (cfg.kind == ExperimentKind::appendix2d) {
    if (!j.contains("appendix2d") || j["appendix2d"].value("draws", 0) < 1)
      fail(Errc::config, "config: appendix2d needs a positive 'appendix2d.draws'");
  }
  if (cfg.kind == ExperimentKind::green_validate) {
    if (!j.contains("green")) fail(Errc::config, "config: green-validate needs a 'green' section");
    if (!j.contains("lattice") || !j.contains("medium") || !j.contains("alpha"))
      fail(Errc::config, "config: green-validate needs 'lattice', 'medium' and 'alpha'");
  }

  cfg.raw = std::move(j);
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Errc::io, "cannot open config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::serialize() const { return raw.dump(2) + "\n"; }

std::string ExperimentConfig::hash() const {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(raw.dump())));
  return buf;
}

const nlohmann::json& ExperimentConfig::section(const char* name) const {
  if (!raw.contains(name)) fail(Errc::config, std::string("config: missing section '") + name + "'");
  return raw.at(name);
}

}  // namespace floqep
