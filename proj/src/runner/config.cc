#include "advsp/runner/config.h"

#include <set>

#include "advsp/common/files.h"

namespace advsp::runner {

using nlohmann::json;
namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ConfigError("config: dataset is required");
  if (schema.empty()) throw ConfigError("config: schema is required");
  if (output_dir.empty()) throw ConfigError("config: output_dir is required");
  if (sql_timeout_ms <= 0) throw ConfigError("config: sql_timeout_ms must be > 0");
  if (max_in_flight == 0) throw ConfigError("config: max_in_flight must be >= 1");
  if (candidates_per_example < 1) {
    throw ConfigError("config: candidates_per_example must be >= 1");
  }
  gateway.validate();
  prompt.validate();
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal();
}

template <typename E, typename Parse>
std::vector<E> enum_list(const json& j, const char* key, Parse parse) {
  std::vector<E> out;
  std::set<E> seen;
  for (const auto& v : j.at(key)) {
    const auto e = parse(v.get<std::string>());
    if (!e) throw ConfigError(std::string("config: unknown ") + key + " entry '" +
                              v.get<std::string>() + "'");
    if (seen.insert(*e).second) out.push_back(*e);
  }
  return out;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    const fs::path base = fs::absolute(base_dir);
    cfg.dataset = resolve(base, j.at("dataset").get<std::string>());
    cfg.dataset_name = j.value("dataset_name", cfg.dataset.stem().string());
    cfg.schema = resolve(base, j.at("schema").get<std::string>());
    cfg.eval_sets_dir = resolve(base, j.value("eval_sets_dir", ""));
    cfg.adv_demos_dir = resolve(base, j.value("adv_demos_dir", ""));
    cfg.output_dir = resolve(base, j.value("output_dir", "runs"));
    if (j.contains("gateway")) cfg.gateway = llm::gateway_config_from_json(j["gateway"]);
    if (!cfg.gateway.cache_dir.empty()) {
      cfg.gateway.cache_dir = resolve(base, cfg.gateway.cache_dir.string());
    }
    if (j.contains("prompt")) cfg.prompt = prompt::prompt_config_from_json(j["prompt"]);
    if (j.contains("shots")) cfg.shots = j["shots"].get<std::vector<size_t>>();
    if (j.contains("rq3_shots")) cfg.rq3_shots = j["rq3_shots"].get<std::vector<size_t>>();
    cfg.rq4_shots = j.value("rq4_shots", cfg.rq4_shots);
    if (j.contains("strategies")) {
      cfg.strategies = enum_list<sampler::Strategy>(j, "strategies", sampler::parse_strategy);
    }
    if (j.contains("kinds")) cfg.kinds = enum_list<perturb::Kind>(j, "kinds", perturb::parse_kind);
    cfg.adv_kinds = cfg.kinds;
    if (j.contains("adv_kinds")) {
      cfg.adv_kinds = enum_list<perturb::Kind>(j, "adv_kinds", perturb::parse_kind);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.sql_timeout_ms = j.value("sql_timeout_ms", cfg.sql_timeout_ms);
    cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
    cfg.candidates_per_example = j.value("candidates_per_example", cfg.candidates_per_example);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = files::read_json(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

json to_json(const ExperimentConfig& cfg) {
  json strategies = json::array(), kinds = json::array(), adv = json::array();
  for (auto s : cfg.strategies) strategies.push_back(sampler::to_string(s));
  for (auto k : cfg.kinds) kinds.push_back(perturb::to_string(k));
  for (auto k : cfg.adv_kinds) adv.push_back(perturb::to_string(k));
  return {{"dataset", cfg.dataset.string()},
          {"dataset_name", cfg.dataset_name},
          {"schema", cfg.schema.string()},
          {"eval_sets_dir", cfg.eval_sets_dir.string()},
          {"adv_demos_dir", cfg.adv_demos_dir.string()},
          {"gateway", llm::to_json(cfg.gateway)},
          {"prompt", prompt::to_json(cfg.prompt)},
          {"shots", cfg.shots},
          {"rq3_shots", cfg.rq3_shots},
          {"rq4_shots", cfg.rq4_shots},
          {"strategies", strategies},
          {"kinds", kinds},
          {"adv_kinds", adv},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir.string()},
          {"sql_timeout_ms", cfg.sql_timeout_ms},
          {"max_in_flight", cfg.max_in_flight},
          {"candidates_per_example", cfg.candidates_per_example}};
}

}  // namespace advsp::runner
