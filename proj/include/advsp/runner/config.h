#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "advsp/llm/gateway.h"
#include "advsp/perturb/perturb.h"
#include "advsp/prompt/prompt.h"
#include "advsp/sampler/sampler.h"
#include "json.hpp"

namespace advsp::runner {

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::string dataset_name;  // defaults to the dataset file stem
  std::filesystem::path schema;
  std::filesystem::path eval_sets_dir;  // <KIND>.jsonl robustness sets (test)
  std::filesystem::path adv_demos_dir;  // <KIND>.jsonl perturbed train demos
  llm::GatewayConfig gateway;
  prompt::PromptConfig prompt;
  std::vector<size_t> shots = {0, 5, 10, 20, 30, 40, 50};
  std::vector<size_t> rq3_shots = {10};
  size_t rq4_shots = 10;
  std::vector<sampler::Strategy> strategies = sampler::all_strategies();
  std::vector<perturb::Kind> kinds = perturb::all_kinds();
  std::vector<perturb::Kind> adv_kinds = perturb::all_kinds();
  uint64_t seed = 0;
  std::filesystem::path output_dir = "runs";
  int sql_timeout_ms = 5000;
  size_t max_in_flight = 4;
  int candidates_per_example = perturb::kDefaultCandidateCount;

  void validate() const;  // ConfigError
};

// Relative paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// Snapshot with absolute paths; config_from_json reads it back unchanged.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace advsp::runner
