#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "advsp/runner/config.h"
#include "json.hpp"

namespace advsp::runner {

enum class Rq { k1 = 1, k2 = 2, k3 = 3, k4 = 4 };

std::string rq_name(Rq rq);  // "rq1" ...

struct RunResult {
  std::filesystem::path dir;  // <output_dir>/<rqN>
  std::string report_markdown;
  nlohmann::json manifest;
};

// RQ1: zero-shot accuracy on the standard and every perturbed set.
RunResult run_rq1(const ExperimentConfig& cfg);
// RQ2: random few-shot demos at each configured shot count.
RunResult run_rq2(const ExperimentConfig& cfg);
// RQ3: N standard demos augmented with N perturbed ones per kind, against
// N and 2N standard baselines.
RunResult run_rq3(const ExperimentConfig& cfg);
// RQ4: every sampling strategy at rq4_shots, plus lexical diversity of the
// selected utterances.
RunResult run_rq4(const ExperimentConfig& cfg);

RunResult run(Rq rq, const ExperimentConfig& cfg);

// Re-runs the experiment recorded in a manifest. With a warm gateway cache
// the record files come out byte-identical.
RunResult replay(const std::filesystem::path& manifest,
                 std::optional<std::filesystem::path> output_dir = std::nullopt);

}  // namespace advsp::runner
