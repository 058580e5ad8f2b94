#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "advsp/corpus/dataset.h"
#include "advsp/curate/curate.h"
#include "advsp/perturb/perturb.h"

namespace advsp::runner {

struct PerturbOutput {
  std::vector<perturb::PerturbedCandidate> candidates;
  std::vector<std::string> failures;  // "<example id>:<KIND> seed <s>: <message>"
};

// Candidates for every example of `split` under every kind. Candidate seeds
// for an (example, kind) pair derive from `seed`, the kind and the example id.
PerturbOutput perturb_split(const corpus::Dataset& dataset, corpus::Split split,
                            const std::vector<perturb::Kind>& kinds,
                            const perturb::Clients& clients, int n, uint64_t seed,
                            size_t max_in_flight);

// Groups candidates by (original, kind) and ranks each group. Output follows
// dataset order, then kind order of first appearance.
std::vector<curate::CandidateSet> rank_all(
    const corpus::Dataset& dataset,
    const std::vector<perturb::PerturbedCandidate>& candidates,
    llm::Embedder& embedder);

// Builds and writes <KIND>.jsonl into `out_dir` for each kind; returns the
// per-kind results including omissions.
std::map<perturb::Kind, curate::BuildResult> build_all(
    const corpus::Dataset& dataset, const std::vector<perturb::Kind>& kinds,
    const std::vector<curate::CandidateSet>& sets,
    const std::map<std::string, curate::AnnotationRecord>& annotations,
    curate::BuildPolicy policy, corpus::Split split,
    const std::filesystem::path& out_dir);

}  // namespace advsp::runner
