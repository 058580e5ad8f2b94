#include "advsp/runner/pipeline.h"

#include "advsp/common/files.h"
#include "advsp/common/rng.h"

namespace advsp::runner {

PerturbOutput perturb_split(const corpus::Dataset& dataset, corpus::Split split,
                            const std::vector<perturb::Kind>& kinds,
                            const perturb::Clients& clients, int n, uint64_t seed,
                            size_t max_in_flight) {
  PerturbOutput out;
  for (const auto& ex : dataset.split(split)) {
    for (perturb::Kind kind : kinds) {
      const std::string tag = ex.id + ":" + std::string(perturb::to_string(kind));
      const uint64_t base = derive_seed(seed, "perturb:" + tag);
      try {
        auto batch = perturb::generate_candidates(ex, kind, clients, n, base, max_in_flight);
        for (auto& c : batch.candidates) out.candidates.push_back(std::move(c));
        for (const auto& f : batch.failures) {
          out.failures.push_back(tag + " seed " + std::to_string(f.seed) + ": " + f.message);
        }
      } catch (const perturb::PerturbError& e) {
        out.failures.push_back(tag + ": " + e.what());
      }
    }
  }
  return out;
}

std::vector<curate::CandidateSet> rank_all(
    const corpus::Dataset& dataset,
    const std::vector<perturb::PerturbedCandidate>& candidates,
    llm::Embedder& embedder) {
  std::map<std::string, std::vector<perturb::PerturbedCandidate>> groups;
  std::map<std::string, std::vector<std::string>> order_by_example;
  for (const auto& c : candidates) {
    const std::string id = curate::candidate_set_id(c.original_id, c.kind);
    auto [it, inserted] = groups.try_emplace(id);
    if (inserted) order_by_example[c.original_id].push_back(id);
    it->second.push_back(c);
  }
  std::vector<curate::CandidateSet> out;
  for (const auto& ex : dataset.examples()) {
    auto ids = order_by_example.find(ex.id);
    if (ids == order_by_example.end()) continue;
    for (const auto& id : ids->second) {
      out.push_back(curate::rank_candidates(ex, groups[id], embedder));
    }
    order_by_example.erase(ids);
  }
  if (!order_by_example.empty()) {
    throw curate::CurateError("candidates reference unknown example '" +
                              order_by_example.begin()->first + "'");
  }
  return out;
}

std::map<perturb::Kind, curate::BuildResult> build_all(
    const corpus::Dataset& dataset, const std::vector<perturb::Kind>& kinds,
    const std::vector<curate::CandidateSet>& sets,
    const std::map<std::string, curate::AnnotationRecord>& annotations,
    curate::BuildPolicy policy, corpus::Split split,
    const std::filesystem::path& out_dir) {
  std::map<std::string, curate::CandidateSet> by_id;
  for (const auto& s : sets) by_id.emplace(s.id, s);
  std::map<perturb::Kind, curate::BuildResult> out;
  for (perturb::Kind kind : kinds) {
    auto result = curate::build_eval_set(dataset, kind, by_id, annotations, policy, split);
    curate::write_eval_set(out_dir / (std::string(perturb::to_string(kind)) + ".jsonl"),
                           result.set);
    out.emplace(kind, std::move(result));
  }
  return out;
}

}  // namespace advsp::runner
