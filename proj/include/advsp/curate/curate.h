#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "advsp/common/error.h"
#include "advsp/corpus/dataset.h"
#include "advsp/llm/types.h"
#include "advsp/perturb/perturb.h"
#include "json.hpp"

namespace advsp::curate {

inline constexpr size_t kMaxRanked = 10;

// Candidates for one (example, kind), best first.
struct CandidateSet {
  std::string id;
  corpus::Example original;
  perturb::Kind kind = perturb::Kind::kTB;
  std::vector<perturb::PerturbedCandidate> ranked;
};

class CurateError : public Error {
 public:
  using Error::Error;
};

// "<example id>:<KIND>"
std::string candidate_set_id(const std::string& example_id, perturb::Kind kind);

// Cosine of two vectors, clamped to [-1, 1]. Zero vectors throw.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Scores each candidate against the original utterance and keeps the best
// kMaxRanked; ties go to the lower seed.
CandidateSet rank_candidates(const corpus::Example& original,
                             const std::vector<perturb::PerturbedCandidate>& candidates,
                             llm::Embedder& embedder);

const perturb::PerturbedCandidate& auto_select(const CandidateSet& set);

nlohmann::json to_json(const CandidateSet& set);
CandidateSet candidate_set_from_json(const nlohmann::json& j);
void write_candidate_sets(const std::filesystem::path& path,
                          const std::vector<CandidateSet>& sets);
std::vector<CandidateSet> read_candidate_sets(const std::filesystem::path& path);

struct AnnotationRecord {
  std::string candidate_set_id;
  std::optional<size_t> choice;  // nullopt rejects every candidate
  std::string annotator;
  std::string timestamp;  // ISO-8601 UTC

  bool rejected() const { return !choice.has_value(); }
};

std::string utc_timestamp_now();

nlohmann::json to_json(const AnnotationRecord& r);
// Accepts {"decision": <index> | "reject"}.
AnnotationRecord annotation_from_json(const nlohmann::json& j);

class UnknownSetError : public CurateError {
 public:
  using CurateError::CurateError;
};

// Append-only JSON-lines journal. Replaying it on open rebuilds the view in
// which the latest record for each set wins. Writers are serialised.
class AnnotationStore {
 public:
  // `set_sizes` maps every known set id to its ranked length.
  AnnotationStore(std::filesystem::path journal,
                  std::map<std::string, size_t> set_sizes);

  // Validates and appends; throws UnknownSetError or CurateError.
  AnnotationRecord record(AnnotationRecord r);

  std::optional<AnnotationRecord> latest(const std::string& set_id) const;
  std::map<std::string, AnnotationRecord> view() const;

 private:
  std::filesystem::path journal_;
  std::map<std::string, size_t> set_sizes_;
  std::map<std::string, AnnotationRecord> latest_;
  mutable std::mutex mu_;
};

struct EvalEntry {
  std::string example_id;
  std::string text;
  std::string gold_sql;

  friend bool operator==(const EvalEntry&, const EvalEntry&) = default;
};

struct RobustnessEvalSet {
  perturb::Kind kind = perturb::Kind::kTB;
  std::vector<EvalEntry> entries;
};

enum class BuildPolicy { kHumanRequired, kAutoFallback };

class MissingAnnotationsError : public CurateError {
 public:
  explicit MissingAnnotationsError(std::vector<std::string> ids);
  const std::vector<std::string>& set_ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

struct BuildResult {
  RobustnessEvalSet set;
  std::vector<std::string> omitted;  // example ids whose set was rejected
};

// One entry per example of `split` for `kind`, in dataset order.
BuildResult build_eval_set(const corpus::Dataset& dataset, perturb::Kind kind,
                           const std::map<std::string, CandidateSet>& sets,
                           const std::map<std::string, AnnotationRecord>& annotations,
                           BuildPolicy policy,
                           corpus::Split split = corpus::Split::kTest);

// JSON-lines {example_id, kind, text, gold_sql}.
void write_eval_set(const std::filesystem::path& path, const RobustnessEvalSet& set);
RobustnessEvalSet read_eval_set(const std::filesystem::path& path, perturb::Kind kind);

}  // namespace advsp::curate
