#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advsp/common/error.h"
#include "advsp/corpus/dataset.h"
#include "advsp/llm/types.h"
#include "json.hpp"

namespace advsp::perturb {

// TB, RD, RS, CS and CI edit words; RB and DB rewrite the whole sentence.
enum class Kind { kTB, kRD, kRS, kCS, kCI, kRB, kDB };

const std::vector<Kind>& all_kinds();
std::string_view to_string(Kind kind);
std::optional<Kind> parse_kind(std::string_view name);
bool is_word_level(Kind kind);

struct PerturbedCandidate {
  std::string original_id;
  Kind kind = Kind::kTB;
  std::string text;
  std::optional<double> similarity;
  uint64_t seed = 0;

  friend bool operator==(const PerturbedCandidate&,
                         const PerturbedCandidate&) = default;
};

// A whitespace-delimited word and its byte span [start, end) in the source.
struct WordToken {
  std::string surface;
  size_t start = 0;
  size_t end = 0;
};

std::vector<WordToken> tokenize_words(std::string_view nl);

enum class PerturbErrorCode {
  kTooFewEligibleWords,
  kTooShort,
  kNoSwappablePair,
  kNoSubstitute,
  kEmptyParaphrase,
};

class PerturbError : public Error {
 public:
  PerturbError(PerturbErrorCode code, const std::string& message)
      : Error(message), code_(code) {}
  PerturbErrorCode code() const { return code_; }

 private:
  PerturbErrorCode code_;
};

// Closed-class words TB skips while enough other words are available.
const std::vector<std::string>& typo_stopwords();

// One typo edit family. Glyph substitution rewrites every occurrence of the
// chosen character (l->1 turns "tell" into "te11").
enum class TypoFamily { kInsertSpace, kDelete, kSwap, kGlyph, kKeyboard };

// Every output of `family` applied once to `word`, in a fixed order. Outputs
// equal to `word` are excluded; duplicates are kept so each edit site counts.
std::vector<std::string> typo_edits(std::string_view word, TypoFamily family);

// QWERTY neighbours of a lowercase letter; empty for anything else.
std::string_view keyboard_neighbors(char lower);

struct WordEdit {
  size_t token_index = 0;
  std::string replacement;
};

struct TypoResult {
  std::string text;
  std::vector<WordEdit> edits;  // ascending token_index
};

// Used by TB and CS: replacing whole words by byte offset keeps every other
// byte of `nl` intact.
std::string replace_words(std::string_view nl,
                          const std::vector<WordToken>& tokens,
                          const std::vector<WordEdit>& edits);

TypoResult perturb_typo_detailed(std::string_view nl, uint64_t seed);
std::string perturb_typo(std::string_view nl, uint64_t seed);
std::string perturb_random_delete(std::string_view nl, uint64_t seed);
std::string perturb_random_swap(std::string_view nl, uint64_t seed);
std::string perturb_context_substitute(std::string_view nl, uint64_t seed,
                                       llm::MaskFiller& masker, int top_k = 10);
std::string perturb_context_insert(std::string_view nl, uint64_t seed,
                                   llm::MaskFiller& masker, int top_k = 10);

std::string paraphrase_prompt(std::string_view nl);
std::string perturb_rewrite(std::string_view nl, llm::Completer& paraphraser);

inline constexpr std::string_view kDistractSuffix =
    "who is who; what is what; when is when; which is which; where is where";
std::string perturb_distract(std::string_view nl);

// Remote services the model-backed strategies need. Null members are only an
// error when a kind that needs them is requested.
struct Clients {
  llm::Completer* completer = nullptr;
  llm::MaskFiller* masker = nullptr;
};

// One run of `kind` on `nl`. RB and DB ignore the seed.
std::string apply(Kind kind, std::string_view nl, uint64_t seed, const Clients& clients);

struct SeedFailure {
  uint64_t seed = 0;
  std::string message;
};

struct CandidateBatch {
  std::vector<PerturbedCandidate> candidates;  // seed order, deduplicated
  std::vector<SeedFailure> failures;
};

inline constexpr int kDefaultCandidateCount = 20;

// Runs `kind` with seeds seed..seed+n-1 and collapses identical texts,
// keeping the first. When every seed fails the first error is rethrown.
CandidateBatch generate_candidates(const corpus::Example& example, Kind kind,
                                   const Clients& clients,
                                   int n = kDefaultCandidateCount,
                                   uint64_t seed = 0,
                                   size_t max_in_flight = 1);

nlohmann::json to_json(const PerturbedCandidate& c);
PerturbedCandidate candidate_from_json(const nlohmann::json& j);

void write_candidates(const std::filesystem::path& path,
                      const std::vector<PerturbedCandidate>& candidates);
std::vector<PerturbedCandidate> read_candidates(
    const std::filesystem::path& path);

}  // namespace advsp::perturb
