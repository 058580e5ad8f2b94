#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "advsp/common/error.h"
#include "advsp/corpus/dataset.h"
#include "advsp/corpus/schema.h"
#include "json.hpp"

namespace advsp::prompt {

inline constexpr std::string_view kDefaultInstruction =
    "Using valid SQLite, answer the following questions for the tables "
    "provided above.";

struct PromptConfig {
  size_t rows_limit = 3;
  std::string instruction = std::string(kDefaultInstruction);
  size_t max_prompt_tokens = 8000;

  void validate() const;  // ConfigError
};

PromptConfig prompt_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PromptConfig& cfg);

struct AdversarialDemo {
  std::string text;
  std::string gold_sql;
};

struct DemoSet {
  std::vector<corpus::Example> standard;
  std::vector<AdversarialDemo> adversarial;
};

struct AssembledPrompt {
  std::string text;
  size_t shot_count = 0;
  size_t token_estimate = 0;
};

class BudgetExceededError : public Error {
 public:
  BudgetExceededError(size_t estimate, size_t limit)
      : Error("prompt needs ~" + std::to_string(estimate) +
              " tokens, budget is " + std::to_string(limit)),
        estimate_(estimate),
        limit_(limit) {}
  size_t estimate() const { return estimate_; }
  size_t limit() const { return limit_; }

 private:
  size_t estimate_;
  size_t limit_;
};

// CREATE TABLE statement plus a commented SELECT * ... LIMIT X sample for
// every table, blank-line separated. Uses at most `rows_limit` of the rows
// the schema carries.
std::string serialize_schema(const corpus::Schema& schema, size_t rows_limit);

// "-- {nl}\n{sql};\n"
std::string format_demo(std::string_view nl, std::string_view sql);

// ceil(bytes / 3). Over-counts for English text with BPE tokenizers.
size_t estimate_tokens(std::string_view text);

// The returned text ends with "-- {target}\nSELECT", ready for completion.
AssembledPrompt assemble(std::string_view schema_text, const PromptConfig& cfg,
                         const DemoSet& demos, std::string_view target_nl);

// The prompt primes "SELECT", so the query is that keyword plus whatever the
// model generated.
std::string predicted_sql(std::string_view continuation);

}  // namespace advsp::prompt
