#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advsp/common/error.h"
#include "advsp/common/sqlite.h"
#include "json.hpp"

namespace advsp::metrics {

enum class VerdictKind { kCorrect, kIncorrect, kPredExecError, kGoldExecError };

std::string_view to_string(VerdictKind v);
std::optional<VerdictKind> parse_verdict(std::string_view name);

struct Verdict {
  VerdictKind kind = VerdictKind::kIncorrect;
  std::string detail;
};

// Runs both queries on `db`; order matters only when the gold query has a
// top-level ORDER BY. Execution failures become verdicts, never exceptions.
Verdict judge(const sqlite::Connection& db, std::string_view gold_sql,
              std::string_view predicted_sql, int timeout_ms);

inline constexpr std::string_view kStandardCondition = "standard";

// One prediction for one example under one condition: "standard" or the
// name of a perturbation kind.
struct EvalRecord {
  std::string example_id;
  std::string condition;
  std::string predicted_sql;
  Verdict verdict;
};

nlohmann::json to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);
void write_records(const std::filesystem::path& path,
                   const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

// A gold query that fails to execute makes every accuracy meaningless.
class GoldQueryError : public Error {
 public:
  using Error::Error;
};

// Raised for an empty record set or an empty R_eval.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Correct / total. Used for both the standard and the perturbed sets.
double standard_accuracy(const std::vector<EvalRecord>& records);
double perturbation_accuracy(const std::vector<EvalRecord>& records);

// Accuracy over the perturbed records whose standard counterpart is Correct.
double robust_accuracy(const std::vector<EvalRecord>& standard,
                       const std::vector<EvalRecord>& perturbed);

}  // namespace advsp::metrics
