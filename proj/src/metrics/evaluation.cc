#include "advsp/metrics/evaluation.h"

#include <unordered_map>

#include "advsp/common/files.h"
#include "advsp/common/text.h"
#include "advsp/metrics/execution.h"

namespace advsp::metrics {

using nlohmann::json;

std::string_view to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::kCorrect: return "Correct";
    case VerdictKind::kIncorrect: return "Incorrect";
    case VerdictKind::kPredExecError: return "PredExecError";
    case VerdictKind::kGoldExecError: return "GoldExecError";
  }
  return "?";
}

std::optional<VerdictKind> parse_verdict(std::string_view name) {
  for (VerdictKind v : {VerdictKind::kCorrect, VerdictKind::kIncorrect,
                        VerdictKind::kPredExecError, VerdictKind::kGoldExecError}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

Verdict judge(const sqlite::Connection& db, std::string_view gold_sql,
              std::string_view predicted_sql, int timeout_ms) {
  ExecutionResult gold;
  try {
    gold = execute_sql(db, gold_sql, timeout_ms);
  } catch (const ExecError& e) {
    return {VerdictKind::kGoldExecError,
            std::string(to_string(e.kind())) + ": " + e.what()};
  }
  ExecutionResult pred;
  try {
    pred = execute_sql(db, predicted_sql, timeout_ms);
  } catch (const ExecError& e) {
    return {VerdictKind::kPredExecError,
            std::string(to_string(e.kind())) + ": " + e.what()};
  }
  if (compare_results(gold, pred, has_top_level_order_by(gold_sql))) {
    return {VerdictKind::kCorrect, ""};
  }
  return {VerdictKind::kIncorrect, "result mismatch"};
}

json to_json(const EvalRecord& r) {
  return {{"example_id", r.example_id},
          {"condition", r.condition},
          {"predicted_sql", r.predicted_sql},
          {"verdict", to_string(r.verdict.kind)},
          {"detail", r.verdict.detail}};
}

EvalRecord record_from_json(const json& j) {
  EvalRecord r;
  try {
    r.example_id = j.at("example_id").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.predicted_sql = j.at("predicted_sql").get<std::string>();
    const auto v = parse_verdict(j.at("verdict").get<std::string>());
    if (!v) throw Error("unknown verdict");
    r.verdict.kind = *v;
    r.verdict.detail = j.value("detail", "");
  } catch (const json::exception& e) {
    throw Error(std::string("bad eval record: ") + e.what());
  }
  return r;
}

void write_records(const std::filesystem::path& path,
                   const std::vector<EvalRecord>& records) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  files::write_json_lines(path, lines);
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  std::vector<EvalRecord> out;
  files::for_each_json_line(path, [&](const json& j, size_t line) {
    try {
      out.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw IoError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

namespace {

void check_gold(const EvalRecord& r) {
  if (r.verdict.kind == VerdictKind::kGoldExecError) {
    throw GoldQueryError("gold query for " + r.example_id +
                         " failed to execute: " + r.verdict.detail);
  }
}

}  // namespace

double standard_accuracy(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw UndefinedMetricError("accuracy of an empty record set");
  size_t correct = 0;
  for (const auto& r : records) {
    check_gold(r);
    if (r.verdict.kind == VerdictKind::kCorrect) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double perturbation_accuracy(const std::vector<EvalRecord>& records) {
  return standard_accuracy(records);
}

double robust_accuracy(const std::vector<EvalRecord>& standard,
                       const std::vector<EvalRecord>& perturbed) {
  std::unordered_map<std::string, VerdictKind> base;
  for (const auto& r : standard) {
    check_gold(r);
    base[r.example_id] = r.verdict.kind;
  }
  size_t eval = 0, correct = 0;
  for (const auto& r : perturbed) {
    check_gold(r);
    auto it = base.find(r.example_id);
    if (it == base.end() || it->second != VerdictKind::kCorrect) continue;
    ++eval;
    if (r.verdict.kind == VerdictKind::kCorrect) ++correct;
  }
  if (eval == 0) {
    throw UndefinedMetricError(
        "robust accuracy undefined: no perturbed example has a correctly parsed original");
  }
  return static_cast<double>(correct) / static_cast<double>(eval);
}

}  // namespace advsp::metrics
