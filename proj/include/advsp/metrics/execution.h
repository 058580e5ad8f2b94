#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "advsp/common/error.h"
#include "advsp/common/sqlite.h"

namespace advsp::metrics {

// NULL, integer, real or text. Text has trailing whitespace removed.
using Value = std::variant<std::monostate, int64_t, double, std::string>;

struct ExecutionResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
};

enum class ExecErrorKind { kSyntax, kRuntime, kTimeout, kWriteRejected };

class ExecError : public Error {
 public:
  ExecError(ExecErrorKind kind, const std::string& message)
      : Error(message), kind_(kind) {}
  ExecErrorKind kind() const { return kind_; }

 private:
  ExecErrorKind kind_;
};

std::string_view to_string(ExecErrorKind kind);

inline constexpr int kDefaultSqlTimeoutMs = 5000;

// Runs exactly one read-only statement and materialises the full result.
ExecutionResult execute_sql(const sqlite::Connection& db, std::string_view sql,
                            int timeout_ms = kDefaultSqlTimeoutMs);

// Numbers match when |a-b| <= 1e-6 * max(1, |a|, |b|); integers and reals
// compare numerically. NULL equals only NULL. Text never equals a number.
bool values_equal(const Value& a, const Value& b);

// Column names are ignored. Without order sensitivity rows are compared as
// multisets.
bool compare_results(const ExecutionResult& gold, const ExecutionResult& pred,
                     bool order_sensitive);

// True when ORDER BY appears outside any parentheses, string or comment.
bool has_top_level_order_by(std::string_view sql);

}  // namespace advsp::metrics
