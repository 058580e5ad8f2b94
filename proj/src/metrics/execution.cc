#include "advsp/metrics/execution.h"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <functional>

#include "advsp/common/text.h"

namespace advsp::metrics {

std::string_view to_string(ExecErrorKind kind) {
  switch (kind) {
    case ExecErrorKind::kSyntax: return "syntax";
    case ExecErrorKind::kRuntime: return "runtime";
    case ExecErrorKind::kTimeout: return "timeout";
    case ExecErrorKind::kWriteRejected: return "write-rejected";
  }
  return "?";
}

namespace {

struct Deadline {
  std::chrono::steady_clock::time_point at;
};

int progress_check(void* arg) {
  const auto* d = static_cast<const Deadline*>(arg);
  return std::chrono::steady_clock::now() >= d->at ? 1 : 0;
}

// Clears the progress handler when the query finishes, however it exits.
struct ProgressGuard {
  sqlite3* db;
  ~ProgressGuard() { sqlite3_progress_handler(db, 0, nullptr, nullptr); }
};

Value read_column(sqlite3_stmt* stmt, int i) {
  switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_NULL:
      return std::monostate{};
    case SQLITE_INTEGER:
      return static_cast<int64_t>(sqlite3_column_int64(stmt, i));
    case SQLITE_FLOAT:
      return sqlite3_column_double(stmt, i);
    default: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
      const int n = sqlite3_column_bytes(stmt, i);
      return std::string(text::trim_right(std::string_view(p ? p : "", n)));
    }
  }
}

}  // namespace

ExecutionResult execute_sql(const sqlite::Connection& db, std::string_view sql,
                            int timeout_ms) {
  sqlite3* h = db.get();
  const std::string_view body = text::trim(sql);
  if (body.empty()) throw ExecError(ExecErrorKind::kSyntax, "empty query");

  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  if (sqlite3_prepare_v2(h, body.data(), static_cast<int>(body.size()), &raw,
                         &tail) != SQLITE_OK) {
    throw ExecError(ExecErrorKind::kSyntax, db.last_error());
  }
  sqlite::Statement stmt(raw);
  if (raw == nullptr) throw ExecError(ExecErrorKind::kSyntax, "no statement");

  // Anything after the first statement must compile to nothing.
  const std::string_view rest(tail, static_cast<size_t>(body.data() + body.size() - tail));
  if (!text::trim(rest).empty()) {
    sqlite3_stmt* extra = nullptr;
    const int rc = sqlite3_prepare_v2(h, rest.data(), static_cast<int>(rest.size()),
                                      &extra, nullptr);
    sqlite::Statement extra_guard(extra);
    if (rc != SQLITE_OK || extra != nullptr) {
      throw ExecError(ExecErrorKind::kSyntax, "multiple statements are not allowed");
    }
  }
  if (!sqlite3_stmt_readonly(raw)) {
    throw ExecError(ExecErrorKind::kWriteRejected, "statement would modify the database");
  }

  Deadline deadline{std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms)};
  sqlite3_progress_handler(h, 1000, progress_check, &deadline);
  ProgressGuard guard{h};

  ExecutionResult result;
  const int cols = sqlite3_column_count(raw);
  for (int i = 0; i < cols; ++i) {
    const char* name = sqlite3_column_name(raw, i);
    result.columns.emplace_back(name ? name : "");
  }
  while (true) {
    const int rc = sqlite3_step(raw);
    if (rc == SQLITE_ROW) {
      std::vector<Value> row;
      row.reserve(cols);
      for (int i = 0; i < cols; ++i) row.push_back(read_column(raw, i));
      result.rows.push_back(std::move(row));
    } else if (rc == SQLITE_DONE) {
      break;
    } else if (rc == SQLITE_INTERRUPT) {
      throw ExecError(ExecErrorKind::kTimeout,
                      "query exceeded " + std::to_string(timeout_ms) + " ms");
    } else if (rc == SQLITE_READONLY) {
      throw ExecError(ExecErrorKind::kWriteRejected, db.last_error());
    } else {
      throw ExecError(ExecErrorKind::kRuntime, db.last_error());
    }
  }
  return result;
}

namespace {

bool is_number(const Value& v) {
  return std::holds_alternative<int64_t>(v) || std::holds_alternative<double>(v);
}

double as_double(const Value& v) {
  if (const auto* i = std::get_if<int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

// 0 null, 1 number, 2 text.
int type_rank(const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) return 0;
  if (is_number(v)) return 1;
  return 2;
}

bool value_less(const Value& a, const Value& b) {
  const int ra = type_rank(a), rb = type_rank(b);
  if (ra != rb) return ra < rb;
  if (ra == 1) return as_double(a) < as_double(b);
  if (ra == 2) return std::get<std::string>(a) < std::get<std::string>(b);
  return false;
}

bool row_less(const std::vector<Value>& a, const std::vector<Value>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
}

bool rows_equal(const std::vector<Value>& a, const std::vector<Value>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!values_equal(a[i], b[i])) return false;
  }
  return true;
}

// Kuhn's augmenting-path matching between rows under tolerant equality.
bool perfect_matching(const std::vector<std::vector<Value>>& a,
                      const std::vector<std::vector<Value>>& b) {
  const size_t n = a.size();
  std::vector<std::vector<size_t>> adj(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (rows_equal(a[i], b[j])) adj[i].push_back(j);
    }
    if (adj[i].empty()) return false;
  }
  std::vector<size_t> match(n, n);
  std::vector<bool> seen;
  std::function<bool(size_t)> augment = [&](size_t i) {
    for (size_t j : adj[i]) {
      if (seen[j]) continue;
      seen[j] = true;
      if (match[j] == n || augment(match[j])) {
        match[j] = i;
        return true;
      }
    }
    return false;
  };
  for (size_t i = 0; i < n; ++i) {
    seen.assign(n, false);
    if (!augment(i)) return false;
  }
  return true;
}

constexpr size_t kMatchingRowLimit = 2000;

}  // namespace

bool values_equal(const Value& a, const Value& b) {
  if (is_number(a) && is_number(b)) {
    const double x = as_double(a), y = as_double(b);
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
    if (x == y) return true;
    const double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
    return std::fabs(x - y) <= 1e-6 * scale;
  }
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<std::monostate>(a)) return true;
  return std::get<std::string>(a) == std::get<std::string>(b);
}

bool compare_results(const ExecutionResult& gold, const ExecutionResult& pred,
                     bool order_sensitive) {
  if (gold.rows.size() != pred.rows.size()) return false;
  if (gold.columns.size() != pred.columns.size()) return false;
  if (order_sensitive) {
    for (size_t i = 0; i < gold.rows.size(); ++i) {
      if (!rows_equal(gold.rows[i], pred.rows[i])) return false;
    }
    return true;
  }
  auto a = gold.rows;
  auto b = pred.rows;
  std::sort(a.begin(), a.end(), row_less);
  std::sort(b.begin(), b.end(), row_less);
  bool sorted_equal = true;
  for (size_t i = 0; i < a.size() && sorted_equal; ++i) {
    sorted_equal = rows_equal(a[i], b[i]);
  }
  if (sorted_equal) return true;
  // Values within tolerance can sort into different positions; settle those
  // cases with an exact matching when it is affordable.
  if (a.size() > kMatchingRowLimit) return false;
  return perfect_matching(a, b);
}

bool has_top_level_order_by(std::string_view sql) {
  int depth = 0;
  size_t i = 0;
  std::string prev_word;
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  while (i < sql.size()) {
    const char c = sql[i];
    if (c == '\'' || c == '"' || c == '`') {
      ++i;
      while (i < sql.size() && sql[i] != c) ++i;
      ++i;
      prev_word.clear();
    } else if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      while (i < sql.size() && sql[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < sql.size() && sql[i + 1] == '*') {
      const size_t end = sql.find("*/", i + 2);
      i = end == std::string_view::npos ? sql.size() : end + 2;
    } else if (c == '(') {
      ++depth;
      ++i;
      prev_word.clear();
    } else if (c == ')') {
      --depth;
      ++i;
      prev_word.clear();
    } else if (is_word(c)) {
      const size_t start = i;
      while (i < sql.size() && is_word(sql[i])) ++i;
      std::string word = text::to_upper(sql.substr(start, i - start));
      if (depth == 0 && word == "BY" && prev_word == "ORDER") return true;
      prev_word = std::move(word);
    } else {
      if (!std::isspace(static_cast<unsigned char>(c))) prev_word.clear();
      ++i;
    }
  }
  return false;
}

}  // namespace advsp::metrics
