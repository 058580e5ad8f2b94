#include "advsp/common/sqlite.h"

#include <sqlite3.h>

#include <filesystem>
#include <utility>

#include "advsp/common/error.h"

namespace advsp::sqlite {

Connection Connection::open_read_only(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("database not found: " + path);
  }
  sqlite3* db = nullptr;
  const int rc = sqlite3_open_v2(path.c_str(), &db,
                                 SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX,
                                 nullptr);
  if (rc != SQLITE_OK) {
    std::string message = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw IoError("cannot open database " + path + ": " + message);
  }
  Connection conn(db);
  // Forces a header read so a non-database file fails here, not on first query.
  sqlite3_stmt* probe = nullptr;
  if (sqlite3_prepare_v2(db, "SELECT count(*) FROM sqlite_master", -1, &probe,
                         nullptr) != SQLITE_OK) {
    std::string message = sqlite3_errmsg(db);
    throw IoError("cannot read database " + path + ": " + message);
  }
  Statement guard(probe);
  if (sqlite3_step(probe) != SQLITE_ROW) {
    throw IoError("cannot read database " + path + ": " + sqlite3_errmsg(db));
  }
  return conn;
}

Connection::Connection(Connection&& other) noexcept
    : db_(std::exchange(other.db_, nullptr)) {}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    sqlite3_close(db_);
    db_ = std::exchange(other.db_, nullptr);
  }
  return *this;
}

Connection::~Connection() { sqlite3_close(db_); }

std::string Connection::last_error() const {
  return db_ ? sqlite3_errmsg(db_) : "no connection";
}

bool Connection::has_table(std::string_view name) const {
  sqlite3_stmt* raw = nullptr;
  if (sqlite3_prepare_v2(db_,
                         "SELECT 1 FROM sqlite_master WHERE type IN "
                         "('table','view') AND name = ?1 COLLATE NOCASE",
                         -1, &raw, nullptr) != SQLITE_OK) {
    throw IoError("schema lookup failed: " + last_error());
  }
  Statement stmt(raw);
  sqlite3_bind_text(raw, 1, name.data(), static_cast<int>(name.size()),
                    SQLITE_TRANSIENT);
  return sqlite3_step(raw) == SQLITE_ROW;
}

Statement::Statement(Statement&& other) noexcept
    : stmt_(std::exchange(other.stmt_, nullptr)) {}

Statement& Statement::operator=(Statement&& other) noexcept {
  if (this != &other) {
    sqlite3_finalize(stmt_);
    stmt_ = std::exchange(other.stmt_, nullptr);
  }
  return *this;
}

Statement::~Statement() { sqlite3_finalize(stmt_); }

std::string quote_identifier(std::string_view name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace advsp::sqlite
