#include "advsp/corpus/schema.h"

#include <sqlite3.h>

#include <set>

#include "advsp/common/files.h"
#include "advsp/common/sqlite.h"

namespace advsp::corpus {

using nlohmann::json;

const TableDef* Schema::find_table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

namespace {

bool has_column(const TableDef& table, std::string_view name) {
  for (const auto& c : table.columns) {
    if (c.name == name) return true;
  }
  return false;
}

std::string get_string(const json& obj, const char* key,
                       const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw SchemaError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

TableDef parse_table(const json& t) {
  if (!t.is_object()) throw SchemaError("table entry is not an object");
  TableDef table;
  table.name = get_string(t, "name", "table");
  const std::string where = "table " + table.name;
  if (!t.contains("columns") || !t["columns"].is_array()) {
    throw SchemaError(where + ": missing columns");
  }
  for (const auto& c : t["columns"]) {
    table.columns.push_back(
        {get_string(c, "name", where), get_string(c, "type", where)});
  }
  if (t.contains("foreign_keys")) {
    for (const auto& fk : t["foreign_keys"]) {
      table.foreign_keys.push_back({get_string(fk, "column", where),
                                    get_string(fk, "ref_table", where),
                                    get_string(fk, "ref_column", where)});
    }
  }
  return table;
}

std::vector<std::vector<std::string>> fetch_rows(
    const sqlite::Connection& db, const TableDef& table, size_t rows_limit) {
  const std::string sql = "SELECT * FROM " +
                          sqlite::quote_identifier(table.name) + " LIMIT " +
                          std::to_string(rows_limit);
  sqlite3_stmt* raw = nullptr;
  if (sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &raw, nullptr) !=
      SQLITE_OK) {
    throw SchemaError("cannot read table " + table.name + ": " +
                      db.last_error());
  }
  sqlite::Statement stmt(raw);
  const int ncols = sqlite3_column_count(raw);
  if (static_cast<size_t>(ncols) != table.columns.size()) {
    throw SchemaError("table " + table.name + " has " + std::to_string(ncols) +
                      " columns in the database but " +
                      std::to_string(table.columns.size()) + " declared");
  }
  std::vector<std::vector<std::string>> rows;
  int rc;
  while ((rc = sqlite3_step(raw)) == SQLITE_ROW) {
    std::vector<std::string> row;
    row.reserve(ncols);
    for (int i = 0; i < ncols; ++i) {
      if (sqlite3_column_type(raw, i) == SQLITE_NULL) {
        row.emplace_back("NULL");
      } else {
        const auto* text = sqlite3_column_text(raw, i);
        row.emplace_back(reinterpret_cast<const char*>(text),
                         sqlite3_column_bytes(raw, i));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rc != SQLITE_DONE) {
    throw SchemaError("cannot read table " + table.name + ": " +
                      db.last_error());
  }
  return rows;
}

}  // namespace

void validate_schema(const Schema& schema) {
  std::set<std::string> names;
  for (const auto& table : schema.tables) {
    if (!names.insert(table.name).second) {
      throw SchemaError("duplicate table " + table.name);
    }
    std::set<std::string> cols;
    for (const auto& c : table.columns) {
      if (!cols.insert(c.name).second) {
        throw SchemaError("duplicate column " + table.name + "." + c.name);
      }
    }
  }
  for (const auto& table : schema.tables) {
    for (const auto& fk : table.foreign_keys) {
      if (!has_column(table, fk.column)) {
        throw SchemaError("foreign key on undeclared column " + table.name +
                          "." + fk.column);
      }
      const TableDef* ref = schema.find_table(fk.ref_table);
      if (ref == nullptr) {
        throw SchemaError("dangling foreign key " + table.name + "." +
                          fk.column + " -> " + fk.ref_table);
      }
      if (!has_column(*ref, fk.ref_column)) {
        throw SchemaError("dangling foreign key " + table.name + "." +
                          fk.column + " -> " + fk.ref_table + "." +
                          fk.ref_column);
      }
    }
  }
}

Schema load_schema(const std::filesystem::path& descriptor,
                   size_t rows_limit) {
  json doc;
  try {
    doc = files::read_json(descriptor);
  } catch (const IoError& e) {
    throw SchemaError(e.what());
  }
  if (!doc.is_object()) throw SchemaError("schema descriptor is not an object");
  Schema schema;
  std::filesystem::path db_path = get_string(doc, "db_path", "schema");
  if (db_path.is_relative()) db_path = descriptor.parent_path() / db_path;
  schema.db_path = db_path.lexically_normal();
  if (!doc.contains("tables") || !doc["tables"].is_array()) {
    throw SchemaError("schema: missing tables");
  }
  for (const auto& t : doc["tables"]) schema.tables.push_back(parse_table(t));
  validate_schema(schema);

  sqlite::Connection db = [&] {
    try {
      return sqlite::Connection::open_read_only(schema.db_path.string());
    } catch (const IoError& e) {
      throw SchemaError(e.what());
    }
  }();
  for (auto& table : schema.tables) {
    if (!db.has_table(table.name)) {
      throw SchemaError("table " + table.name + " not found in database " +
                        schema.db_path.string());
    }
    table.sample_rows = fetch_rows(db, table, rows_limit);
  }
  return schema;
}

}  // namespace advsp::corpus
