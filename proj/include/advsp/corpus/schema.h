#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "advsp/common/error.h"

namespace advsp::corpus {

struct Column {
  std::string name;
  std::string type;  // verbatim from the descriptor, only ever rendered
};

struct ForeignKey {
  std::string column;
  std::string ref_table;
  std::string ref_column;
};

struct TableDef {
  std::string name;
  std::vector<Column> columns;
  std::vector<ForeignKey> foreign_keys;
  // Stringified values, at most rows_limit rows, each |columns| wide.
  std::vector<std::vector<std::string>> sample_rows;
};

struct Schema {
  std::vector<TableDef> tables;
  std::filesystem::path db_path;

  const TableDef* find_table(std::string_view name) const;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Throws SchemaError for duplicate tables/columns and dangling foreign keys.
void validate_schema(const Schema& schema);

// Reads the JSON descriptor {db_path, tables:[{name, columns, foreign_keys}]}
// and fetches up to `rows_limit` sample rows per table with
// SELECT * FROM T LIMIT X. A relative db_path resolves against the
// descriptor's directory.
Schema load_schema(const std::filesystem::path& descriptor, size_t rows_limit);

}  // namespace advsp::corpus
