#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advsp/common/error.h"

namespace advsp::corpus {

enum class Split { kTrain, kDev, kTest };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

// One NL utterance paired with its gold SQL.
struct Example {
  std::string id;
  std::string nl;
  std::string gold_sql;
  Split split = Split::kTrain;

  friend bool operator==(const Example&, const Example&) = default;
};

// Thrown for unreadable or invalid dataset files. `line` is 1-based, 0 when
// the failure is not tied to a line.
class DatasetError : public Error {
 public:
  DatasetError(const std::string& message, size_t line = 0)
      : Error(message), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Ordered examples in file order. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;
  // Validates Example invariants and id uniqueness.
  Dataset(std::string name, std::vector<Example> examples);

  const std::string& name() const { return name_; }
  const std::vector<Example>& examples() const { return examples_; }
  size_t size() const { return examples_.size(); }

  std::vector<Example> split(Split which) const;
  const Example* find(std::string_view id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::string name_;
  std::vector<Example> examples_;
};

// Reads JSON-lines records {id, nl, sql, split}. The dataset name defaults to
// the file stem.
Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::string> name = std::nullopt);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace advsp::corpus
