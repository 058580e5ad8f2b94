#include "advsp/corpus/dataset.h"

#include <unordered_set>

#include "advsp/common/files.h"
#include "advsp/common/text.h"

namespace advsp::corpus {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

Dataset::Dataset(std::string name, std::vector<Example> examples)
    : name_(std::move(name)), examples_(std::move(examples)) {
  std::unordered_set<std::string> ids;
  for (const auto& ex : examples_) {
    if (ex.id.empty()) throw DatasetError("example with empty id");
    if (text::trim(ex.nl).empty()) {
      throw DatasetError("example " + ex.id + " has an empty utterance");
    }
    if (text::trim(ex.gold_sql).empty()) {
      throw DatasetError("example " + ex.id + " has empty gold SQL");
    }
    if (!ids.insert(ex.id).second) {
      throw DatasetError("duplicate example id " + ex.id);
    }
  }
}

std::vector<Example> Dataset::split(Split which) const {
  std::vector<Example> out;
  for (const auto& ex : examples_) {
    if (ex.split == which) out.push_back(ex);
  }
  return out;
}

const Example* Dataset::find(std::string_view id) const {
  for (const auto& ex : examples_) {
    if (ex.id == id) return &ex;
  }
  return nullptr;
}

namespace {

std::string required_string(const json& record, const char* key,
                            size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw DatasetError("line " + std::to_string(line) +
                           ": missing or non-string field '" + key + "'",
                       line);
  }
  return it->get<std::string>();
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path,
                     std::optional<std::string> name) {
  std::vector<Example> examples;
  std::unordered_set<std::string> ids;
  try {
    files::for_each_json_line(path, [&](const json& record, size_t line) {
      if (!record.is_object()) {
        throw DatasetError("line " + std::to_string(line) + ": not an object",
                           line);
      }
      Example ex;
      ex.id = required_string(record, "id", line);
      ex.nl = required_string(record, "nl", line);
      ex.gold_sql = required_string(record, "sql", line);
      const std::string split = required_string(record, "split", line);
      auto parsed = parse_split(split);
      if (!parsed) {
        throw DatasetError(
            "line " + std::to_string(line) + ": unknown split '" + split + "'",
            line);
      }
      ex.split = *parsed;
      if (text::trim(ex.nl).empty() || text::trim(ex.gold_sql).empty()) {
        throw DatasetError(
            "line " + std::to_string(line) + ": empty nl or sql", line);
      }
      if (!ids.insert(ex.id).second) {
        throw DatasetError(
            "line " + std::to_string(line) + ": duplicate id " + ex.id, line);
      }
      examples.push_back(std::move(ex));
    });
  } catch (const DatasetError&) {
    throw;
  } catch (const IoError& e) {
    throw DatasetError(e.what());
  }
  return Dataset(name.value_or(path.stem().string()), std::move(examples));
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::vector<json> records;
  records.reserve(dataset.size());
  for (const auto& ex : dataset.examples()) {
    records.push_back({{"id", ex.id},
                       {"nl", ex.nl},
                       {"sql", ex.gold_sql},
                       {"split", to_string(ex.split)}});
  }
  files::write_json_lines(path, records);
}

}  // namespace advsp::corpus
