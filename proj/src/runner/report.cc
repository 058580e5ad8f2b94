#include "advsp/runner/report.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <variant>

#include "advsp/common/error.h"
#include "advsp/common/files.h"
#include "advsp/metrics/evaluation.h"

namespace advsp::runner {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kNoData = "no data";
constexpr std::string_view kUndefined = "undefined";

// A computed cell: a number, or a marker such as "undefined".
using Cell = std::variant<double, std::string>;

class RecordCache {
 public:
  explicit RecordCache(fs::path dir) : dir_(std::move(dir)) {}

  const std::vector<metrics::EvalRecord>& get(const std::string& rel) {
    auto it = cache_.find(rel);
    if (it != cache_.end()) return it->second;
    const fs::path path = dir_ / rel;
    if (!fs::exists(path)) throw IoError("record file missing: " + path.string());
    return cache_.emplace(rel, metrics::read_records(path)).first->second;
  }

 private:
  fs::path dir_;
  std::map<std::string, std::vector<metrics::EvalRecord>> cache_;
};

Cell accuracy(RecordCache& rc, const std::string& file) {
  const auto& recs = rc.get(file);
  if (recs.empty()) return std::string(kNoData);
  return metrics::standard_accuracy(recs);
}

Cell robust(RecordCache& rc, const std::string& std_file, const std::string& pert_file) {
  const auto& s = rc.get(std_file);
  const auto& p = rc.get(pert_file);
  if (s.empty() || p.empty()) return std::string(kNoData);
  try {
    return metrics::robust_accuracy(s, p);
  } catch (const metrics::UndefinedMetricError&) {
    return std::string(kUndefined);
  }
}

Cell average(const std::vector<Cell>& cells) {
  double sum = 0.0;
  size_t n = 0;
  bool undefined = false;
  for (const auto& c : cells) {
    if (const double* v = std::get_if<double>(&c)) {
      sum += *v;
      ++n;
    } else if (std::get<std::string>(c) == kUndefined) {
      undefined = true;
    }
  }
  if (n == 0) return std::string(undefined ? kUndefined : kNoData);
  return sum / static_cast<double>(n);
}

std::string fixed2(double v) {
  if (std::fabs(v) < 0.005) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string render_cell(RecordCache& rc, const json& cell) {
  const std::string metric = cell.at("metric").get<std::string>();
  Cell value;
  double scale = 100.0;
  if (metric == "accuracy") {
    value = accuracy(rc, cell.at("records").get<std::string>());
  } else if (metric == "robust") {
    value = robust(rc, cell.at("standard").get<std::string>(),
                   cell.at("perturbed").get<std::string>());
  } else if (metric == "delta") {
    const Cell p = accuracy(rc, cell.at("perturbed").get<std::string>());
    const Cell s = accuracy(rc, cell.at("standard").get<std::string>());
    if (std::holds_alternative<double>(p) && std::holds_alternative<double>(s)) {
      value = std::get<double>(p) - std::get<double>(s);
    } else {
      value = std::string(kNoData);
    }
  } else if (metric == "avg_accuracy") {
    std::vector<Cell> cells;
    for (const auto& f : cell.at("records")) cells.push_back(accuracy(rc, f.get<std::string>()));
    value = average(cells);
  } else if (metric == "avg_robust") {
    const std::string s = cell.at("standard").get<std::string>();
    std::vector<Cell> cells;
    for (const auto& f : cell.at("perturbed")) cells.push_back(robust(rc, s, f.get<std::string>()));
    value = average(cells);
  } else if (metric == "value") {
    if (cell.contains("text")) return cell["text"].get<std::string>();
    value = cell.at("value").get<double>();
    scale = cell.value("scale", 1.0);
  } else if (metric == "error") {
    return "error: " + cell.value("message", "");
  } else {
    throw Error("unknown report metric '" + metric + "'");
  }
  if (const double* v = std::get_if<double>(&value)) {
    if (std::isinf(*v)) return "inf";
    return fixed2(*v * scale);
  }
  return std::get<std::string>(value);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

}  // namespace

RenderedReport render_report(const fs::path& run_dir, const json& layout) {
  RecordCache rc(run_dir);
  RenderedReport out;
  out.markdown = "# " + layout.value("title", std::string("Report")) + "\n";
  out.csv = "table,row,column,value\n";
  try {
    for (const auto& table : layout.at("tables")) {
      const std::string name = table.at("name").get<std::string>();
      const auto columns = table.at("columns").get<std::vector<std::string>>();
      out.markdown += "\n## " + name + "\n\n|";
      for (const auto& c : columns) out.markdown += " " + md_field(c) + " |";
      out.markdown += "\n|";
      for (size_t i = 0; i < columns.size(); ++i) out.markdown += i == 0 ? " --- |" : " ---: |";
      out.markdown += "\n";
      for (const auto& row : table.at("rows")) {
        const std::string label = row.at("label").get<std::string>();
        const auto& cells = row.at("cells");
        out.markdown += "| " + md_field(label) + " |";
        for (size_t i = 0; i < cells.size(); ++i) {
          const std::string text = render_cell(rc, cells[i]);
          out.markdown += " " + md_field(text) + " |";
          const std::string col = i + 1 < columns.size() ? columns[i + 1] : std::to_string(i);
          out.csv += csv_field(name) + "," + csv_field(label) + "," + csv_field(col) +
                     "," + csv_field(text) + "\n";
        }
        out.markdown += "\n";
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report layout: ") + e.what());
  }
  return out;
}

RenderedReport render_report(const fs::path& run_dir) {
  return render_report(run_dir, files::read_json(run_dir / "layout.json"));
}

RenderedReport write_report(const fs::path& run_dir) {
  RenderedReport r = render_report(run_dir);
  files::write_text_atomic(run_dir / "report.md", r.markdown);
  files::write_text_atomic(run_dir / "report.csv", r.csv);
  return r;
}

}  // namespace advsp::runner
