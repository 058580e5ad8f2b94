#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace advsp::runner {

// A run directory holds record files plus layout.json describing the tables:
//
//   {"title": ..., "tables": [{"name": ..., "columns": [...],
//     "rows": [{"label": ..., "cells": [<cell>, ...]}]}]}
//
// Cells reference record files relative to the run directory:
//   {"metric": "accuracy", "records": f}
//   {"metric": "robust", "standard": f, "perturbed": f}
//   {"metric": "delta", "perturbed": f, "standard": f}        perturbed - standard
//   {"metric": "avg_accuracy", "records": [f, ...]}
//   {"metric": "avg_robust", "standard": f, "perturbed": [f, ...]}
//   {"metric": "value", "value": x, "scale": s} or {"metric": "value", "text": t}
//   {"metric": "error", "message": m}
struct RenderedReport {
  std::string markdown;
  std::string csv;
};

// Reads files only; never executes queries or calls a model.
RenderedReport render_report(const std::filesystem::path& run_dir,
                             const nlohmann::json& layout);
RenderedReport render_report(const std::filesystem::path& run_dir);

// Renders and writes report.md and report.csv into `run_dir`.
RenderedReport write_report(const std::filesystem::path& run_dir);

}  // namespace advsp::runner
