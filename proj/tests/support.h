#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <sqlite3.h>

#include "advsp/llm/types.h"

namespace advsp::testing {

inline std::filesystem::path source_dir() { return ADVSP_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("advsp-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Creates (or extends) a writable database by running `statements`.
inline void make_db(const std::filesystem::path& path, const std::vector<std::string>& statements) {
  sqlite3* db = nullptr;
  if (sqlite3_open(path.c_str(), &db) != SQLITE_OK) throw std::runtime_error("open " + path.string());
  for (const auto& sql : statements) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      const std::string msg = err ? err : "?";
      sqlite3_free(err);
      sqlite3_close(db);
      throw std::runtime_error(msg + " in: " + sql);
    }
  }
  sqlite3_close(db);
}

// Answers every mask with the same ranked list.
class FixedMasker : public llm::MaskFiller {
 public:
  explicit FixedMasker(std::vector<std::string> fills) : fills_(std::move(fills)) {}
  const std::string& mask_token() const override { return token_; }
  std::vector<llm::MaskFill> mask_fill(const std::string& text, int k) override {
    seen.push_back(text);
    std::vector<llm::MaskFill> out;
    double p = 0.5;
    for (const auto& f : fills_) {
      if (static_cast<int>(out.size()) == k) break;
      out.push_back({f, p});
      p /= 2;
    }
    return out;
  }
  std::vector<std::string> seen;

 private:
  std::string token_ = "<mask>";
  std::vector<std::string> fills_;
};

// Completer driven by a function of the prompt.
class FnCompleter : public llm::Completer {
 public:
  explicit FnCompleter(std::function<llm::CompletionResponse(const llm::CompletionRequest&)> fn)
      : fn_(std::move(fn)) {}
  llm::CompletionResponse complete(const llm::CompletionRequest& r) override {
    ++calls;
    return fn_(r);
  }
  std::atomic<int> calls{0};

 private:
  std::function<llm::CompletionResponse(const llm::CompletionRequest&)> fn_;
};

// Looks scores up by exact text.
class TableScorer : public llm::PerplexityScorer {
 public:
  explicit TableScorer(std::map<std::string, double> table) : table_(std::move(table)) {}
  double sequence_perplexity(const std::string& text) override { return table_.at(text); }

 private:
  std::map<std::string, double> table_;
};

// Looks vectors up by exact text.
class TableEmbedder : public llm::Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table)
      : table_(std::move(table)) {}
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) out.push_back(table_.at(t));
    return out;
  }

 private:
  std::map<std::string, std::vector<double>> table_;
};

}  // namespace advsp::testing
