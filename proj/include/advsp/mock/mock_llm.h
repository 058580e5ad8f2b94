#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>

#include "json.hpp"

namespace advsp::mock {

enum class MockMode { kEchoGold, kAlwaysWrong };

// Deterministic stand-in for the completion, embedding, scoring and
// fill-mask endpoints. Every answer is a pure function of the request.
class MockLlm {
 public:
  MockLlm(MockMode mode, std::map<std::string, std::string> gold_by_nl);

  // Adds an utterance -> gold SQL pair to the echo-gold lookup.
  void add_gold(const std::string& nl, const std::string& sql);

  nlohmann::json completions(const nlohmann::json& body) const;
  nlohmann::json embeddings(const nlohmann::json& body) const;
  nlohmann::json fill_mask(const nlohmann::json& body) const;

  // Text of the final "-- " comment line before the trailing SELECT.
  static std::string target_question(const std::string& prompt);

 private:
  std::string sql_continuation(const std::string& prompt) const;

  MockMode mode_;
  std::map<std::string, std::string> gold_;
};

// HTTP front end: POST /v1/completions, /v1/embeddings, /fill-mask.
class MockLlmServer {
 public:
  explicit MockLlmServer(MockLlm llm);
  ~MockLlmServer();
  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  int start(const std::string& host, int port);  // port 0 picks a free one
  void serve(const std::string& host, int port);  // blocking
  void stop();
  uint64_t requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace advsp::mock
