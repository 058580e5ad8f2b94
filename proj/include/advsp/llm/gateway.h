#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "advsp/llm/types.h"
#include "json.hpp"

namespace advsp::llm {

struct GatewayConfig {
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string model = "code-davinci-002";
  std::string embed_model = "sentence-transformers/all-mpnet-base-v2";
  std::string ppl_model = "gpt2";
  std::string mask_model_url = "http://127.0.0.1:8080/fill-mask";
  std::string mask_token = "<mask>";
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int retry_base_delay_ms = 500;
  double rate_limit_rps = 0.0;  // 0 disables limiting
  std::filesystem::path cache_dir = ".advsp-cache";

  // Throws ConfigError on invalid values.
  void validate() const;
};

GatewayConfig gateway_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GatewayConfig& cfg);

// Wire body for a completion request.
nlohmann::json completion_body(const std::string& model,
                               const CompletionRequest& req);

// Token bucket; capacity max(1, rps). Thread-safe.
class RateLimiter {
 public:
  explicit RateLimiter(double rps);
  void acquire();

 private:
  double rps_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

// Cache of raw response bodies, one JSON file per request hash. Reads take no
// lock; writes go through temp-file rename.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {}
  static std::string key(const std::string& url, const nlohmann::json& body);
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& value) const;

 private:
  std::filesystem::path dir_;
};

struct GatewayStats {
  uint64_t network_calls = 0;
  uint64_t cache_hits = 0;
  uint64_t retries = 0;
};

// OpenAI-compatible client for completions, embeddings and echo-logprob
// scoring, plus a fill-mask endpoint. Safe for concurrent callers.
class Gateway : public Completer,
                public Embedder,
                public MaskFiller,
                public PerplexityScorer {
 public:
  explicit Gateway(GatewayConfig cfg);

  CompletionResponse complete(const CompletionRequest& request) override;
  std::vector<std::vector<double>> embed(
      const std::vector<std::string>& texts) override;
  const std::string& mask_token() const override { return cfg_.mask_token; }
  std::vector<MaskFill> mask_fill(const std::string& text_with_mask,
                                  int k) override;
  double sequence_perplexity(const std::string& text) override;

  GatewayStats stats() const;
  const GatewayConfig& config() const { return cfg_; }

 private:
  // POSTs `body` to `url`; served from cache when `cacheable` and present.
  nlohmann::json post(const std::string& url, const nlohmann::json& body,
                      bool cacheable);
  std::string send_with_retries(const std::string& url,
                                const std::string& payload);

  GatewayConfig cfg_;
  DiskCache cache_;
  RateLimiter limiter_;
  std::optional<std::string> api_key_;
  std::atomic<uint64_t> network_calls_{0};
  std::atomic<uint64_t> cache_hits_{0};
  std::atomic<uint64_t> retries_{0};
};

// Builds a completion from an OpenAI-style payload, applying stop stripping.
CompletionResponse parse_completion(const nlohmann::json& payload,
                                    const std::vector<std::string>& stops);

}  // namespace advsp::llm
