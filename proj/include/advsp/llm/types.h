#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advsp/common/error.h"

namespace advsp::llm {

inline const std::vector<std::string>& default_stop_sequences() {
  static const std::vector<std::string> kStops = {"--", "\n\n", ";", "#"};
  return kStops;
}

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 200;
  double temperature = 0.0;
  std::vector<std::string> stop = default_stop_sequences();
  bool logprobs = false;  // ask for per-token logprobs of the continuation
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

struct CompletionResponse {
  std::string text;  // stop sequence excluded
  std::optional<std::vector<TokenLogprob>> token_logprobs;
};

struct MaskFill {
  std::string fill;
  double probability = 0.0;
};

enum class GatewayErrorKind {
  kTimeout,
  kConnection,
  kHttp,
  kMalformedPayload,
  kPrecondition,
  kUnsupported,
};

class GatewayError : public Error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& message,
               int http_status = 0)
      : Error(message), kind_(kind), http_status_(http_status) {}
  GatewayErrorKind kind() const { return kind_; }
  int http_status() const { return http_status_; }

 private:
  GatewayErrorKind kind_;
  int http_status_;
};

// Truncates `text` at the earliest occurrence of any stop sequence.
// Returns the cut position (text.size() when no stop occurs).
size_t strip_at_stop(std::string& text, const std::vector<std::string>& stops);

// Perplexity from per-token log-probabilities: exp(-mean(logprobs)).
double perplexity_from_logprobs(const std::vector<double>& logprobs);

// Abstract capabilities. The gateway implements all of them; tests substitute
// in-process fakes.
class Completer {
 public:
  virtual ~Completer() = default;
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  // One L2-normalized vector per text, in input order.
  virtual std::vector<std::vector<double>> embed(
      const std::vector<std::string>& texts) = 0;
};

class MaskFiller {
 public:
  virtual ~MaskFiller() = default;
  virtual const std::string& mask_token() const = 0;
  // At most k fills sorted by probability descending.
  virtual std::vector<MaskFill> mask_fill(const std::string& text_with_mask,
                                          int k) = 0;
};

class PerplexityScorer {
 public:
  virtual ~PerplexityScorer() = default;
  virtual double sequence_perplexity(const std::string& text) = 0;
};

}  // namespace advsp::llm
