#include "advsp/llm/gateway.h"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "advsp/common/files.h"
#include "advsp/common/text.h"
#include "httplib.h"

namespace advsp::llm {

using nlohmann::json;

size_t strip_at_stop(std::string& text, const std::vector<std::string>& stops) {
  size_t cut = text.size();
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    const size_t pos = text.find(stop);
    if (pos != std::string::npos && pos < cut) cut = pos;
  }
  text.resize(cut);
  return cut;
}

double perplexity_from_logprobs(const std::vector<double>& logprobs) {
  if (logprobs.empty()) {
    throw GatewayError(GatewayErrorKind::kPrecondition,
                       "perplexity of an empty token sequence");
  }
  double sum = 0.0;
  for (double lp : logprobs) sum += lp;
  return std::exp(-sum / static_cast<double>(logprobs.size()));
}

void GatewayConfig::validate() const {
  if (!(timeout_seconds > 0)) throw ConfigError("gateway timeout must be > 0");
  if (max_retries < 0) throw ConfigError("gateway max_retries must be >= 0");
  if (retry_base_delay_ms < 0) throw ConfigError("retry delay must be >= 0");
  if (rate_limit_rps < 0) throw ConfigError("rate_limit_rps must be >= 0");
  if (base_url.empty()) throw ConfigError("gateway base_url is empty");
  if (mask_token.empty()) throw ConfigError("gateway mask_token is empty");
}

GatewayConfig gateway_config_from_json(const json& j) {
  GatewayConfig cfg;
  try {
    cfg.base_url = j.value("base_url", cfg.base_url);
    cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
    cfg.model = j.value("model", cfg.model);
    cfg.embed_model = j.value("embed_model", cfg.embed_model);
    cfg.ppl_model = j.value("ppl_model", cfg.ppl_model);
    cfg.mask_model_url = j.value("mask_model_url", cfg.mask_model_url);
    cfg.mask_token = j.value("mask_token", cfg.mask_token);
    cfg.timeout_seconds = j.value("timeout_seconds", cfg.timeout_seconds);
    cfg.max_retries = j.value("max_retries", cfg.max_retries);
    cfg.retry_base_delay_ms = j.value("retry_base_delay_ms", cfg.retry_base_delay_ms);
    cfg.rate_limit_rps = j.value("rate_limit_rps", cfg.rate_limit_rps);
    cfg.cache_dir = j.value("cache_dir", cfg.cache_dir.string());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("gateway config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const GatewayConfig& cfg) {
  return {{"base_url", cfg.base_url},
          {"api_key_env", cfg.api_key_env},
          {"model", cfg.model},
          {"embed_model", cfg.embed_model},
          {"ppl_model", cfg.ppl_model},
          {"mask_model_url", cfg.mask_model_url},
          {"mask_token", cfg.mask_token},
          {"timeout_seconds", cfg.timeout_seconds},
          {"max_retries", cfg.max_retries},
          {"retry_base_delay_ms", cfg.retry_base_delay_ms},
          {"rate_limit_rps", cfg.rate_limit_rps},
          {"cache_dir", cfg.cache_dir.string()}};
}

json completion_body(const std::string& model, const CompletionRequest& req) {
  if (req.max_tokens < 1) {
    throw GatewayError(GatewayErrorKind::kPrecondition, "max_tokens must be >= 1");
  }
  if (req.temperature < 0) {
    throw GatewayError(GatewayErrorKind::kPrecondition, "temperature must be >= 0");
  }
  json body = {{"model", model},
               {"prompt", req.prompt},
               {"max_tokens", req.max_tokens},
               {"temperature", req.temperature},
               {"stop", req.stop}};
  if (req.logprobs) body["logprobs"] = 1;
  return body;
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double rps)
    : rps_(rps),
      capacity_(std::max(1.0, rps)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (rps_ <= 0) return;
  std::unique_lock lock(mu_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * rps_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rps_;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    lock.lock();
  }
}

// ---------------------------------------------------------------------------

std::string DiskCache::key(const std::string& url, const json& body) {
  return files::sha256_hex(url + "\n" + body.dump());
}

std::optional<std::string> DiskCache::get(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    return files::read_text(path);
  } catch (const IoError&) {
    return std::nullopt;
  }
}

void DiskCache::put(const std::string& key, const std::string& value) const {
  files::write_text_atomic(dir_ / (key + ".json"), value);
}

// ---------------------------------------------------------------------------

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("URL without scheme: " + url);
  }
  const size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string join_url(const std::string& base, const std::string& suffix) {
  std::string out = base;
  while (!out.empty() && out.back() == '/') out.pop_back();
  return out + suffix;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

const json& require(const json& obj, const char* key, const char* what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw GatewayError(GatewayErrorKind::kMalformedPayload,
                       std::string(what) + ": missing '" + key + "'");
  }
  return obj.at(key);
}

}  // namespace

CompletionResponse parse_completion(const json& payload,
                                    const std::vector<std::string>& stops) {
  const json& choices = require(payload, "choices", "completion");
  if (!choices.is_array() || choices.empty() || !choices[0].is_object()) {
    throw GatewayError(GatewayErrorKind::kMalformedPayload,
                       "completion: empty choices");
  }
  const json& choice = choices[0];
  const json& text = require(choice, "text", "completion");
  if (!text.is_string()) {
    throw GatewayError(GatewayErrorKind::kMalformedPayload,
                       "completion: text is not a string");
  }
  CompletionResponse out;
  out.text = text.get<std::string>();
  const size_t cut = strip_at_stop(out.text, stops);

  auto lp = choice.find("logprobs");
  if (lp != choice.end() && lp->is_object() && lp->contains("tokens") &&
      lp->contains("token_logprobs")) {
    const json& tokens = (*lp)["tokens"];
    const json& values = (*lp)["token_logprobs"];
    if (!tokens.is_array() || !values.is_array() ||
        tokens.size() != values.size()) {
      throw GatewayError(GatewayErrorKind::kMalformedPayload,
                         "completion: inconsistent logprobs arrays");
    }
    std::vector<TokenLogprob> kept;
    size_t consumed = 0;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (!tokens[i].is_string() || !values[i].is_number()) {
        throw GatewayError(GatewayErrorKind::kMalformedPayload,
                           "completion: bad logprob entry");
      }
      const std::string tok = tokens[i].get<std::string>();
      // Tokens that reach into the stop sequence are not part of the output.
      if (consumed + tok.size() > cut) break;
      consumed += tok.size();
      kept.push_back({tok, values[i].get<double>()});
    }
    out.token_logprobs = std::move(kept);
  }
  return out;
}

Gateway::Gateway(GatewayConfig cfg)
    : cfg_(std::move(cfg)),
      cache_(cfg_.cache_dir),
      limiter_(cfg_.rate_limit_rps) {
  cfg_.validate();
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
      api_key_ = key;
    }
  }
}

GatewayStats Gateway::stats() const {
  return {network_calls_.load(), cache_hits_.load(), retries_.load()};
}

std::string Gateway::send_with_retries(const std::string& url,
                                       const std::string& payload) {
  const Endpoint ep = split_url(url);
  GatewayErrorKind last_kind = GatewayErrorKind::kConnection;
  std::string last_message;
  int last_status = 0;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      ++retries_;
      const auto delay = std::chrono::milliseconds(
          static_cast<int64_t>(cfg_.retry_base_delay_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    limiter_.acquire();
    httplib::Client client(ep.origin);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(cfg_.timeout_seconds));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);
    ++network_calls_;
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last_kind = (err == httplib::Error::Read ||
                   err == httplib::Error::ConnectionTimeout)
                      ? GatewayErrorKind::kTimeout
                      : GatewayErrorKind::kConnection;
      last_message = url + ": " + httplib::to_string(err);
      last_status = 0;
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_kind = GatewayErrorKind::kHttp;
    last_status = res->status;
    last_message = url + ": HTTP " + std::to_string(res->status) + " " +
                   res->body.substr(0, 200);
    if (!retryable_status(res->status)) break;
  }
  if (last_kind == GatewayErrorKind::kTimeout) {
    last_message = "timed out after " + std::to_string(cfg_.max_retries) +
                   " retries: " + last_message;
  }
  throw GatewayError(last_kind, last_message, last_status);
}

json Gateway::post(const std::string& url, const json& body, bool cacheable) {
  const std::string key = DiskCache::key(url, body);
  if (cacheable) {
    if (auto hit = cache_.get(key)) {
      try {
        json parsed = json::parse(*hit);
        ++cache_hits_;
        return parsed;
      } catch (const json::parse_error&) {
        // Corrupt entry: fall through and refetch.
      }
    }
  }
  const std::string raw = send_with_retries(url, body.dump());
  json parsed;
  try {
    parsed = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw GatewayError(GatewayErrorKind::kMalformedPayload,
                       url + ": response is not JSON: " + e.what());
  }
  if (cacheable) cache_.put(key, raw);
  return parsed;
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
  const json body = completion_body(cfg_.model, request);
  const json payload = post(join_url(cfg_.base_url, "/completions"), body,
                            request.temperature == 0.0);
  return parse_completion(payload, request.stop);
}

std::vector<std::vector<double>> Gateway::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) {
    throw GatewayError(GatewayErrorKind::kPrecondition,
                       "embed: empty input list");
  }
  constexpr size_t kBatch = 128;
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (size_t start = 0; start < texts.size(); start += kBatch) {
    const size_t end = std::min(texts.size(), start + kBatch);
    const std::vector<std::string> batch(texts.begin() + start,
                                         texts.begin() + end);
    const json body = {{"model", cfg_.embed_model}, {"input", batch}};
    const json payload =
        post(join_url(cfg_.base_url, "/embeddings"), body, true);
    const json& data = require(payload, "data", "embeddings");
    if (!data.is_array() || data.size() != batch.size()) {
      throw GatewayError(GatewayErrorKind::kMalformedPayload,
                         "embeddings: expected " + std::to_string(batch.size()) +
                             " vectors");
    }
    std::vector<std::vector<double>> vectors(batch.size());
    for (size_t i = 0; i < data.size(); ++i) {
      const size_t index = data[i].value("index", i);
      if (index >= batch.size() || !vectors[index].empty()) {
        throw GatewayError(GatewayErrorKind::kMalformedPayload,
                           "embeddings: bad index");
      }
      const json& v = require(data[i], "embedding", "embeddings");
      if (!v.is_array() || v.empty()) {
        throw GatewayError(GatewayErrorKind::kMalformedPayload,
                           "embeddings: empty vector");
      }
      vectors[index] = v.get<std::vector<double>>();
    }
    for (auto& v : vectors) {
      if (!out.empty() && v.size() != out.front().size()) {
        throw GatewayError(GatewayErrorKind::kMalformedPayload,
                           "embeddings: dimension mismatch in batch");
      }
      if (out.empty() && !vectors.empty() && v.size() != vectors[0].size()) {
        throw GatewayError(GatewayErrorKind::kMalformedPayload,
                           "embeddings: dimension mismatch in batch");
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (!(norm > 0)) {
        throw GatewayError(GatewayErrorKind::kMalformedPayload,
                           "embeddings: zero vector");
      }
      for (double& x : v) x /= norm;
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<MaskFill> Gateway::mask_fill(const std::string& text_with_mask,
                                         int k) {
  const size_t masks = text::count_occurrences(text_with_mask, cfg_.mask_token);
  if (masks != 1) {
    throw GatewayError(GatewayErrorKind::kPrecondition,
                       "mask_fill: expected exactly one " + cfg_.mask_token +
                           ", found " + std::to_string(masks));
  }
  if (k < 1) {
    throw GatewayError(GatewayErrorKind::kPrecondition, "mask_fill: k < 1");
  }
  const json body = {{"inputs", text_with_mask},
                     {"parameters", {{"top_k", k}}}};
  json payload = post(cfg_.mask_model_url, body, true);
  // Some servers wrap single-mask results in an outer list.
  if (payload.is_array() && payload.size() == 1 && payload[0].is_array()) {
    payload = payload[0];
  }
  if (!payload.is_array()) {
    throw GatewayError(GatewayErrorKind::kMalformedPayload,
                       "fill-mask: expected a list");
  }
  std::vector<MaskFill> fills;
  for (const auto& entry : payload) {
    const json& token = require(entry, "token_str", "fill-mask");
    const json& score = require(entry, "score", "fill-mask");
    if (!token.is_string() || !score.is_number()) {
      throw GatewayError(GatewayErrorKind::kMalformedPayload,
                         "fill-mask: bad entry");
    }
    const double p = score.get<double>();
    if (!(p > 0.0 && p <= 1.0)) {
      throw GatewayError(GatewayErrorKind::kMalformedPayload,
                         "fill-mask: probability outside (0, 1]");
    }
    fills.push_back({std::string(text::trim(token.get<std::string>())), p});
  }
  std::stable_sort(fills.begin(), fills.end(),
                   [](const MaskFill& a, const MaskFill& b) {
                     return a.probability > b.probability;
                   });
  if (fills.size() > static_cast<size_t>(k)) fills.resize(k);
  return fills;
}

double Gateway::sequence_perplexity(const std::string& text) {
  if (text::trim(text).empty()) {
    throw GatewayError(GatewayErrorKind::kPrecondition,
                       "sequence_perplexity: empty text");
  }
  // max_tokens 0 with echo scores the prompt without generating.
  const json body = {{"model", cfg_.ppl_model}, {"prompt", text},
                     {"max_tokens", 0},         {"temperature", 0},
                     {"echo", true},            {"logprobs", 0}};
  const json payload =
      post(join_url(cfg_.base_url, "/completions"), body, true);
  const json& choices = require(payload, "choices", "scoring");
  if (!choices.is_array() || choices.empty()) {
    throw GatewayError(GatewayErrorKind::kMalformedPayload,
                       "scoring: empty choices");
  }
  auto lp = choices[0].find("logprobs");
  if (lp == choices[0].end() || !lp->is_object() ||
      !lp->contains("token_logprobs") || !(*lp)["token_logprobs"].is_array()) {
    throw GatewayError(GatewayErrorKind::kUnsupported,
                       "scoring endpoint returned no token logprobs");
  }
  std::vector<double> values;
  for (const auto& v : (*lp)["token_logprobs"]) {
    // The first token has no context and is reported as null.
    if (v.is_number()) values.push_back(v.get<double>());
  }
  if (values.empty()) {
    throw GatewayError(GatewayErrorKind::kPrecondition,
                       "sequence_perplexity: no scored tokens");
  }
  return perplexity_from_logprobs(values);
}

}  // namespace advsp::llm
