#include "advsp/mock/mock_llm.h"

#include <cctype>
#include <thread>

#include "advsp/common/error.h"
#include "advsp/common/text.h"
#include "httplib.h"

namespace advsp::mock {

using nlohmann::json;

namespace {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double token_logprob(std::string_view token, size_t position) {
  const uint64_t h = mix(fnv1a(token) + position);
  return -(0.1 + static_cast<double>(h % 6000) / 1000.0);
}

std::string key(std::string_view nl) {
  return std::string(text::trim(text::single_line(nl)));
}

// Splits text into pieces that concatenate back to it: each piece is a run
// of leading whitespace plus one word.
std::vector<std::string> pieces(const std::string& s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    const size_t start = i;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back(s.substr(start, i - start));
  }
  return out;
}

constexpr std::string_view kParaphrasePrefix =
    "Paraphrase the following question, preserving its exact meaning: ";
constexpr std::string_view kParaphraseSuffix = "\nParaphrase:";

const std::vector<std::string>& fill_vocabulary() {
  static const std::vector<std::string> kWords = {
      "the",   "a",     "all",   "exact", "total", "which", "many",    "state",
      "city",  "river", "major", "will",  "some",  "main",  "largest", "every"};
  return kWords;
}

}  // namespace

MockLlm::MockLlm(MockMode mode, std::map<std::string, std::string> gold_by_nl)
    : mode_(mode) {
  for (auto& [nl, sql] : gold_by_nl) add_gold(nl, sql);
}

void MockLlm::add_gold(const std::string& nl, const std::string& sql) {
  gold_[key(nl)] = sql;
}

std::string MockLlm::target_question(const std::string& prompt) {
  std::string body = prompt;
  const std::string primer = "\nSELECT";
  if (body.size() >= primer.size() &&
      body.compare(body.size() - primer.size(), primer.size(), primer) == 0) {
    body.resize(body.size() - primer.size());
  }
  const size_t nl = body.rfind("\n-- ");
  const size_t start = nl == std::string::npos ? (body.rfind("-- ", 0) == 0 ? 3 : 0) : nl + 4;
  return key(body.substr(start));
}

std::string MockLlm::sql_continuation(const std::string& prompt) const {
  if (mode_ == MockMode::kAlwaysWrong) return " -1 AS wrong;\n\n-- next";
  const auto it = gold_.find(target_question(prompt));
  if (it == gold_.end()) return " 'unknown question' AS answer;";
  std::string sql(text::trim(it->second));
  if (sql.size() >= 6 && text::iequals(sql.substr(0, 6), "select")) sql = sql.substr(6);
  if (sql.empty() || sql.back() != ';') sql += ';';
  // Trailing text after the terminator exercises client-side stop handling.
  return sql + "\n\n-- next question";
}

json MockLlm::completions(const json& body) const {
  const std::string prompt = body.value("prompt", "");
  const bool echo = body.value("echo", false);
  const bool want_logprobs = body.contains("logprobs") && !body["logprobs"].is_null();

  std::string out;
  if (echo) {
    out = prompt;
  } else if (prompt.rfind(kParaphrasePrefix, 0) == 0) {
    std::string nl = prompt.substr(kParaphrasePrefix.size());
    const size_t end = nl.rfind(kParaphraseSuffix);
    if (end != std::string::npos) nl.resize(end);
    out = " could you tell me " + key(nl) + "\nParaphrase:";
  } else {
    out = sql_continuation(prompt);
  }

  json choice = {{"text", out}, {"index", 0}, {"finish_reason", "stop"}};
  if (want_logprobs) {
    json tokens = json::array(), values = json::array();
    const auto parts = pieces(out);
    for (size_t i = 0; i < parts.size(); ++i) {
      tokens.push_back(parts[i]);
      if (echo && i == 0) {
        values.push_back(nullptr);
      } else {
        values.push_back(token_logprob(parts[i], i));
      }
    }
    choice["logprobs"] = {{"tokens", tokens}, {"token_logprobs", values}};
  }
  return {{"object", "text_completion"},
          {"model", body.value("model", "mock")},
          {"choices", json::array({choice})}};
}

json MockLlm::embeddings(const json& body) const {
  constexpr size_t kDim = 64;
  json inputs = body.at("input");
  if (inputs.is_string()) inputs = json::array({inputs});
  json data = json::array();
  for (size_t i = 0; i < inputs.size(); ++i) {
    std::string cleaned;
    for (char c : inputs[i].get<std::string>()) {
      if (!std::ispunct(static_cast<unsigned char>(c))) {
        cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    std::vector<double> v(kDim, 0.0);
    v[0] = 0.01;
    for (const auto& tok : text::split_whitespace(cleaned)) {
      const uint64_t h = fnv1a(tok);
      for (size_t d = 0; d < kDim; ++d) {
        v[d] += static_cast<double>(mix(h + d) % 2001) / 1000.0 - 1.0;
      }
    }
    data.push_back({{"object", "embedding"}, {"index", i}, {"embedding", v}});
  }
  return {{"object", "list"}, {"data", data}};
}

json MockLlm::fill_mask(const json& body) const {
  const std::string input = body.at("inputs").get<std::string>();
  int k = 5;
  if (body.contains("parameters")) k = body["parameters"].value("top_k", 5);
  const auto& vocab = fill_vocabulary();
  const size_t start = fnv1a(input) % vocab.size();
  json out = json::array();
  double score = 0.5;
  for (int i = 0; i < k && i < static_cast<int>(vocab.size()); ++i) {
    out.push_back({{"token_str", " " + vocab[(start + 7 * i) % vocab.size()]},
                   {"score", score}});
    score /= 2.0;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct MockLlmServer::Impl {
  MockLlm llm;
  httplib::Server server;
  std::thread thread;
  std::atomic<uint64_t> requests{0};

  explicit Impl(MockLlm m) : llm(std::move(m)) {
    auto route = [this](const std::string& path, auto handler) {
      server.Post(path, [this, handler](const httplib::Request& req, httplib::Response& res) {
        ++requests;
        try {
          const json out = (llm.*handler)(json::parse(req.body));
          res.set_content(out.dump(), "application/json");
        } catch (const std::exception& e) {
          res.status = 400;
          res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
      });
    };
    route("/v1/completions", &MockLlm::completions);
    route("/v1/embeddings", &MockLlm::embeddings);
    route("/fill-mask", &MockLlm::fill_mask);
  }
};

MockLlmServer::MockLlmServer(MockLlm llm) : impl_(std::make_unique<Impl>(std::move(llm))) {}

MockLlmServer::~MockLlmServer() { stop(); }

int MockLlmServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MockLlmServer::serve(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw IoError("cannot serve on " + host + ":" + std::to_string(port));
  }
}

void MockLlmServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

uint64_t MockLlmServer::requests() const { return impl_->requests.load(); }

}  // namespace advsp::mock
