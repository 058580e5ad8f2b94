#include "advsp/metrics/diversity.h"

#include <cctype>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "advsp/common/text.h"

namespace advsp::metrics {

namespace {

void require_tokens(const std::vector<std::string>& tokens, const char* what) {
  if (tokens.empty()) throw Error(std::string(what) + ": empty token stream");
}

double factor_score(const std::vector<std::string>& tokens, double threshold,
                    bool reversed) {
  double factors = 0.0;
  std::unordered_set<std::string> types;
  size_t count = 0;
  const size_t n = tokens.size();
  for (size_t k = 0; k < n; ++k) {
    const auto& tok = tokens[reversed ? n - 1 - k : k];
    ++count;
    types.insert(tok);
    const double ratio = static_cast<double>(types.size()) / static_cast<double>(count);
    if (ratio < threshold) {
      factors += 1.0;
      types.clear();
      count = 0;
    }
  }
  if (count > 0) {
    const double ratio = static_cast<double>(types.size()) / static_cast<double>(count);
    factors += (1.0 - ratio) / (1.0 - threshold);
  }
  if (factors == 0.0) return static_cast<double>(n);
  return static_cast<double>(n) / factors;
}

}  // namespace

std::vector<std::string> diversity_tokens(std::string_view utterance) {
  std::string cleaned;
  cleaned.reserve(utterance.size());
  for (char c : utterance) {
    if (std::ispunct(static_cast<unsigned char>(c))) continue;
    cleaned.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return text::split_whitespace(cleaned);
}

double ttr(const std::vector<std::string>& tokens) {
  require_tokens(tokens, "ttr");
  std::unordered_set<std::string> types(tokens.begin(), tokens.end());
  return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

double yules_i(const std::vector<std::string>& tokens) {
  require_tokens(tokens, "yules_i");
  std::unordered_map<std::string, size_t> freq;
  for (const auto& t : tokens) ++freq[t];
  std::map<size_t, size_t> spectrum;  // frequency -> number of types
  for (const auto& [_, f] : freq) ++spectrum[f];
  const double m1 = static_cast<double>(freq.size());
  double m2 = 0.0;
  for (const auto& [i, v] : spectrum) {
    m2 += static_cast<double>(i) * static_cast<double>(i) * static_cast<double>(v);
  }
  if (m2 == m1) return std::numeric_limits<double>::infinity();
  return m1 * m1 / (m2 - m1);
}

double mtld(const std::vector<std::string>& tokens, double threshold) {
  require_tokens(tokens, "mtld");
  return (factor_score(tokens, threshold, false) +
          factor_score(tokens, threshold, true)) / 2.0;
}

DiversityScores diversity_report(const std::vector<std::string>& utterances) {
  std::vector<std::string> stream;
  for (const auto& u : utterances) {
    auto toks = diversity_tokens(u);
    stream.insert(stream.end(), toks.begin(), toks.end());
  }
  if (stream.empty()) throw Error("diversity_report: no tokens after tokenization");
  return {ttr(stream), yules_i(stream), mtld(stream), stream.size()};
}

}  // namespace advsp::metrics
