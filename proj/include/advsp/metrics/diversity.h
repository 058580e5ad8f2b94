#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "advsp/common/error.h"

namespace advsp::metrics {

// Lowercase, drop ASCII punctuation, split on whitespace.
std::vector<std::string> diversity_tokens(std::string_view utterance);

double ttr(const std::vector<std::string>& tokens);

// M1^2 / (M2 - M1); +inf when every token is unique (M2 == M1).
double yules_i(const std::vector<std::string>& tokens);

inline constexpr double kMtldThreshold = 0.72;

// Mean of the forward and reversed factor scores.
double mtld(const std::vector<std::string>& tokens,
            double threshold = kMtldThreshold);

struct DiversityScores {
  double ttr = 0.0;
  double yules_i = 0.0;
  double mtld = 0.0;
  size_t tokens = 0;
};

// Scores the concatenated token stream of `utterances` in order.
DiversityScores diversity_report(const std::vector<std::string>& utterances);

}  // namespace advsp::metrics
