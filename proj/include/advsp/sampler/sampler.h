#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advsp/corpus/dataset.h"
#include "advsp/llm/types.h"
#include "advsp/prompt/prompt.h"
#include "json.hpp"

namespace advsp::sampler {

enum class Strategy {
  kRandom,
  kConfidence,
  kClusterED,
  kClusterTFIDF,
  kClusterCWE,
  kPPLAsc,
  kPPLDesc,
};

const std::vector<Strategy>& all_strategies();
std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

class SamplerError : public Error {
 public:
  using Error::Error;
};

using Pool = std::vector<corpus::Example>;

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
};

struct DistanceMatrix {
  std::vector<std::vector<double>> values;
  std::vector<std::string> labels;
};

// N pool members chosen uniformly without replacement, returned in pool order.
Pool sample_random(const Pool& pool, size_t n, uint64_t seed);

// Mean token logprob of the zero-shot completion for each utterance. A
// completion without tokens scores -inf.
std::vector<double> confidence_scores(const Pool& pool, llm::Completer& completer,
                                      std::string_view schema_text,
                                      const prompt::PromptConfig& cfg,
                                      size_t max_in_flight = 1);

// Lowercased whitespace tokens, raw tf, smoothed idf ln((1+D)/(1+df)) + 1,
// rows L2-normalized. Vocabulary columns are sorted.
FeatureMatrix tfidf_features(const Pool& pool);

// Character-level Levenshtein distance over bytes.
size_t edit_distance(std::string_view a, std::string_view b);

DistanceMatrix edit_distance_matrix(const Pool& pool);

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

struct KMeansResult {
  std::vector<size_t> assignments;
  std::vector<std::vector<double>> centroids;
  int iterations = 0;
};

inline constexpr int kMaxKMeansIterations = 300;

// Lloyd's algorithm with k-means++ seeding. Empty clusters are reseeded with
// the point farthest from its centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, size_t k,
                    uint64_t seed);

struct KMedoidsResult {
  std::vector<size_t> medoids;      // ascending
  std::vector<size_t> assignments;  // index into medoids
  double cost = 0.0;
  std::vector<double> cost_history;  // BUILD then one entry per accepted swap
};

double medoid_cost(const DistanceMatrix& d, const std::vector<size_t>& medoids);

// PAM: BUILD initialisation followed by best-improvement swaps, repeated from
// seeded random starts; the cheapest solution wins.
KMedoidsResult kmedoids(const DistanceMatrix& d, size_t k, uint64_t seed);

enum class FeatureKind { kED, kTFIDF, kCWE };

struct ClusterSelection {
  std::vector<size_t> indices;    // pool order
  std::vector<double> distances;  // to the cluster centre, aligned
};

ClusterSelection sample_cluster(const Pool& pool, size_t n, FeatureKind kind,
                                llm::Embedder* embedder, uint64_t seed);

enum class PplDirection { kAsc, kDesc };

std::vector<double> perplexities(const Pool& pool, llm::PerplexityScorer& scorer,
                                 size_t max_in_flight = 1);

// kAsc keeps the N highest perplexities (descending), kDesc the N lowest
// (ascending). Ties keep pool order.
std::vector<size_t> rank_by_perplexity(const std::vector<double>& ppl, size_t n,
                                       PplDirection direction);

struct Selection {
  Strategy strategy = Strategy::kRandom;
  size_t n = 0;
  uint64_t seed = 0;
  Pool selected;
  std::vector<std::optional<double>> scores;  // aligned with selected
};

struct SamplerDeps {
  llm::Completer* completer = nullptr;
  llm::Embedder* embedder = nullptr;
  llm::PerplexityScorer* scorer = nullptr;
  std::string schema_text;
  prompt::PromptConfig prompt;
  size_t max_in_flight = 1;
};

Selection select(Strategy strategy, const Pool& pool, size_t n, uint64_t seed,
                 const SamplerDeps& deps);

// Manifest {strategy, N, seed, selected_ids, scores}; non-finite scores are
// written as null.
nlohmann::json manifest_json(const Selection& s);

}  // namespace advsp::sampler
