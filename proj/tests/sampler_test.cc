#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "advsp/common/rng.h"
#include "advsp/corpus/dataset.h"
#include "advsp/sampler/sampler.h"
#include "sampler_oracles.h"
#include "support.h"

namespace advsp::sampler {
namespace {

using namespace advsp::testing;

Pool make_pool(const std::vector<std::string>& nls) {
  Pool p;
  for (size_t i = 0; i < nls.size(); ++i) {
    p.push_back({"p" + std::to_string(i), nls[i], "SELECT " + std::to_string(i), corpus::Split::kTrain});
  }
  return p;
}

TEST(Strategies, NamesRoundTrip) {
  EXPECT_EQ(all_strategies().size(), 7u);
  for (Strategy s : all_strategies()) EXPECT_EQ(parse_strategy(to_string(s)), s);
  EXPECT_FALSE(parse_strategy("nope"));
}

TEST(EditDistance, KnownPairs) {
  EXPECT_EQ(edit_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(edit_distance("", "abc"), 3u);
  EXPECT_EQ(edit_distance("flaw", "lawn"), 2u);
  EXPECT_EQ(edit_distance("same", "same"), 0u);
}

TEST(EditDistance, MatchesOracleAndIsAMetric) {
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_word(rng, 7), b = random_word(rng, 7), c = random_word(rng, 7);
    const size_t ab = edit_distance(a, b);
    ASSERT_EQ(ab, lev_oracle(a, b)) << a << " " << b;
    ASSERT_EQ(ab, edit_distance(b, a));
    ASSERT_EQ(ab == 0, a == b);
    ASSERT_LE(edit_distance(a, c), ab + edit_distance(b, c));
  }
}

TEST(EditDistance, MatrixIsSymmetricWithZeroDiagonal) {
  const auto d = edit_distance_matrix(make_pool({"abc", "abd", "xyz", "ab"}));
  ASSERT_EQ(d.values.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(d.values[i][i], 0.0);
    for (size_t j = 0; j < 4; ++j) EXPECT_EQ(d.values[i][j], d.values[j][i]);
  }
  EXPECT_EQ(d.values[0][1], 1.0);
  EXPECT_EQ(d.values[0][3], 1.0);
  EXPECT_EQ(d.labels, (std::vector<std::string>{"p0", "p1", "p2", "p3"}));
}

TEST(Tfidf, HandComputedTwoDocuments) {
  const auto f = tfidf_features(make_pool({"a b", "A c c"}));
  // columns follow the sorted vocabulary a, b, c
  ASSERT_EQ(f.labels, (std::vector<std::string>{"p0", "p1"}));
  ASSERT_EQ(f.rows[0].size(), 3u);
  // D = 2: idf(a) = ln(3/3)+1 = 1, idf(b) = idf(c) = ln(3/2)+1.
  const double r = std::log(1.5) + 1.0;
  const double n0 = std::sqrt(1.0 + r * r);
  const double n1 = std::sqrt(1.0 + 4.0 * r * r);
  ASSERT_EQ(f.rows.size(), 2u);
  EXPECT_NEAR(f.rows[0][0], 1.0 / n0, 1e-12);
  EXPECT_NEAR(f.rows[0][1], r / n0, 1e-12);
  EXPECT_NEAR(f.rows[0][2], 0.0, 1e-12);
  EXPECT_NEAR(f.rows[1][0], 1.0 / n1, 1e-12);
  EXPECT_NEAR(f.rows[1][1], 0.0, 1e-12);
  EXPECT_NEAR(f.rows[1][2], 2.0 * r / n1, 1e-12);
  EXPECT_THROW(tfidf_features({}), SamplerError);
}

TEST(KMeans, ConvergedSolutionIsLocallyOptimal) {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const size_t n = 5 + rng.uniform_index(20);
    const size_t k = 1 + rng.uniform_index(std::min<size_t>(n, 5));
    const auto pts = random_points(rng, n, 2);
    const auto r = kmeans(pts, k, static_cast<uint64_t>(t));
    ASSERT_EQ(r.assignments.size(), n);
    ASSERT_EQ(r.centroids.size(), k);
    ASSERT_LT(r.iterations, kMaxKMeansIterations);
    std::string why;
    ASSERT_TRUE(kmeans_locally_optimal(pts, r, &why)) << why;
    ASSERT_EQ(kmeans(pts, k, static_cast<uint64_t>(t)).assignments, r.assignments);
  }
}

TEST(KMeans, RejectsBadInput) {
  EXPECT_THROW(kmeans({{1.0}}, 0, 1), SamplerError);
  EXPECT_THROW(kmeans({{1.0}, {1.0, 2.0}}, 1, 1), SamplerError);
}

TEST(KMedoids, MatchesExhaustiveSearchOnSmallInputs) {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const size_t n = 3 + rng.uniform_index(6);
    const size_t k = 1 + rng.uniform_index(3);
    const auto pts = random_points(rng, n, 2);
    const auto d = euclidean_matrix(pts);
    const auto r = kmedoids(d, k, static_cast<uint64_t>(t));
    ASSERT_EQ(r.medoids.size(), k);
    ASSERT_TRUE(std::is_sorted(r.medoids.begin(), r.medoids.end()));
    ASSERT_NEAR(r.cost, medoid_cost(d, r.medoids), 1e-9);
    ASSERT_NEAR(r.cost, best_cost_exhaustive(d, k), 1e-9) << "n=" << n << " k=" << k;
    for (size_t i = 1; i < r.cost_history.size(); ++i) {
      ASSERT_LE(r.cost_history[i], r.cost_history[i - 1] + 1e-12);
    }
    for (size_t i = 0; i < n; ++i) {
      const double own = d.values[i][r.medoids[r.assignments[i]]];
      for (size_t m : r.medoids) ASSERT_LE(own, d.values[i][m] + 1e-12);
    }
  }
}

TEST(Perplexity, DirectionsAndTies) {
  const std::vector<double> ppl = {5.0, 1.0, 9.0, 5.0, 3.0};
  EXPECT_EQ(rank_by_perplexity(ppl, 3, PplDirection::kAsc), (std::vector<size_t>{2, 0, 3}));
  EXPECT_EQ(rank_by_perplexity(ppl, 3, PplDirection::kDesc), (std::vector<size_t>{1, 4, 0}));
  EXPECT_THROW(rank_by_perplexity(ppl, 6, PplDirection::kAsc), SamplerError);
}

TEST(Perplexity, SelectUsesScorer) {
  const auto pool = make_pool({"low", "mid", "high", "mid2"});
  TableScorer scorer({{"low", 1.5}, {"mid", 4.0}, {"high", 20.0}, {"mid2", 4.0}});
  SamplerDeps deps;
  deps.scorer = &scorer;
  const auto asc = select(Strategy::kPPLAsc, pool, 2, 0, deps);
  ASSERT_EQ(asc.selected.size(), 2u);
  EXPECT_EQ(asc.selected[0].nl, "high");
  EXPECT_EQ(asc.selected[1].nl, "mid");
  EXPECT_EQ(*asc.scores[0], 20.0);
  const auto desc = select(Strategy::kPPLDesc, pool, 2, 0, deps);
  EXPECT_EQ(desc.selected[0].nl, "low");
  EXPECT_EQ(desc.selected[1].nl, "mid");
  EXPECT_THROW(select(Strategy::kPPLAsc, pool, 2, 0, {}), ConfigError);
}

TEST(Random, UniformSubsetInPoolOrder) {
  const auto pool = make_pool({"a", "b", "c", "d", "e", "f"});
  std::map<std::string, int> hits;
  for (uint64_t s = 0; s < 3000; ++s) {
    const auto sel = sample_random(pool, 2, s);
    ASSERT_EQ(sel.size(), 2u);
    ASSERT_LT(sel[0].id, sel[1].id);
    for (const auto& e : sel) ++hits[e.id];
  }
  // Each member is drawn with probability 1/3; 1000 expected hits.
  for (const auto& [id, h] : hits) EXPECT_NEAR(h, 1000, 120) << id;
  EXPECT_THROW(sample_random(pool, 7, 0), SamplerError);
}

TEST(Confidence, LowestMeanLogprobFirst) {
  const auto pool = make_pool({"sure", "unsure", "middling"});
  FnCompleter completer([](const llm::CompletionRequest& r) {
    EXPECT_TRUE(r.logprobs);
    std::vector<llm::TokenLogprob> lp;
    if (r.prompt.find("-- unsure\nSELECT") != std::string::npos) lp = {{"a", -3.0}, {"b", -1.0}};
    if (r.prompt.find("-- sure\nSELECT") != std::string::npos) lp = {{"a", -0.1}};
    if (r.prompt.find("-- middling\nSELECT") != std::string::npos) lp = {{"a", -1.0}, {"b", -0.5}};
    return llm::CompletionResponse{" 1", lp};
  });
  SamplerDeps deps;
  deps.completer = &completer;
  deps.schema_text = "CREATE TABLE t (a)";
  const auto s = select(Strategy::kConfidence, pool, 2, 0, deps);
  EXPECT_EQ(s.selected[0].nl, "unsure");
  EXPECT_EQ(s.selected[1].nl, "middling");
  EXPECT_DOUBLE_EQ(*s.scores[0], -2.0);
  EXPECT_DOUBLE_EQ(*s.scores[1], -0.75);

  FnCompleter empty([](const llm::CompletionRequest&) {
    return llm::CompletionResponse{"", std::vector<llm::TokenLogprob>{}};
  });
  const auto sc = confidence_scores(pool, empty, "x", {});
  EXPECT_TRUE(std::isinf(sc[0]) && sc[0] < 0);
  FnCompleter none([](const llm::CompletionRequest&) { return llm::CompletionResponse{"", std::nullopt}; });
  EXPECT_THROW(confidence_scores(pool, none, "x", {}), llm::GatewayError);
}

TEST(Manifest, NonFiniteScoresBecomeNull) {
  Selection s;
  s.strategy = Strategy::kConfidence;
  s.n = 2;
  s.seed = 9;
  s.selected = make_pool({"a", "b"});
  s.scores = {-std::numeric_limits<double>::infinity(), -0.5};
  const auto j = manifest_json(s);
  EXPECT_EQ(j["strategy"], to_string(Strategy::kConfidence));
  EXPECT_EQ(j["N"], 2);
  EXPECT_EQ(j["selected_ids"], nlohmann::json({"p0", "p1"}));
  EXPECT_TRUE(j["scores"][0].is_null());
  EXPECT_EQ(j["scores"][1], -0.5);
}

class AllStrategies : public ::testing::TestWithParam<Strategy> {};

TEST_P(AllStrategies, DeterministicAndSized) {
  const auto d = corpus::load_dataset(data_dir() / "geo/geoquery.jsonl");
  const auto train = d.split(corpus::Split::kTrain);
  const Pool pool(train.begin(), train.begin() + 24);
  std::map<std::string, std::vector<double>> vecs;
  std::map<std::string, double> ppl;
  for (const auto& ex : pool) {
    const auto h = std::hash<std::string>{}(ex.nl);
    vecs[ex.nl] = {static_cast<double>(h % 97), static_cast<double>(h % 89), static_cast<double>(h % 83)};
    ppl[ex.nl] = 1.0 + static_cast<double>(h % 1000) / 10.0;
  }
  TableEmbedder embedder(vecs);
  TableScorer scorer(ppl);
  FnCompleter completer([](const llm::CompletionRequest& r) {
    const auto h = std::hash<std::string>{}(r.prompt);
    return llm::CompletionResponse{" 1", std::vector<llm::TokenLogprob>{{"1", -static_cast<double>(h % 100) / 10.0}}};
  });
  SamplerDeps deps{&completer, &embedder, &scorer, "CREATE TABLE t (a)", {}, 4};
  for (size_t n : {0u, 1u, 5u, 10u}) {
    const auto a = select(GetParam(), pool, n, 42, deps);
    const auto b = select(GetParam(), pool, n, 42, deps);
    ASSERT_EQ(a.selected.size(), n);
    ASSERT_EQ(a.scores.size(), n);
    ASSERT_EQ(a.selected, b.selected);
    std::set<std::string> ids;
    for (const auto& e : a.selected) ids.insert(e.id);
    ASSERT_EQ(ids.size(), n);
  }
  EXPECT_THROW(select(GetParam(), pool, 25, 42, deps), SamplerError);
}

INSTANTIATE_TEST_SUITE_P(Sampler, AllStrategies, ::testing::ValuesIn(all_strategies()),
                         [](const auto& info) {
                           std::string s(to_string(info.param));
                           std::string out;
                           for (char c : s) {
                             if (std::isalnum(static_cast<unsigned char>(c))) out += c;
                           }
                           return out;
                         });

}  // namespace
}  // namespace advsp::sampler
