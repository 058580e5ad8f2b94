#include "advsp/sampler/sampler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "advsp/common/parallel.h"
#include "advsp/common/rng.h"
#include "advsp/common/text.h"

namespace advsp::sampler {

using nlohmann::json;

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> kAll = {
      Strategy::kRandom,       Strategy::kConfidence, Strategy::kClusterED,
      Strategy::kClusterTFIDF, Strategy::kClusterCWE, Strategy::kPPLAsc,
      Strategy::kPPLDesc};
  return kAll;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kRandom: return "Random";
    case Strategy::kConfidence: return "Confidence";
    case Strategy::kClusterED: return "Cluster-ED";
    case Strategy::kClusterTFIDF: return "Cluster-TF-IDF";
    case Strategy::kClusterCWE: return "Cluster-CWE";
    case Strategy::kPPLAsc: return "PPL-Asc";
    case Strategy::kPPLDesc: return "PPL-Desc";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : all_strategies()) {
    if (text::iequals(name, to_string(s))) return s;
  }
  return std::nullopt;
}

namespace {

void check_n(size_t n, size_t size) {
  if (n > size) {
    throw SamplerError("cannot select " + std::to_string(n) + " from a pool of " +
                       std::to_string(size));
  }
}

}  // namespace

Pool sample_random(const Pool& pool, size_t n, uint64_t seed) {
  check_n(n, pool.size());
  Rng rng(seed);
  auto picks = rng.sample_without_replacement(pool.size(), n);
  std::sort(picks.begin(), picks.end());
  Pool out;
  for (size_t i : picks) out.push_back(pool[i]);
  return out;
}

std::vector<double> confidence_scores(const Pool& pool, llm::Completer& completer,
                                      std::string_view schema_text,
                                      const prompt::PromptConfig& cfg,
                                      size_t max_in_flight) {
  return parallel_map(pool.size(), max_in_flight, [&](size_t i) {
    llm::CompletionRequest req;
    req.prompt = prompt::assemble(schema_text, cfg, {}, pool[i].nl).text;
    req.logprobs = true;
    const auto resp = completer.complete(req);
    if (!resp.token_logprobs) {
      throw llm::GatewayError(llm::GatewayErrorKind::kUnsupported,
                              "completion returned no token logprobs");
    }
    const auto& lps = *resp.token_logprobs;
    if (lps.empty()) return -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& t : lps) sum += t.logprob;
    return sum / static_cast<double>(lps.size());
  });
}

FeatureMatrix tfidf_features(const Pool& pool) {
  if (pool.empty()) throw SamplerError("tfidf_features: empty pool");
  std::vector<std::map<std::string, int>> counts(pool.size());
  std::map<std::string, int> df;
  for (size_t i = 0; i < pool.size(); ++i) {
    for (const auto& tok : text::split_whitespace(text::to_lower(pool[i].nl))) {
      if (counts[i][tok]++ == 0) ++df[tok];
    }
  }
  std::map<std::string, size_t> column;
  for (const auto& [tok, _] : df) column.emplace(tok, column.size());
  const double d = static_cast<double>(pool.size());
  FeatureMatrix m;
  for (size_t i = 0; i < pool.size(); ++i) {
    std::vector<double> row(column.size(), 0.0);
    for (const auto& [tok, tf] : counts[i]) {
      const double idf = std::log((1.0 + d) / (1.0 + df[tok])) + 1.0;
      row[column[tok]] = tf * idf;
    }
    double norm = 0.0;
    for (double x : row) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (double& x : row) x /= norm;
    }
    m.rows.push_back(std::move(row));
    m.labels.push_back(pool[i].id);
  }
  return m;
}

size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), size_t{0});
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

DistanceMatrix edit_distance_matrix(const Pool& pool) {
  DistanceMatrix d;
  d.values.assign(pool.size(), std::vector<double>(pool.size(), 0.0));
  for (size_t i = 0; i < pool.size(); ++i) {
    d.labels.push_back(pool[i].id);
    for (size_t j = i + 1; j < pool.size(); ++j) {
      const double v = static_cast<double>(edit_distance(pool[i].nl, pool[j].nl));
      d.values[i][j] = v;
      d.values[j][i] = v;
    }
  }
  return d;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

// ---------------------------------------------------------------------------
// k-means

namespace {

size_t nearest(const std::vector<double>& p,
               const std::vector<std::vector<double>>& centroids, double* dist) {
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<std::vector<double>> kmeans_pp(const std::vector<std::vector<double>>& pts,
                                           size_t k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  std::vector<bool> chosen(pts.size(), false);
  size_t first = rng.uniform_index(pts.size());
  centroids.push_back(pts[first]);
  chosen[first] = true;
  std::vector<double> d2(pts.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      nearest(pts[i], centroids, &d2[i]);
      total += d2[i];
    }
    size_t pick = pts.size();
    if (total > 0) {
      double target = rng.uniform_real() * total;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (d2[i] <= 0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0) break;
      }
    } else {
      // All remaining points coincide with a centre; take any unused one.
      std::vector<size_t> unused;
      for (size_t i = 0; i < pts.size(); ++i) {
        if (!chosen[i]) unused.push_back(i);
      }
      pick = unused[rng.uniform_index(unused.size())];
    }
    chosen[pick] = true;
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

std::vector<double> mean_of(const std::vector<std::vector<double>>& pts,
                            const std::vector<size_t>& assign, size_t c,
                            size_t dim, size_t* count) {
  std::vector<double> m(dim, 0.0);
  size_t n = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (assign[i] != c) continue;
    ++n;
    for (size_t j = 0; j < dim; ++j) m[j] += pts[i][j];
  }
  if (n > 0) {
    for (double& x : m) x /= static_cast<double>(n);
  }
  *count = n;
  return m;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, size_t k,
                    uint64_t seed) {
  if (k == 0) throw SamplerError("kmeans: k must be >= 1");
  check_n(k, points.size());
  const size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw SamplerError("kmeans: ragged feature matrix");
  }
  Rng rng(seed);
  KMeansResult r;
  r.centroids = kmeans_pp(points, k, rng);
  r.assignments.assign(points.size(), k);  // sentinel: nothing assigned yet
  for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
    r.iterations = iter + 1;
    bool changed = false;
    for (size_t i = 0; i < points.size(); ++i) {
      const size_t c = nearest(points[i], r.centroids, nullptr);
      if (c != r.assignments[i]) {
        r.assignments[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<size_t> sizes(k);
    for (size_t c = 0; c < k; ++c) {
      r.centroids[c] = mean_of(points, r.assignments, c, dim, &sizes[c]);
    }
    for (size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      // Move the worst-fitting point from a cluster that can spare it.
      size_t far = points.size();
      double far_d = -1.0;
      for (size_t i = 0; i < points.size(); ++i) {
        if (sizes[r.assignments[i]] < 2) continue;
        const double d = squared_distance(points[i], r.centroids[r.assignments[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == points.size()) break;
      const size_t donor = r.assignments[far];
      r.assignments[far] = c;
      r.centroids[c] = points[far];
      sizes[c] = 1;
      r.centroids[donor] = mean_of(points, r.assignments, donor, dim, &sizes[donor]);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// k-medoids

double medoid_cost(const DistanceMatrix& d, const std::vector<size_t>& medoids) {
  double cost = 0.0;
  for (size_t i = 0; i < d.values.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t m : medoids) best = std::min(best, d.values[i][m]);
    cost += best;
  }
  return cost;
}

namespace {

KMedoidsResult pam_swap(const DistanceMatrix& d, std::vector<size_t> medoids) {
  KMedoidsResult r;
  const size_t n = d.values.size();
  double cost = medoid_cost(d, medoids);
  r.cost_history.push_back(cost);
  while (true) {
    double best_cost = cost;
    size_t best_slot = 0, best_point = n;
    for (size_t slot = 0; slot < medoids.size(); ++slot) {
      for (size_t o = 0; o < n; ++o) {
        if (std::find(medoids.begin(), medoids.end(), o) != medoids.end()) continue;
        auto trial = medoids;
        trial[slot] = o;
        const double c = medoid_cost(d, trial);
        if (c < best_cost - 1e-12) {
          best_cost = c;
          best_slot = slot;
          best_point = o;
        }
      }
    }
    if (best_point == n) break;
    medoids[best_slot] = best_point;
    cost = best_cost;
    r.cost_history.push_back(cost);
  }
  std::sort(medoids.begin(), medoids.end());
  r.medoids = medoids;
  r.cost = cost;
  return r;
}

std::vector<size_t> pam_build(const DistanceMatrix& d, size_t k) {
  const size_t n = d.values.size();
  std::vector<size_t> medoids;
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());
  while (medoids.size() < k) {
    size_t best = n;
    double best_cost = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < n; ++c) {
      if (std::find(medoids.begin(), medoids.end(), c) != medoids.end()) continue;
      double cost = 0.0;
      for (size_t i = 0; i < n; ++i) cost += std::min(closest[i], d.values[i][c]);
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    medoids.push_back(best);
    for (size_t i = 0; i < n; ++i) closest[i] = std::min(closest[i], d.values[i][best]);
  }
  return medoids;
}

constexpr int kMedoidRestarts = 8;

}  // namespace

KMedoidsResult kmedoids(const DistanceMatrix& d, size_t k, uint64_t seed) {
  const size_t n = d.values.size();
  check_n(k, n);
  KMedoidsResult best;
  if (k == 0) return best;
  best = pam_swap(d, pam_build(d, k));
  Rng rng(seed);
  for (int r = 0; r < kMedoidRestarts && k < n; ++r) {
    auto candidate = pam_swap(d, rng.sample_without_replacement(n, k));
    if (candidate.cost < best.cost - 1e-12) best = std::move(candidate);
  }
  best.assignments.assign(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t m = 1; m < best.medoids.size(); ++m) {
      if (d.values[i][best.medoids[m]] < d.values[i][best.medoids[best.assignments[i]]]) {
        best.assignments[i] = m;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

ClusterSelection sample_cluster(const Pool& pool, size_t n, FeatureKind kind,
                                llm::Embedder* embedder, uint64_t seed) {
  check_n(n, pool.size());
  ClusterSelection sel;
  if (n == 0) return sel;
  if (kind == FeatureKind::kED) {
    const auto d = edit_distance_matrix(pool);
    const auto r = kmedoids(d, n, seed);
    sel.indices = r.medoids;
    sel.distances.assign(r.medoids.size(), 0.0);
    return sel;
  }
  std::vector<std::vector<double>> rows;
  if (kind == FeatureKind::kTFIDF) {
    rows = tfidf_features(pool).rows;
  } else {
    if (embedder == nullptr) throw ConfigError("Cluster-CWE needs an embedding client");
    std::vector<std::string> texts;
    for (const auto& ex : pool) texts.push_back(ex.nl);
    rows = embedder->embed(texts);
  }
  const auto km = kmeans(rows, n, seed);
  std::vector<bool> taken(pool.size(), false);
  std::vector<std::pair<size_t, double>> picked;
  for (size_t c = 0; c < n; ++c) {
    size_t best = pool.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pool.size(); ++i) {
      if (km.assignments[i] != c || taken[i]) continue;
      const double dist = std::sqrt(squared_distance(rows[i], km.centroids[c]));
      if (dist < best_d) {
        best_d = dist;
        best = i;
      }
    }
    if (best == pool.size()) continue;
    taken[best] = true;
    picked.emplace_back(best, best_d);
  }
  // Empty clusters leave gaps; fill them farthest-first from what is chosen.
  while (picked.size() < n) {
    size_t far = pool.size();
    double far_d = -1.0;
    for (size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      double closest = std::numeric_limits<double>::infinity();
      for (const auto& [j, _] : picked) closest = std::min(closest, squared_distance(rows[i], rows[j]));
      if (closest > far_d) {
        far_d = closest;
        far = i;
      }
    }
    taken[far] = true;
    picked.emplace_back(far, std::sqrt(squared_distance(rows[far], km.centroids[km.assignments[far]])));
  }
  std::sort(picked.begin(), picked.end());
  for (const auto& [i, dist] : picked) {
    sel.indices.push_back(i);
    sel.distances.push_back(dist);
  }
  return sel;
}

std::vector<double> perplexities(const Pool& pool, llm::PerplexityScorer& scorer,
                                 size_t max_in_flight) {
  return parallel_map(pool.size(), max_in_flight, [&](size_t i) {
    return scorer.sequence_perplexity(pool[i].nl);
  });
}

std::vector<size_t> rank_by_perplexity(const std::vector<double>& ppl, size_t n,
                                       PplDirection direction) {
  check_n(n, ppl.size());
  std::vector<size_t> order(ppl.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return direction == PplDirection::kAsc ? ppl[a] > ppl[b] : ppl[a] < ppl[b];
  });
  order.resize(n);
  return order;
}

Selection select(Strategy strategy, const Pool& pool, size_t n, uint64_t seed,
                 const SamplerDeps& deps) {
  check_n(n, pool.size());
  Selection s;
  s.strategy = strategy;
  s.n = n;
  s.seed = seed;
  auto take = [&](const std::vector<size_t>& idx, const std::vector<double>* scores) {
    for (size_t k = 0; k < idx.size(); ++k) {
      s.selected.push_back(pool[idx[k]]);
      s.scores.push_back(scores ? std::optional<double>((*scores)[k]) : std::nullopt);
    }
  };
  if (n == 0) return s;
  switch (strategy) {
    case Strategy::kRandom:
      s.selected = sample_random(pool, n, seed);
      s.scores.assign(n, std::nullopt);
      break;
    case Strategy::kConfidence: {
      if (deps.completer == nullptr) throw ConfigError("Confidence needs a completion client");
      const auto conf = confidence_scores(pool, *deps.completer, deps.schema_text,
                                          deps.prompt, deps.max_in_flight);
      std::vector<size_t> order(pool.size());
      std::iota(order.begin(), order.end(), size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return conf[a] < conf[b]; });
      order.resize(n);
      std::vector<double> scores;
      for (size_t i : order) scores.push_back(conf[i]);
      take(order, &scores);
      break;
    }
    case Strategy::kClusterED:
    case Strategy::kClusterTFIDF:
    case Strategy::kClusterCWE: {
      const FeatureKind fk = strategy == Strategy::kClusterED      ? FeatureKind::kED
                             : strategy == Strategy::kClusterTFIDF ? FeatureKind::kTFIDF
                                                                   : FeatureKind::kCWE;
      const auto sel = sample_cluster(pool, n, fk, deps.embedder, seed);
      take(sel.indices, &sel.distances);
      break;
    }
    case Strategy::kPPLAsc:
    case Strategy::kPPLDesc: {
      if (deps.scorer == nullptr) throw ConfigError("PPL strategies need a scoring client");
      const auto ppl = perplexities(pool, *deps.scorer, deps.max_in_flight);
      const auto order = rank_by_perplexity(
          ppl, n, strategy == Strategy::kPPLAsc ? PplDirection::kAsc : PplDirection::kDesc);
      std::vector<double> scores;
      for (size_t i : order) scores.push_back(ppl[i]);
      take(order, &scores);
      break;
    }
  }
  return s;
}

json manifest_json(const Selection& s) {
  json ids = json::array();
  json scores = json::array();
  for (size_t i = 0; i < s.selected.size(); ++i) {
    ids.push_back(s.selected[i].id);
    const auto& sc = s.scores[i];
    if (sc && std::isfinite(*sc)) {
      scores.push_back(*sc);
    } else {
      scores.push_back(nullptr);
    }
  }
  return {{"strategy", to_string(s.strategy)},
          {"N", s.n},
          {"seed", s.seed},
          {"selected_ids", ids},
          {"scores", scores}};
}

}  // namespace advsp::sampler
