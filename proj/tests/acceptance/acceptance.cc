// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// gating criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "advsp/common/files.h"
#include "advsp/corpus/dataset.h"
#include "advsp/corpus/schema.h"
#include "advsp/llm/gateway.h"
#include "advsp/metrics/diversity.h"
#include "advsp/metrics/evaluation.h"
#include "advsp/perturb/perturb.h"
#include "advsp/prompt/prompt.h"
#include "advsp/runner/experiments.h"
#include "advsp/sampler/sampler.h"
#include "e2e_support.h"
#include "httplib.h"
#include "judging_cases.h"
#include "metric_oracles.h"
#include "perturb_checks.h"
#include "sampler_oracles.h"

namespace {

using namespace advsp;
using namespace advsp::testing;
using perturb::Kind;

const std::string kMissouri = "what can you tell me about the population of missouri";

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

std::vector<std::string> geo_test_nls() {
  std::vector<std::string> out;
  for (const auto& ex : corpus::load_dataset(data_dir() / "geo/geoquery.jsonl").split(corpus::Split::kTest)) {
    out.push_back(ex.nl);
  }
  return out;
}

// ---------------------------------------------------------------------------

// Checks one perturbation output against its kind's invariant.
bool invariant_holds(Kind kind, const std::string& in, const std::string& out, std::string* why) {
  const auto a = words_of(in), b = words_of(out);
  switch (kind) {
    case Kind::kTB:
      return tb_exactly_two_edits(in, out, why);
    case Kind::kRD:
      if (b.size() + 2 == a.size()) return true;
      *why = "RD: " + std::to_string(a.size()) + " -> " + std::to_string(b.size()) + " words";
      return false;
    case Kind::kCI:
      if (b.size() == a.size() + 2) return true;
      *why = "CI: " + std::to_string(a.size()) + " -> " + std::to_string(b.size()) + " words";
      return false;
    case Kind::kRS:
      if (sorted_words(in) == sorted_words(out) && in != out) return true;
      *why = "RS changed the word multiset: '" + out + "'";
      return false;
    case Kind::kCS:
      if (b.size() == a.size() && in != out) return true;
      *why = "CS changed the word count: '" + out + "'";
      return false;
    case Kind::kDB:
      if (out == in + " who is who; what is what; when is when; which is which; where is where") return true;
      *why = "DB suffix mismatch: '" + out + "'";
      return false;
    case Kind::kRB:
      if (!text::trim(out).empty() && out == text::trim(out)) return true;
      *why = "RB output not trimmed or empty";
      return false;
  }
  return false;
}

Outcome perturbation_invariants() {
  const auto nls = geo_test_nls();
  mock::MockLlm llm(mock::MockMode::kEchoGold, {});
  MockMasker masker(llm);
  MockCompleter completer(llm);
  const perturb::Clients clients{&completer, &masker};
  constexpr uint64_t kSeeds = 500;
  size_t runs = 0;
  for (Kind kind : perturb::all_kinds()) {
    for (uint64_t s = 0; s < kSeeds; ++s) {
      const std::string& nl = nls[s % nls.size()];
      std::string out, again;
      try {
        out = perturb::apply(kind, nl, s, clients);
        again = perturb::apply(kind, nl, s, clients);
      } catch (const perturb::PerturbError& e) {
        return fail(std::string(perturb::to_string(kind)) + " seed " + std::to_string(s) + " on '" + nl +
                    "': " + e.what());
      }
      std::string why;
      if (!invariant_holds(kind, nl, out, &why)) return fail(why + " (seed " + std::to_string(s) + ")");
      if (out != again) return fail(std::string(perturb::to_string(kind)) + " is not deterministic");
      ++runs;
    }
  }
  return {true, std::to_string(runs) + " runs over " + std::to_string(nls.size()) + " test utterances"};
}

// ---------------------------------------------------------------------------

template <typename Fn>
std::optional<uint64_t> find_seed(const std::string& target, uint64_t limit, Fn fn) {
  for (uint64_t s = 0; s < limit; ++s) {
    if (fn(s) == target) return s;
  }
  return std::nullopt;
}

Outcome fixture_reproduction() {
  constexpr uint64_t kLimit = 200000;
  std::string found;
  auto need = [&](const std::string& name, const std::string& target, auto fn) {
    const auto s = find_seed(target, kLimit, fn);
    if (!s) return false;
    found += name + "@" + std::to_string(*s) + " ";
    return true;
  };
  if (!need("TB", "what can you te11 me about th e population of missouri",
            [](uint64_t s) { return perturb::perturb_typo(kMissouri, s); })) {
    return fail("TB target not reached in " + std::to_string(kLimit) + " seeds");
  }
  if (!need("RD", "can you tell me the population of missouri",
            [](uint64_t s) { return perturb::perturb_random_delete(kMissouri, s); })) {
    return fail("RD target not reached");
  }
  if (!need("RS", "what can you tell me missouri the population of about",
            [](uint64_t s) { return perturb::perturb_random_swap(kMissouri, s); })) {
    return fail("RS target not reached");
  }
  ScriptedMasker cs_masker(kMissouri, {{"can", "will"}, {"the", "a"}}, false);
  if (!need("CS", "what will you tell me about a population of missouri",
            [&](uint64_t s) { return perturb::perturb_context_substitute(kMissouri, s, cs_masker); })) {
    return fail("CS target not reached");
  }
  ScriptedMasker ci_masker(kMissouri, {{"what", "what"}, {"population", "exact"}}, true);
  if (!need("CI", "what what can you tell me about the exact population of missouri",
            [&](uint64_t s) { return perturb::perturb_context_insert(kMissouri, s, ci_masker); })) {
    return fail("CI target not reached");
  }
  const std::string rb_target = "What information can you provide on Missouri's population?";
  FnCompleter paraphraser([&](const llm::CompletionRequest&) { return llm::CompletionResponse{" " + rb_target, {}}; });
  if (perturb::perturb_rewrite(kMissouri, paraphraser) != rb_target) return fail("RB output differs");
  if (perturb::perturb_distract(kMissouri) !=
      kMissouri + " who is who; what is what; when is when; which is which; where is where") {
    return fail("DB output differs");
  }
  return {true, found + "RB DB exact"};
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  const VerdictPair worked{{true, true, false, true}, {true, false, false, true}};
  if (metrics::robust_accuracy(as_records(worked.orig, "standard"), as_records(worked.pert, "TB")) != 2.0 / 3.0) {
    return fail("worked case is not exactly 2/3");
  }
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const auto p = random_verdicts(rng);
    const auto o = as_records(p.orig, "standard"), q = as_records(p.pert, "RS");
    if (metrics::standard_accuracy(o) != accuracy_oracle(p.orig)) return fail("standard accuracy mismatch");
    if (metrics::perturbation_accuracy(q) != accuracy_oracle(p.pert)) return fail("perturbation accuracy mismatch");
    const auto expect = robust_oracle(p);
    try {
      const double got = metrics::robust_accuracy(o, q);
      if (!expect || got != *expect) return fail("robust accuracy mismatch on pair " + std::to_string(t));
    } catch (const metrics::UndefinedMetricError&) {
      if (expect) return fail("robust accuracy undefined where the oracle has a value");
    }
  }
  return {true, "1000 pairs exact; worked case 2/3"};
}

Outcome lexical_diversity() {
  using V = std::vector<std::string>;
  if (metrics::ttr({"a", "a", "b"}) != 2.0 / 3.0) return fail("ttr([a,a,b])");
  if (std::fabs(metrics::yules_i({"a", "a", "b", "b"}) - 2.0 / 3.0) > 1e-12) return fail("yules_i([a,a,b,b])");
  if (std::fabs(metrics::yules_i({"a", "a", "a"}) - 1.0 / 8.0) > 1e-12) return fail("yules_i([a,a,a])");
  if (!std::isinf(metrics::yules_i({"a", "b", "c"}))) return fail("all-unique is not +inf");
  Rng rng(77);
  for (int t = 0; t < 100; ++t) {
    const auto toks = random_tokens(rng, 200, 5 + rng.uniform_index(40));
    if (std::fabs(metrics::mtld(toks) - mtld_oracle(toks)) > 1e-9) return fail("mtld differs from reference");
    if (metrics::mtld(toks) != metrics::mtld(V(toks.rbegin(), toks.rend()))) return fail("mtld not reversible");
  }
  return {true, "hand values exact; mtld within 1e-9 on 100 streams"};
}

// ---------------------------------------------------------------------------

Outcome sampler_suite() {
  if (sampler::edit_distance("kitten", "sitting") != 3) return fail("kitten/sitting != 3");
  Rng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_word(rng, 7), b = random_word(rng, 7), c = random_word(rng, 7);
    const size_t ab = sampler::edit_distance(a, b);
    if (ab != lev_oracle(a, b)) return fail("edit distance differs from oracle: " + a + "/" + b);
    if (ab != sampler::edit_distance(b, a) || (ab == 0) != (a == b) ||
        sampler::edit_distance(a, c) > ab + sampler::edit_distance(b, c)) {
      return fail("metric axiom violated");
    }
  }
  for (int t = 0; t < 100; ++t) {
    const size_t n = 5 + rng.uniform_index(20);
    const size_t k = 1 + rng.uniform_index(std::min<size_t>(n, 5));
    const auto pts = random_points(rng, n, 2);
    std::string why;
    if (!kmeans_locally_optimal(pts, sampler::kmeans(pts, k, static_cast<uint64_t>(t)), &why)) return fail(why);
  }
  for (int t = 0; t < 200; ++t) {
    const size_t n = 3 + rng.uniform_index(6);
    const size_t k = 1 + rng.uniform_index(3);
    const auto d = euclidean_matrix(random_points(rng, n, 2));
    const auto r = sampler::kmedoids(d, k, static_cast<uint64_t>(t));
    if (std::fabs(r.cost - best_cost_exhaustive(d, k)) > 1e-9) return fail("kmedoids not optimal");
  }
  // PPL-Asc keeps the highest perplexities first, PPL-Desc the lowest.
  sampler::Pool small;
  for (const std::string nl : {"low", "mid", "high"}) small.push_back({nl, nl, "SELECT 1", corpus::Split::kTrain});
  TableScorer table({{"low", 1.0}, {"mid", 5.0}, {"high", 50.0}});
  sampler::SamplerDeps ppl_deps;
  ppl_deps.scorer = &table;
  if (sampler::select(sampler::Strategy::kPPLAsc, small, 1, 0, ppl_deps).selected[0].nl != "high" ||
      sampler::select(sampler::Strategy::kPPLDesc, small, 1, 0, ppl_deps).selected[0].nl != "low") {
    return fail("PPL direction");
  }
  // Determinism per seed, all strategies, against the in-process mock.
  const auto d = corpus::load_dataset(data_dir() / "geo/geoquery.jsonl");
  const auto train = d.split(corpus::Split::kTrain);
  const sampler::Pool pool(train.begin(), train.begin() + 30);
  std::map<std::string, std::vector<double>> vecs;
  std::map<std::string, double> ppl;
  for (const auto& ex : pool) {
    const auto h = std::hash<std::string>{}(ex.nl);
    vecs[ex.nl] = {static_cast<double>(h % 97), static_cast<double>(h % 89)};
    ppl[ex.nl] = 1.0 + static_cast<double>(h % 1000);
  }
  TableEmbedder emb(vecs);
  TableScorer scorer(ppl);
  mock::MockLlm llm(mock::MockMode::kEchoGold, {});
  class LogprobCompleter : public llm::Completer {
   public:
    explicit LogprobCompleter(const mock::MockLlm& l) : l_(l) {}
    llm::CompletionResponse complete(const llm::CompletionRequest& r) override {
      const auto j = l_.completions({{"prompt", r.prompt}, {"logprobs", 1}});
      llm::CompletionResponse out;
      out.text = j["choices"][0]["text"];
      std::vector<llm::TokenLogprob> lps;
      const auto& lp = j["choices"][0]["logprobs"];
      for (size_t i = 0; i < lp["tokens"].size(); ++i) {
        lps.push_back({lp["tokens"][i], lp["token_logprobs"][i].get<double>()});
      }
      out.token_logprobs = lps;
      return out;
    }
    const mock::MockLlm& l_;
  } completer(llm);
  sampler::SamplerDeps deps{&completer, &emb, &scorer, "CREATE TABLE t (a)", {}, 4};
  for (auto s : sampler::all_strategies()) {
    const auto a = sampler::select(s, pool, 10, 99, deps);
    const auto b = sampler::select(s, pool, 10, 99, deps);
    if (a.selected != b.selected || a.selected.size() != 10) {
      return fail(std::string(sampler::to_string(s)) + " not deterministic");
    }
  }
  return {true, "edit distance 1000 pairs; kmeans 100; kmedoids 200 exhaustive; 7 strategies deterministic"};
}

// ---------------------------------------------------------------------------

Outcome prompt_goldens() {
  const auto schema_text =
      prompt::serialize_schema(corpus::load_schema(data_dir() / "geo/schema.json", 3), 3);
  const auto d = corpus::load_dataset(data_dir() / "geo/geoquery.jsonl");
  const auto train = d.split(corpus::Split::kTrain);
  const std::vector<corpus::Example> ten(train.begin(), train.begin() + 10);
  const auto golden = [](const char* f) { return files::read_text(source_dir() / "tests/golden" / f); };
  if (prompt::assemble(schema_text, {}, {}, kMissouri).text != golden("geo_zero_shot.txt")) {
    return fail("zero-shot prompt differs from golden");
  }
  // The golden is the plain few-shot layout; an empty adversarial set must
  // reproduce it exactly.
  if (prompt::assemble(schema_text, {}, {ten, {}}, kMissouri).text != golden("geo_ten_shot.txt")) {
    return fail("10-shot prompt with empty adversarial set differs from golden");
  }

  nlohmann::json seen;
  httplib::Server server;
  server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"choices":[{"text":" 1","index":0}]})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  TempDir dir;
  llm::GatewayConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.cache_dir = dir / "cache";
  cfg.max_retries = 0;
  Outcome out{true, "goldens byte-identical; wire {200, 0, [--, \\n\\n, ;, #]}"};
  try {
    llm::Gateway gw(cfg);
    llm::CompletionRequest req;
    req.prompt = "x";
    gw.complete(req);
    const nlohmann::json stop = {"--", "\n\n", ";", "#"};
    if (seen.value("max_tokens", -1) != 200 || seen.value("temperature", -1.0) != 0.0 || seen["stop"] != stop) {
      out = fail("wire defaults: " + seen.dump());
    }
  } catch (const std::exception& e) {
    out = fail(std::string("wire check: ") + e.what());
  }
  server.stop();
  th.join();
  return out;
}

Outcome execution_judging() {
  TempDir dir;
  make_judging_db(dir / "toy.sqlite");
  const auto db = sqlite::Connection::open_read_only((dir / "toy.sqlite").string());
  size_t ok = 0;
  const auto cases = judging_cases();
  for (const auto& c : cases) {
    const auto v = metrics::judge(db, c.gold, c.pred, c.timeout_ms);
    if (v.kind != c.expected) {
      return fail(c.name + ": got " + std::string(metrics::to_string(v.kind)) + " (" + v.detail + ")");
    }
    ++ok;
  }
  return {ok == 20, std::to_string(ok) + "/" + std::to_string(cases.size()) + " verdicts as expected"};
}

// ---------------------------------------------------------------------------

Outcome end_to_end() {
  using runner::Rq;
  const std::vector<Rq> rqs = {Rq::k1, Rq::k2, Rq::k3, Rq::k4};
  E2eWorld world;
  world.prepare();
  auto cfg = world.config();
  {
    auto server = world.serve(mock::MockMode::kEchoGold, cfg);
    for (Rq rq : rqs) runner::run(rq, cfg);
  }
  std::string why;
  for (Rq rq : rqs) {
    if (!report_cells_are(cfg.output_dir / runner::rq_name(rq), "100.00", "100.00", &why)) return fail(why);
  }
  // Server is down: replays must be served from the cache.
  for (Rq rq : rqs) {
    const auto dir = cfg.output_dir / runner::rq_name(rq);
    const auto r = runner::replay(dir / "manifest.json", world.root() / ("replay-" + runner::rq_name(rq)));
    if (!same_tree(dir, r.dir, &why)) return fail("replay " + runner::rq_name(rq) + ": " + why);
    if (r.manifest["requests"]["network_calls"] != 0) return fail("replay made network calls");
  }
  auto wrong = world.config();
  wrong.gateway.cache_dir = world.root() / "cache-wrong";
  wrong.output_dir = world.root() / "runs-wrong";
  {
    auto server = world.serve(mock::MockMode::kAlwaysWrong, wrong);
    for (Rq rq : rqs) runner::run(rq, wrong);
  }
  for (Rq rq : rqs) {
    if (!report_cells_are(wrong.output_dir / runner::rq_name(rq), "0.00", "undefined", &why)) return fail(why);
  }
  return {true, "echo-gold 100.00, always-wrong 0.00/undefined, 4 replays byte-identical"};
}

// Optional: needs a real completion endpoint. RB should hurt more than TB.
Outcome live_direction(const char* config_path) {
  auto cfg = runner::load_config(config_path);
  cfg.kinds = {Kind::kTB, Kind::kRB};
  const auto r = runner::run(runner::Rq::k1, cfg);
  const double tb = metrics::perturbation_accuracy(metrics::read_records(r.dir / "TB.jsonl"));
  const double rb = metrics::perturbation_accuracy(metrics::read_records(r.dir / "RB.jsonl"));
  char buf[96];
  std::snprintf(buf, sizeof buf, "RB %.2f vs TB %.2f", rb * 100, tb * 100);
  return {rb <= tb, buf};
}

struct Criterion {
  std::string name;
  double limit_seconds;  // 0 = no time limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"perturbation-invariants", 30.0, perturbation_invariants},
      {"fixture-reproduction", 0.0, fixture_reproduction},
      {"metric-oracle", 0.0, metric_oracle},
      {"lexical-diversity", 0.0, lexical_diversity},
      {"sampler-suite", 0.0, sampler_suite},
      {"prompt-goldens", 0.0, prompt_goldens},
      {"execution-judging", 0.0, execution_judging},
      {"end-to-end-mock", 120.0, end_to_end},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && c.limit_seconds > 0 && secs >= c.limit_seconds) {
      o = fail("took " + std::to_string(secs) + " s; " + o.detail);
    }
    all = all && o.pass;
    std::printf("%s %-24s %7.2fs%s  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                c.limit_seconds > 0 ? (" (<" + std::to_string(static_cast<int>(c.limit_seconds)) + "s)").c_str() : "",
                o.detail.c_str());
    std::fflush(stdout);
  }
  if (const char* live = std::getenv("ADVSP_LIVE_CONFIG"); live && *live) {
    try {
      const auto o = live_direction(live);
      std::printf("%s live-rb-vs-tb (non-gating)  %s\n", o.pass ? "PASS" : "FAIL", o.detail.c_str());
    } catch (const std::exception& e) {
      std::printf("FAIL live-rb-vs-tb (non-gating)  %s\n", e.what());
    }
  } else {
    std::printf("SKIP live-rb-vs-tb (non-gating)  set ADVSP_LIVE_CONFIG to a config with a real model\n");
  }
  return all ? 0 : 1;
}
