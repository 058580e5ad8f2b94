#include "advsp/runner/experiments.h"

#include <chrono>
#include <cmath>
#include <map>

#include "advsp/common/files.h"
#include "advsp/common/parallel.h"
#include "advsp/common/rng.h"
#include "advsp/corpus/schema.h"
#include "advsp/curate/curate.h"
#include "advsp/llm/gateway.h"
#include "advsp/metrics/diversity.h"
#include "advsp/metrics/evaluation.h"
#include "advsp/runner/report.h"

namespace advsp::runner {

using nlohmann::json;
namespace fs = std::filesystem;

std::string rq_name(Rq rq) { return "rq" + std::to_string(static_cast<int>(rq)); }

namespace {

constexpr std::string_view kDemoSamplingPurpose = "demo-sampling";

json acc_cell(const std::string& f) { return {{"metric", "accuracy"}, {"records", f}}; }
json robust_cell(const std::string& s, const std::string& p) {
  return {{"metric", "robust"}, {"standard", s}, {"perturbed", p}};
}
json delta_cell(const std::string& p, const std::string& s) {
  return {{"metric", "delta"}, {"perturbed", p}, {"standard", s}};
}
json error_cell(const std::string& m) { return {{"metric", "error"}, {"message", m}}; }

// Record files of one demo configuration evaluated on every set.
struct ConditionFiles {
  std::string standard;
  std::vector<std::string> perturbed;  // cfg.kinds order

  json avg_pert_cell() const { return {{"metric", "avg_accuracy"}, {"records", perturbed}}; }
  json avg_robust_cell() const {
    return {{"metric", "avg_robust"}, {"standard", standard}, {"perturbed", perturbed}};
  }
};

class Experiment {
 public:
  Experiment(const ExperimentConfig& cfg, Rq rq)
      : cfg_(cfg),
        rq_(rq),
        dir_(cfg.output_dir / rq_name(rq)),
        dataset_(corpus::load_dataset(cfg.dataset, cfg.dataset_name)),
        schema_(corpus::load_schema(cfg.schema, cfg.prompt.rows_limit)),
        schema_text_(prompt::serialize_schema(schema_, cfg.prompt.rows_limit)),
        gateway_(cfg.gateway),
        started_(std::chrono::steady_clock::now()) {
    for (const auto& ex : dataset_.split(corpus::Split::kTest)) {
      test_.push_back({ex.id, ex.nl, ex.gold_sql});
    }
    train_ = dataset_.split(corpus::Split::kTrain);
    for (perturb::Kind kind : cfg_.kinds) {
      const fs::path path = cfg_.eval_sets_dir / (std::string(perturb::to_string(kind)) + ".jsonl");
      if (cfg_.eval_sets_dir.empty() || !fs::exists(path)) {
        throw Error("missing eval set for " + std::string(perturb::to_string(kind)) + ": " +
                    path.string());
      }
      eval_sets_.emplace(kind, curate::read_eval_set(path, kind));
    }
    fs::create_directories(dir_);
    manifest_ = {{"rq", rq_name(rq)},
                 {"config", to_json(cfg_)},
                 {"selections", json::array()},
                 {"prompt_hashes", json::object()},
                 {"record_files", json::array()}};
  }

  const ExperimentConfig& cfg() const { return cfg_; }
  const corpus::Dataset& dataset() const { return dataset_; }
  const sampler::Pool& train() const { return train_; }
  llm::Gateway& gateway() { return gateway_; }
  json& manifest() { return manifest_; }

  sampler::SamplerDeps sampler_deps() {
    sampler::SamplerDeps d;
    d.completer = &gateway_;
    d.embedder = &gateway_;
    d.scorer = &gateway_;
    d.schema_text = schema_text_;
    d.prompt = cfg_.prompt;
    d.max_in_flight = cfg_.max_in_flight;
    return d;
  }

  sampler::Selection random_demos(size_t n) {
    return sampler::select(sampler::Strategy::kRandom, train_, n,
                           derive_seed(cfg_.seed, kDemoSamplingPurpose, n), sampler_deps());
  }

  void note_selection(const std::string& condition, const sampler::Selection& s) {
    json m = sampler::manifest_json(s);
    m["condition"] = condition;
    manifest_["selections"].push_back(m);
  }

  // Evaluates `demos` on the standard set and every perturbed set, writing
  // records under `sub` ("" for the run directory itself).
  ConditionFiles run_condition(const std::string& sub, const prompt::DemoSet& demos) {
    ConditionFiles files;
    const std::string prefix = sub.empty() ? "" : sub + "/";
    files.standard = prefix + "standard.jsonl";
    // Assemble everything up front so a budget overflow fails before any call.
    std::vector<std::vector<std::string>> prompts;
    prompts.push_back(assemble_all(demos, test_));
    for (perturb::Kind kind : cfg_.kinds) {
      prompts.push_back(assemble_all(demos, eval_sets_.at(kind).entries));
    }
    evaluate(prompts[0], test_, std::string(metrics::kStandardCondition), files.standard);
    for (size_t k = 0; k < cfg_.kinds.size(); ++k) {
      const std::string name(perturb::to_string(cfg_.kinds[k]));
      const std::string file = prefix + name + ".jsonl";
      evaluate(prompts[k + 1], eval_sets_.at(cfg_.kinds[k]).entries, name, file);
      files.perturbed.push_back(file);
    }
    return files;
  }

  RunResult finish(const json& layout) {
    files::write_text_atomic(dir_ / "layout.json", layout.dump(2) + "\n");
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_);
    const auto stats = gateway_.stats();
    manifest_["wall_clock_seconds"] = std::round(elapsed.count() * 1000.0) / 1000.0;
    manifest_["requests"] = {{"network_calls", stats.network_calls},
                             {"cache_hits", stats.cache_hits},
                             {"retries", stats.retries}};
    files::write_text_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    RunResult r;
    r.dir = dir_;
    r.report_markdown = write_report(dir_).markdown;
    r.manifest = manifest_;
    return r;
  }

 private:
  std::vector<std::string> assemble_all(const prompt::DemoSet& demos,
                                        const std::vector<curate::EvalEntry>& targets) {
    std::vector<std::string> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
      out.push_back(prompt::assemble(schema_text_, cfg_.prompt, demos, t.text).text);
    }
    return out;
  }

  void evaluate(const std::vector<std::string>& prompts,
                const std::vector<curate::EvalEntry>& targets, const std::string& condition,
                const std::string& file) {
    const std::string db = schema_.db_path.string();
    auto records = parallel_map(targets.size(), cfg_.max_in_flight, [&](size_t i) {
      llm::CompletionRequest req;
      req.prompt = prompts[i];
      const auto resp = gateway_.complete(req);
      metrics::EvalRecord r;
      r.example_id = targets[i].example_id;
      r.condition = condition;
      r.predicted_sql = prompt::predicted_sql(resp.text);
      const auto conn = sqlite::Connection::open_read_only(db);
      r.verdict = metrics::judge(conn, targets[i].gold_sql, r.predicted_sql, cfg_.sql_timeout_ms);
      return r;
    });
    for (const auto& r : records) {
      if (r.verdict.kind == metrics::VerdictKind::kGoldExecError) {
        throw metrics::GoldQueryError("gold SQL of " + r.example_id +
                                      " does not execute (" + r.verdict.detail +
                                      "); fix the dataset before scoring");
      }
    }
    metrics::write_records(dir_ / file, records);
    std::string joined;
    for (const auto& p : prompts) {
      joined += p;
      joined += '\0';
    }
    manifest_["prompt_hashes"][file] = files::sha256_hex(joined);
    manifest_["record_files"].push_back(file);
  }

  ExperimentConfig cfg_;
  Rq rq_;
  fs::path dir_;
  corpus::Dataset dataset_;
  corpus::Schema schema_;
  std::string schema_text_;
  llm::Gateway gateway_;
  std::chrono::steady_clock::time_point started_;
  std::vector<curate::EvalEntry> test_;
  sampler::Pool train_;
  std::map<perturb::Kind, curate::RobustnessEvalSet> eval_sets_;
  json manifest_;
};

bool recoverable(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const metrics::GoldQueryError&) {
    return false;
  } catch (const prompt::BudgetExceededError&) {
    return true;
  } catch (const sampler::SamplerError&) {
    return true;
  } catch (...) {
    return false;
  }
}

std::string message_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  }
  return "unknown error";
}

}  // namespace

RunResult run_rq1(const ExperimentConfig& cfg) {
  Experiment ex(cfg, Rq::k1);
  const ConditionFiles f = ex.run_condition("", {});
  json rows = json::array();
  for (size_t k = 0; k < cfg.kinds.size(); ++k) {
    rows.push_back({{"label", perturb::to_string(cfg.kinds[k])},
                    {"cells",
                     {acc_cell(f.perturbed[k]), acc_cell(f.standard),
                      delta_cell(f.perturbed[k], f.standard),
                      robust_cell(f.standard, f.perturbed[k])}}});
  }
  const json layout = {
      {"title", "RQ1 zero-shot robustness (" + cfg.dataset_name + ")"},
      {"tables",
       {{{"name", "Zero-shot accuracy"},
         {"columns", {"Kind", "Pert. Acc.", "Std. Acc.", "Δ", "Robust Acc."}},
         {"rows", rows}}}}};
  return ex.finish(layout);
}

RunResult run_rq2(const ExperimentConfig& cfg) {
  Experiment ex(cfg, Rq::k2);
  // One column per shot count; rows are kinds then the summary metrics.
  std::vector<std::string> columns = {"Metric"};
  std::vector<json> kind_cells(cfg.kinds.size(), json::array());
  json avg_pert = json::array(), std_acc = json::array(), avg_robust = json::array();
  for (size_t n : cfg.shots) {
    columns.push_back(std::to_string(n) + "-shot");
    const std::string sub = "shots-" + std::to_string(n);
    try {
      const auto sel = ex.random_demos(n);
      ex.note_selection(sub, sel);
      const ConditionFiles f = ex.run_condition(sub, {sel.selected, {}});
      for (size_t k = 0; k < cfg.kinds.size(); ++k) kind_cells[k].push_back(acc_cell(f.perturbed[k]));
      avg_pert.push_back(f.avg_pert_cell());
      std_acc.push_back(acc_cell(f.standard));
      avg_robust.push_back(f.avg_robust_cell());
    } catch (...) {
      const auto err = std::current_exception();
      if (!recoverable(err)) throw;
      const json cell = error_cell(message_of(err));
      for (auto& c : kind_cells) c.push_back(cell);
      avg_pert.push_back(cell);
      std_acc.push_back(cell);
      avg_robust.push_back(cell);
    }
  }
  json rows = json::array();
  for (size_t k = 0; k < cfg.kinds.size(); ++k) {
    rows.push_back({{"label", std::string(perturb::to_string(cfg.kinds[k])) + " Pert. Acc."},
                    {"cells", kind_cells[k]}});
  }
  rows.push_back({{"label", "Avg. Pert. Acc."}, {"cells", avg_pert}});
  rows.push_back({{"label", "Std. Acc."}, {"cells", std_acc}});
  rows.push_back({{"label", "Avg. Robust Acc."}, {"cells", avg_robust}});
  const json layout = {
      {"title", "RQ2 few-shot robustness with random demonstrations (" + cfg.dataset_name + ")"},
      {"tables", {{{"name", "Accuracy by shot count"}, {"columns", columns}, {"rows", rows}}}}};
  return ex.finish(layout);
}

RunResult run_rq3(const ExperimentConfig& cfg) {
  Experiment ex(cfg, Rq::k3);
  std::map<perturb::Kind, curate::RobustnessEvalSet> adv_pools;
  for (perturb::Kind kind : cfg.adv_kinds) {
    const fs::path path = cfg.adv_demos_dir / (std::string(perturb::to_string(kind)) + ".jsonl");
    if (cfg.adv_demos_dir.empty() || !fs::exists(path)) {
      throw Error("missing adversarial demo pool for " + std::string(perturb::to_string(kind)) +
                  ": " + path.string());
    }
    adv_pools.emplace(kind, curate::read_eval_set(path, kind));
  }
  ex.manifest()["augmentation"] = "N standard + N perturbed counterparts of the same demos";

  json tables = json::array();
  for (size_t n : cfg.rq3_shots) {
    const std::string base = "N-" + std::to_string(n);
    json rows = json::array();
    auto add_row = [&](const std::string& label, const std::string& sub, auto make_demos) {
      try {
        const prompt::DemoSet demos = make_demos();
        const ConditionFiles f = ex.run_condition(base + "/" + sub, demos);
        rows.push_back({{"label", label}, {"cells", {f.avg_robust_cell(), acc_cell(f.standard)}}});
      } catch (...) {
        const auto err = std::current_exception();
        if (!recoverable(err)) throw;
        const json cell = error_cell(message_of(err));
        rows.push_back({{"label", label}, {"cells", {cell, cell}}});
      }
    };
    std::optional<sampler::Selection> standard;
    auto standard_demos = [&]() -> const sampler::Selection& {
      if (!standard) {
        standard = ex.random_demos(n);
        ex.note_selection(base + "/no-adv", *standard);
      }
      return *standard;
    };
    add_row("No Adv.", "no-adv", [&] { return prompt::DemoSet{standard_demos().selected, {}}; });
    add_row("No Adv. (×2)", "no-adv-x2", [&] {
      const auto sel = ex.random_demos(2 * n);
      ex.note_selection(base + "/no-adv-x2", sel);
      return prompt::DemoSet{sel.selected, {}};
    });
    for (perturb::Kind kind : cfg.adv_kinds) {
      const std::string name(perturb::to_string(kind));
      add_row("+ " + name, "adv-" + name, [&] {
        const auto& sel = standard_demos();
        const auto& pool = adv_pools.at(kind).entries;
        std::map<std::string, size_t> by_id;
        for (size_t i = 0; i < pool.size(); ++i) by_id.emplace(pool[i].example_id, i);
        prompt::DemoSet demos{sel.selected, {}};
        std::vector<bool> used(pool.size(), false);
        for (const auto& d : sel.selected) {
          auto it = by_id.find(d.id);
          if (it == by_id.end()) continue;
          used[it->second] = true;
          demos.adversarial.push_back({pool[it->second].text, pool[it->second].gold_sql});
        }
        // Demos whose perturbation was rejected are replaced from the rest of
        // the pool in a seeded order.
        Rng rng(derive_seed(cfg.seed, "rq3-topup:" + name, n));
        for (size_t i : rng.permutation(pool.size())) {
          if (demos.adversarial.size() >= n) break;
          if (used[i]) continue;
          used[i] = true;
          demos.adversarial.push_back({pool[i].text, pool[i].gold_sql});
        }
        return demos;
      });
    }
    tables.push_back({{"name", std::to_string(n) + "-shot"},
                      {"columns", {"Condition", "Avg. Robust Acc.", "Std. Acc."}},
                      {"rows", rows}});
  }
  const json layout = {
      {"title", "RQ3 adversarial demonstrations (" + cfg.dataset_name + ")"},
      {"tables", tables}};
  return ex.finish(layout);
}

RunResult run_rq4(const ExperimentConfig& cfg) {
  Experiment ex(cfg, Rq::k4);
  const size_t n = cfg.rq4_shots;
  std::vector<std::string> columns = {"Metric"};
  json robust = json::array(), pert = json::array(), stdacc = json::array();
  json ttr = json::array(), yules = json::array(), mtld = json::array();
  for (sampler::Strategy strategy : cfg.strategies) {
    const std::string name(sampler::to_string(strategy));
    columns.push_back(name);
    try {
      const auto sel = sampler::select(strategy, ex.train(), n,
                                       derive_seed(cfg.seed, kDemoSamplingPurpose, n),
                                       ex.sampler_deps());
      ex.note_selection(name, sel);
      files::write_text_atomic(cfg.output_dir / rq_name(Rq::k4) / name / "selection.json",
                               sampler::manifest_json(sel).dump(2) + "\n");
      const ConditionFiles f = ex.run_condition(name, {sel.selected, {}});
      robust.push_back(f.avg_robust_cell());
      pert.push_back(f.avg_pert_cell());
      stdacc.push_back(acc_cell(f.standard));
      std::vector<std::string> nls;
      for (const auto& e : sel.selected) nls.push_back(e.nl);
      try {
        const auto d = metrics::diversity_report(nls);
        ttr.push_back({{"metric", "value"}, {"value", d.ttr}, {"scale", 100}});
        if (std::isinf(d.yules_i)) {
          yules.push_back({{"metric", "value"}, {"text", "inf"}});
        } else {
          yules.push_back({{"metric", "value"}, {"value", d.yules_i}, {"scale", 100}});
        }
        mtld.push_back({{"metric", "value"}, {"value", d.mtld}, {"scale", 1}});
      } catch (const Error& e) {
        for (json* t : {&ttr, &yules, &mtld}) t->push_back(error_cell(e.what()));
      }
    } catch (const metrics::GoldQueryError&) {
      throw;
    } catch (const Error& e) {
      // Strategy failures stay in their own column.
      for (json* t : {&robust, &pert, &stdacc, &ttr, &yules, &mtld}) t->push_back(error_cell(e.what()));
    }
  }
  const json layout = {
      {"title", "RQ4 demonstration sampling strategies, " + std::to_string(n) + "-shot (" +
                    cfg.dataset_name + ")"},
      {"tables",
       {{{"name", "Accuracy by strategy"},
         {"columns", columns},
         {"rows",
          {{{"label", "Avg. Robust Acc."}, {"cells", robust}},
           {{"label", "Avg. Pert. Acc."}, {"cells", pert}},
           {{"label", "Std. Acc."}, {"cells", stdacc}}}}},
        {{"name", "Lexical diversity of selected utterances"},
         {"columns", columns},
         {"rows",
          {{{"label", "TTR (×100)"}, {"cells", ttr}},
           {{"label", "Yule's I (×100)"}, {"cells", yules}},
           {{"label", "MTLD"}, {"cells", mtld}}}}}}}};
  return ex.finish(layout);
}

RunResult run(Rq rq, const ExperimentConfig& cfg) {
  switch (rq) {
    case Rq::k1: return run_rq1(cfg);
    case Rq::k2: return run_rq2(cfg);
    case Rq::k3: return run_rq3(cfg);
    case Rq::k4: return run_rq4(cfg);
  }
  throw Error("unknown experiment");
}

RunResult replay(const fs::path& manifest_path, std::optional<fs::path> output_dir) {
  const json m = files::read_json(manifest_path);
  if (!m.contains("config") || !m.contains("rq")) {
    throw ConfigError(manifest_path.string() + " is not a run manifest");
  }
  ExperimentConfig cfg = config_from_json(m["config"], fs::path("/"));
  if (output_dir) cfg.output_dir = fs::absolute(*output_dir);
  const std::string rq = m["rq"].get<std::string>();
  for (Rq r : {Rq::k1, Rq::k2, Rq::k3, Rq::k4}) {
    if (rq_name(r) == rq) return run(r, cfg);
  }
  throw ConfigError("unknown experiment '" + rq + "' in " + manifest_path.string());
}

}  // namespace advsp::runner
