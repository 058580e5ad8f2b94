// Command-line entry point: perturb, curate, sample, eval, report, replay.
#include <pthread.h>

#include <csignal>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "advsp/common/error.h"
#include "advsp/common/files.h"
#include "advsp/common/rng.h"
#include "advsp/corpus/dataset.h"
#include "advsp/curate/curate.h"
#include "advsp/curate/service.h"
#include "advsp/llm/gateway.h"
#include "advsp/perturb/perturb.h"
#include "advsp/runner/config.h"
#include "advsp/runner/experiments.h"
#include "advsp/runner/pipeline.h"
#include "advsp/runner/report.h"
#include "advsp/sampler/sampler.h"

namespace fs = std::filesystem;
using namespace advsp;

namespace {

struct Common {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool need_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "experiment config (JSON)");
  if (need_config) opt->required();
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--out", c.out, "output path");
}

runner::ExperimentConfig load(const Common& c) {
  auto cfg = runner::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

corpus::Split split_arg(const std::string& s) {
  auto split = corpus::parse_split(s);
  if (!split) throw ConfigError("unknown split '" + s + "'");
  return *split;
}

std::map<std::string, curate::AnnotationRecord> annotations(
    const std::string& journal, const std::vector<curate::CandidateSet>& sets) {
  std::map<std::string, size_t> sizes;
  for (const auto& s : sets) sizes.emplace(s.id, s.ranked.size());
  return curate::AnnotationStore(journal, sizes).view();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial robustness harness for prompt-based text-to-SQL"};
  app.require_subcommand(1);

  Common common;
  std::string split = "test";

  auto* perturb_cmd = app.add_subcommand("perturb", "generate perturbation candidates");
  add_common(perturb_cmd, common);
  perturb_cmd->add_option("--split", split, "dataset split")->capture_default_str();

  auto* curate_cmd = app.add_subcommand("curate", "rank, review and build eval sets");
  curate_cmd->require_subcommand(1);
  std::string candidates_path, sets_path, journal_path, host = "127.0.0.1", policy = "human";
  int port = 8765;
  auto* rank_cmd = curate_cmd->add_subcommand("rank", "rank candidates by similarity");
  add_common(rank_cmd, common);
  rank_cmd->add_option("--candidates", candidates_path)->required();
  auto* serve_cmd = curate_cmd->add_subcommand("serve", "annotation HTTP API");
  serve_cmd->add_option("--sets", sets_path)->required();
  serve_cmd->add_option("--journal", journal_path)->required();
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();
  auto* build_cmd = curate_cmd->add_subcommand("build", "write <KIND>.jsonl eval sets");
  add_common(build_cmd, common);
  build_cmd->add_option("--sets", sets_path)->required();
  build_cmd->add_option("--journal", journal_path);
  build_cmd->add_option("--split", split)->capture_default_str();
  build_cmd->add_option("--policy", policy, "human | auto")->capture_default_str();

  auto* sample_cmd = app.add_subcommand("sample", "select few-shot demonstrations");
  add_common(sample_cmd, common);
  std::string strategy = "Random";
  size_t shots = 10;
  sample_cmd->add_option("--strategy", strategy)->capture_default_str();
  sample_cmd->add_option("--shots", shots)->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "run an experiment");
  eval_cmd->require_subcommand(1);
  std::map<CLI::App*, runner::Rq> rq_cmds;
  for (runner::Rq rq : {runner::Rq::k1, runner::Rq::k2, runner::Rq::k3, runner::Rq::k4}) {
    auto* cmd = eval_cmd->add_subcommand(runner::rq_name(rq));
    add_common(cmd, common);
    rq_cmds.emplace(cmd, rq);
  }

  std::string run_dir;
  auto* report_cmd = app.add_subcommand("report", "re-render report.md and report.csv");
  report_cmd->add_option("run_dir", run_dir)->required();

  std::string manifest;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded manifest");
  replay_cmd->add_option("manifest", manifest)->required();
  replay_cmd->add_option("--out", common.out, "output directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (perturb_cmd->parsed()) {
      const auto cfg = load(common);
      if (common.out.empty()) throw ConfigError("perturb needs --out <candidates.jsonl>");
      const auto dataset = corpus::load_dataset(cfg.dataset, cfg.dataset_name);
      llm::Gateway gw(cfg.gateway);
      const auto out = runner::perturb_split(dataset, split_arg(split), cfg.kinds, {&gw, &gw},
                                             cfg.candidates_per_example, cfg.seed,
                                             cfg.max_in_flight);
      perturb::write_candidates(common.out, out.candidates);
      for (const auto& f : out.failures) std::cerr << "skipped " << f << "\n";
      std::cerr << out.candidates.size() << " candidates, " << out.failures.size()
                << " failures\n";
    } else if (rank_cmd->parsed()) {
      const auto cfg = load(common);
      if (common.out.empty()) throw ConfigError("curate rank needs --out <sets.jsonl>");
      const auto dataset = corpus::load_dataset(cfg.dataset, cfg.dataset_name);
      llm::Gateway gw(cfg.gateway);
      const auto sets = runner::rank_all(dataset, perturb::read_candidates(candidates_path), gw);
      curate::write_candidate_sets(common.out, sets);
      std::cerr << sets.size() << " candidate sets\n";
    } else if (serve_cmd->parsed()) {
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
      curate::CurateService service(curate::read_candidate_sets(sets_path), journal_path);
      const int bound = service.start(host, port);
      std::cerr << "serving annotations on http://" << host << ":" << bound << "\n";
      int sig = 0;
      sigwait(&stop_signals, &sig);
      service.stop();
    } else if (build_cmd->parsed()) {
      const auto cfg = load(common);
      const fs::path out = common.out.empty() ? cfg.eval_sets_dir : fs::path(common.out);
      if (out.empty()) throw ConfigError("curate build needs --out or eval_sets_dir");
      curate::BuildPolicy p;
      if (policy == "human") {
        p = curate::BuildPolicy::kHumanRequired;
      } else if (policy == "auto") {
        p = curate::BuildPolicy::kAutoFallback;
      } else {
        throw ConfigError("unknown policy '" + policy + "'");
      }
      const auto dataset = corpus::load_dataset(cfg.dataset, cfg.dataset_name);
      const auto sets = curate::read_candidate_sets(sets_path);
      const auto ann = journal_path.empty() ? std::map<std::string, curate::AnnotationRecord>{}
                                            : annotations(journal_path, sets);
      const auto results = runner::build_all(dataset, cfg.kinds, sets, ann, p, split_arg(split), out);
      for (const auto& [kind, r] : results) {
        std::cerr << perturb::to_string(kind) << ": " << r.set.entries.size() << " entries, "
                  << r.omitted.size() << " rejected\n";
      }
    } else if (sample_cmd->parsed()) {
      const auto cfg = load(common);
      const auto s = sampler::parse_strategy(strategy);
      if (!s) throw ConfigError("unknown strategy '" + strategy + "'");
      const auto dataset = corpus::load_dataset(cfg.dataset, cfg.dataset_name);
      const auto schema = corpus::load_schema(cfg.schema, cfg.prompt.rows_limit);
      llm::Gateway gw(cfg.gateway);
      sampler::SamplerDeps deps;
      deps.completer = &gw;
      deps.embedder = &gw;
      deps.scorer = &gw;
      deps.schema_text = prompt::serialize_schema(schema, cfg.prompt.rows_limit);
      deps.prompt = cfg.prompt;
      deps.max_in_flight = cfg.max_in_flight;
      const auto sel = sampler::select(*s, dataset.split(corpus::Split::kTrain), shots,
                                       derive_seed(cfg.seed, "demo-sampling", shots), deps);
      const std::string text = sampler::manifest_json(sel).dump(2) + "\n";
      if (common.out.empty()) {
        std::cout << text;
      } else {
        files::write_text_atomic(common.out, text);
      }
    } else if (eval_cmd->parsed()) {
      for (const auto& [cmd, rq] : rq_cmds) {
        if (!cmd->parsed()) continue;
        auto cfg = load(common);
        if (!common.out.empty()) cfg.output_dir = fs::absolute(common.out);
        const auto r = runner::run(rq, cfg);
        std::cout << r.report_markdown;
        std::cerr << "wrote " << r.dir.string() << "\n";
      }
    } else if (report_cmd->parsed()) {
      std::cout << runner::write_report(run_dir).markdown;
    } else if (replay_cmd->parsed()) {
      std::optional<fs::path> out;
      if (!common.out.empty()) out = fs::path(common.out);
      const auto r = runner::replay(manifest, out);
      std::cout << r.report_markdown;
      std::cerr << "wrote " << r.dir.string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
