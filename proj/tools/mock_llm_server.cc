// Deterministic mock of the completion, embedding and fill-mask endpoints.
#include <pthread.h>

#include <algorithm>
#include <csignal>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advsp/common/error.h"
#include "advsp/common/files.h"
#include "advsp/mock/mock_llm.h"

namespace fs = std::filesystem;
using namespace advsp;

namespace {

// Dataset lines carry {nl, sql}; eval-set lines carry {text, gold_sql}.
void load_pairs(mock::MockLlm& llm, const fs::path& path) {
  files::for_each_json_line(path, [&](const nlohmann::json& j, size_t) {
    if (j.contains("nl")) {
      llm.add_gold(j.at("nl").get<std::string>(), j.at("sql").get<std::string>());
    } else {
      llm.add_gold(j.at("text").get<std::string>(), j.at("gold_sql").get<std::string>());
    }
  });
}

void load_dir(mock::MockLlm& llm, const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) load_pairs(llm, f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock LLM server"};
  std::string mode = "echo-gold", host = "127.0.0.1", port_file;
  int port = 8080;
  std::vector<std::string> datasets, dirs;
  app.add_option("--mode", mode, "echo-gold | always-wrong")->capture_default_str();
  app.add_option("--dataset", datasets, "dataset JSONL known to echo-gold (repeatable)");
  app.add_option("--eval-dir", dirs, "directory of <KIND>.jsonl sets (repeatable)");
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port, "0 picks a free port")->capture_default_str();
  app.add_option("--port-file", port_file, "write the bound port here");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    mock::MockMode m;
    if (mode == "echo-gold") {
      m = mock::MockMode::kEchoGold;
    } else if (mode == "always-wrong") {
      m = mock::MockMode::kAlwaysWrong;
    } else {
      throw ConfigError("unknown mode '" + mode + "'");
    }
    mock::MockLlm llm(m, {});
    for (const auto& d : datasets) load_pairs(llm, d);
    for (const auto& d : dirs) load_dir(llm, d);
    // Block the stop signals before any server thread exists so they are
    // delivered to sigwait below.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGINT);
    sigaddset(&stop_signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
    mock::MockLlmServer server(std::move(llm));
    const int bound = server.start(host, port);
    if (!port_file.empty()) files::write_text_atomic(port_file, std::to_string(bound) + "\n");
    std::cerr << "mock LLM (" << mode << ") on http://" << host << ":" << bound << "\n";
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
