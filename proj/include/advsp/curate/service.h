#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "advsp/curate/curate.h"

namespace advsp::curate {

// JSON API for annotators:
//   GET  /api/tasks/next?kind=&annotator=  next unannotated set, 204 when done
//   GET  /api/candidates/{id}
//   POST /api/annotations                  201, 400 bad input, 404 unknown set
//   GET  /api/progress                     {kind: {total, annotated, rejected}}
class CurateService {
 public:
  CurateService(std::vector<CandidateSet> sets, std::filesystem::path journal);
  ~CurateService();
  CurateService(const CurateService&) = delete;
  CurateService& operator=(const CurateService&) = delete;

  // Binds (port 0 picks a free port), serves on a background thread and
  // returns the bound port.
  int start(const std::string& host, int port);
  // Binds and blocks until stop() is called from another thread.
  void serve(const std::string& host, int port);
  void stop();

  const AnnotationStore& store() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace advsp::curate
