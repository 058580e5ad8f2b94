#include "advsp/curate/service.h"

#include <thread>

#include "httplib.h"

namespace advsp::curate {

using nlohmann::json;

namespace {

std::map<std::string, size_t> sizes_of(const std::vector<CandidateSet>& sets) {
  std::map<std::string, size_t> out;
  for (const auto& s : sets) {
    if (!out.emplace(s.id, s.ranked.size()).second) {
      throw CurateError("duplicate candidate set id " + s.id);
    }
  }
  return out;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

}  // namespace

struct CurateService::Impl {
  std::vector<CandidateSet> sets;
  std::map<std::string, size_t> index;  // id -> position in sets
  AnnotationStore store;
  httplib::Server server;
  std::thread thread;

  Impl(std::vector<CandidateSet> s, std::filesystem::path journal)
      : sets(std::move(s)), store(std::move(journal), sizes_of(sets)) {
    for (size_t i = 0; i < sets.size(); ++i) index[sets[i].id] = i;
    routes();
  }

  void routes() {
    server.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<perturb::Kind> kind;
      if (req.has_param("kind") && !req.get_param_value("kind").empty()) {
        kind = perturb::parse_kind(req.get_param_value("kind"));
        if (!kind) return reply_error(res, 400, "unknown kind");
      }
      const auto view = store.view();
      for (const auto& s : sets) {
        if (kind && s.kind != *kind) continue;
        if (view.count(s.id)) continue;
        return reply(res, 200, to_json(s));
      }
      res.status = 204;
    });

    server.Get(R"(/api/candidates/(.+))", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      const std::string id = req.matches[1];
      auto it = index.find(id);
      if (it == index.end()) return reply_error(res, 404, "unknown candidate set " + id);
      reply(res, 200, to_json(sets[it->second]));
    });

    server.Post("/api/annotations", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error&) {
        return reply_error(res, 400, "body is not JSON");
      }
      try {
        AnnotationRecord r = annotation_from_json(body);
        r.timestamp.clear();  // server clock is authoritative
        reply(res, 201, to_json(store.record(std::move(r))));
      } catch (const UnknownSetError& e) {
        reply_error(res, 404, e.what());
      } catch (const CurateError& e) {
        reply_error(res, 400, e.what());
      }
    });

    server.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
      const auto view = store.view();
      json out = json::object();
      for (const auto& s : sets) {
        json& k = out[std::string(perturb::to_string(s.kind))];
        if (k.is_null()) k = {{"total", 0}, {"annotated", 0}, {"rejected", 0}};
        k["total"] = k["total"].get<int>() + 1;
        auto it = view.find(s.id);
        if (it == view.end()) continue;
        k["annotated"] = k["annotated"].get<int>() + 1;
        if (it->second.rejected()) k["rejected"] = k["rejected"].get<int>() + 1;
      }
      reply(res, 200, out);
    });
  }
};

CurateService::CurateService(std::vector<CandidateSet> sets, std::filesystem::path journal)
    : impl_(std::make_unique<Impl>(std::move(sets), std::move(journal))) {}

CurateService::~CurateService() { stop(); }

int CurateService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void CurateService::serve(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw IoError("cannot serve on " + host + ":" + std::to_string(port));
  }
}

void CurateService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

const AnnotationStore& CurateService::store() const { return impl_->store; }

}  // namespace advsp::curate
