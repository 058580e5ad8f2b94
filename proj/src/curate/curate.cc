#include "advsp/curate/curate.h"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <set>

#include "advsp/common/files.h"

namespace advsp::curate {

using nlohmann::json;

std::string candidate_set_id(const std::string& example_id, perturb::Kind kind) {
  return example_id + ":" + std::string(perturb::to_string(kind));
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw CurateError("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0) || !(nb > 0)) throw CurateError("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

CandidateSet rank_candidates(const corpus::Example& original,
                             const std::vector<perturb::PerturbedCandidate>& candidates,
                             llm::Embedder& embedder) {
  if (candidates.empty()) {
    throw CurateError("no candidates to rank for " + original.id);
  }
  const perturb::Kind kind = candidates.front().kind;
  std::vector<std::string> texts = {original.nl};
  for (const auto& c : candidates) {
    if (c.kind != kind) throw CurateError("mixed kinds in one candidate set");
    texts.push_back(c.text);
  }
  const auto vectors = embedder.embed(texts);
  if (vectors.size() != texts.size()) {
    throw CurateError("embedding count does not match input count");
  }
  CandidateSet set;
  set.id = candidate_set_id(original.id, kind);
  set.original = original;
  set.kind = kind;
  set.ranked = candidates;
  for (size_t i = 0; i < candidates.size(); ++i) {
    set.ranked[i].similarity = cosine(vectors[0], vectors[i + 1]);
  }
  std::stable_sort(set.ranked.begin(), set.ranked.end(),
                   [](const perturb::PerturbedCandidate& a,
                      const perturb::PerturbedCandidate& b) {
                     if (*a.similarity != *b.similarity) return *a.similarity > *b.similarity;
                     return a.seed < b.seed;
                   });
  if (set.ranked.size() > kMaxRanked) set.ranked.resize(kMaxRanked);
  return set;
}

const perturb::PerturbedCandidate& auto_select(const CandidateSet& set) {
  if (set.ranked.empty()) throw CurateError("candidate set " + set.id + " is empty");
  return set.ranked.front();
}

json to_json(const CandidateSet& set) {
  json ranked = json::array();
  for (const auto& c : set.ranked) ranked.push_back(perturb::to_json(c));
  return {{"id", set.id},
          {"kind", perturb::to_string(set.kind)},
          {"original",
           {{"id", set.original.id},
            {"nl", set.original.nl},
            {"sql", set.original.gold_sql},
            {"split", corpus::to_string(set.original.split)}}},
          {"ranked", ranked}};
}

CandidateSet candidate_set_from_json(const json& j) {
  CandidateSet set;
  try {
    set.id = j.at("id").get<std::string>();
    const auto kind = perturb::parse_kind(j.at("kind").get<std::string>());
    if (!kind) throw CurateError("unknown kind in candidate set " + set.id);
    set.kind = *kind;
    const json& o = j.at("original");
    set.original.id = o.at("id").get<std::string>();
    set.original.nl = o.at("nl").get<std::string>();
    set.original.gold_sql = o.at("sql").get<std::string>();
    const auto split = corpus::parse_split(o.at("split").get<std::string>());
    if (!split) throw CurateError("unknown split in candidate set " + set.id);
    set.original.split = *split;
    for (const auto& c : j.at("ranked")) {
      set.ranked.push_back(perturb::candidate_from_json(c));
    }
  } catch (const json::exception& e) {
    throw CurateError(std::string("bad candidate set: ") + e.what());
  }
  if (set.ranked.size() > kMaxRanked) {
    throw CurateError("candidate set " + set.id + " has more than 10 candidates");
  }
  return set;
}

void write_candidate_sets(const std::filesystem::path& path,
                          const std::vector<CandidateSet>& sets) {
  std::vector<json> lines;
  for (const auto& s : sets) lines.push_back(to_json(s));
  files::write_json_lines(path, lines);
}

std::vector<CandidateSet> read_candidate_sets(const std::filesystem::path& path) {
  std::vector<CandidateSet> out;
  files::for_each_json_line(path, [&](const json& j, size_t line) {
    try {
      out.push_back(candidate_set_from_json(j));
    } catch (const Error& e) {
      throw IoError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

// ---------------------------------------------------------------------------

std::string utc_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const AnnotationRecord& r) {
  json decision = r.choice ? json(*r.choice) : json("reject");
  return {{"candidate_set_id", r.candidate_set_id},
          {"decision", decision},
          {"annotator", r.annotator},
          {"timestamp", r.timestamp}};
}

AnnotationRecord annotation_from_json(const json& j) {
  if (!j.is_object()) throw CurateError("annotation must be a JSON object");
  AnnotationRecord r;
  const auto id = j.find("candidate_set_id");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw CurateError("annotation needs a candidate_set_id string");
  }
  r.candidate_set_id = id->get<std::string>();
  const auto d = j.find("decision");
  if (d == j.end()) throw CurateError("annotation needs a decision");
  if (d->is_string() && d->get<std::string>() == "reject") {
    r.choice = std::nullopt;
  } else if (d->is_number_unsigned() ||
             (d->is_number_integer() && d->get<int64_t>() >= 0)) {
    r.choice = d->get<size_t>();
  } else {
    throw CurateError("decision must be a candidate index or \"reject\"");
  }
  const auto a = j.find("annotator");
  if (a == j.end() || !a->is_string() || a->get<std::string>().empty()) {
    throw CurateError("annotation needs an annotator name");
  }
  r.annotator = a->get<std::string>();
  if (auto t = j.find("timestamp"); t != j.end() && t->is_string()) {
    r.timestamp = t->get<std::string>();
  }
  return r;
}

AnnotationStore::AnnotationStore(std::filesystem::path journal,
                                 std::map<std::string, size_t> set_sizes)
    : journal_(std::move(journal)), set_sizes_(std::move(set_sizes)) {
  if (!std::filesystem::exists(journal_)) return;
  const std::string data = files::read_text(journal_);
  size_t start = 0, line_no = 0;
  while (start < data.size()) {
    ++line_no;
    size_t end = data.find('\n', start);
    const bool terminated = end != std::string::npos;
    if (!terminated) end = data.size();
    const std::string line = data.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      AnnotationRecord r = annotation_from_json(json::parse(line));
      latest_[r.candidate_set_id] = std::move(r);
    } catch (const std::exception& e) {
      // A crash mid-append leaves an unterminated last line; drop it.
      if (!terminated) break;
      throw IoError(journal_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

AnnotationRecord AnnotationStore::record(AnnotationRecord r) {
  const auto it = set_sizes_.find(r.candidate_set_id);
  if (it == set_sizes_.end()) {
    throw UnknownSetError("unknown candidate set '" + r.candidate_set_id + "'");
  }
  if (r.choice && *r.choice >= it->second) {
    throw CurateError("choice " + std::to_string(*r.choice) + " out of range for " +
                      r.candidate_set_id + " (" + std::to_string(it->second) +
                      " candidates)");
  }
  if (r.annotator.empty()) throw CurateError("annotator name is empty");
  if (r.timestamp.empty()) r.timestamp = utc_timestamp_now();
  std::lock_guard lock(mu_);
  files::append_line(journal_, to_json(r).dump());
  latest_[r.candidate_set_id] = r;
  return r;
}

std::optional<AnnotationRecord> AnnotationStore::latest(const std::string& set_id) const {
  std::lock_guard lock(mu_);
  auto it = latest_.find(set_id);
  if (it == latest_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, AnnotationRecord> AnnotationStore::view() const {
  std::lock_guard lock(mu_);
  return latest_;
}

// ---------------------------------------------------------------------------

namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ", ";
    if (i == 20) {
      out += "... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    out += ids[i];
  }
  return out;
}

}  // namespace

MissingAnnotationsError::MissingAnnotationsError(std::vector<std::string> ids)
    : CurateError("missing annotations for: " + join_ids(ids)), ids_(std::move(ids)) {}

BuildResult build_eval_set(const corpus::Dataset& dataset, perturb::Kind kind,
                           const std::map<std::string, CandidateSet>& sets,
                           const std::map<std::string, AnnotationRecord>& annotations,
                           BuildPolicy policy, corpus::Split split) {
  BuildResult result;
  result.set.kind = kind;
  std::vector<std::string> missing_sets, missing_annotations;
  for (const auto& ex : dataset.split(split)) {
    const std::string id = candidate_set_id(ex.id, kind);
    const auto set_it = sets.find(id);
    if (set_it == sets.end()) {
      missing_sets.push_back(id);
      continue;
    }
    const CandidateSet& set = set_it->second;
    const auto ann = annotations.find(id);
    const perturb::PerturbedCandidate* chosen = nullptr;
    if (ann != annotations.end()) {
      if (ann->second.rejected()) {
        result.omitted.push_back(ex.id);
        continue;
      }
      chosen = &set.ranked.at(*ann->second.choice);
    } else if (policy == BuildPolicy::kAutoFallback) {
      chosen = &auto_select(set);
    } else {
      missing_annotations.push_back(id);
      continue;
    }
    result.set.entries.push_back({ex.id, chosen->text, ex.gold_sql});
  }
  if (!missing_sets.empty()) {
    throw CurateError("no candidate set for: " + join_ids(missing_sets));
  }
  if (!missing_annotations.empty()) throw MissingAnnotationsError(missing_annotations);
  return result;
}

void write_eval_set(const std::filesystem::path& path, const RobustnessEvalSet& set) {
  std::vector<json> lines;
  for (const auto& e : set.entries) {
    lines.push_back({{"example_id", e.example_id},
                     {"kind", perturb::to_string(set.kind)},
                     {"text", e.text},
                     {"gold_sql", e.gold_sql}});
  }
  files::write_json_lines(path, lines);
}

RobustnessEvalSet read_eval_set(const std::filesystem::path& path, perturb::Kind kind) {
  RobustnessEvalSet set;
  set.kind = kind;
  std::set<std::string> seen;
  files::for_each_json_line(path, [&](const json& j, size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    EvalEntry e;
    try {
      if (j.at("kind").get<std::string>() != perturb::to_string(kind)) {
        throw IoError(where + ": entry kind does not match " +
                      std::string(perturb::to_string(kind)));
      }
      e.example_id = j.at("example_id").get<std::string>();
      e.text = j.at("text").get<std::string>();
      e.gold_sql = j.at("gold_sql").get<std::string>();
    } catch (const json::exception& ex) {
      throw IoError(where + ": " + ex.what());
    }
    if (!seen.insert(e.example_id).second) {
      throw IoError(where + ": duplicate example id " + e.example_id);
    }
    set.entries.push_back(std::move(e));
  });
  return set;
}

}  // namespace advsp::curate
