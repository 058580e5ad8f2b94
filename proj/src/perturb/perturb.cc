#include "advsp/perturb/perturb.h"

#include <algorithm>
#include <cctype>
#include <exception>
#include <set>
#include <unordered_set>
#include <variant>

#include "advsp/common/files.h"
#include "advsp/common/parallel.h"
#include "advsp/common/rng.h"
#include "advsp/common/text.h"

namespace advsp::perturb {

using nlohmann::json;

const std::vector<Kind>& all_kinds() {
  static const std::vector<Kind> kKinds = {Kind::kTB, Kind::kRD, Kind::kRS,
                                           Kind::kCS, Kind::kCI, Kind::kRB,
                                           Kind::kDB};
  return kKinds;
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::kTB: return "TB";
    case Kind::kRD: return "RD";
    case Kind::kRS: return "RS";
    case Kind::kCS: return "CS";
    case Kind::kCI: return "CI";
    case Kind::kRB: return "RB";
    case Kind::kDB: return "DB";
  }
  return "?";
}

std::optional<Kind> parse_kind(std::string_view name) {
  for (Kind k : all_kinds()) {
    if (text::iequals(name, to_string(k))) return k;
  }
  return std::nullopt;
}

bool is_word_level(Kind kind) { return kind != Kind::kRB && kind != Kind::kDB; }

std::vector<WordToken> tokenize_words(std::string_view nl) {
  std::vector<WordToken> out;
  size_t i = 0;
  while (i < nl.size()) {
    while (i < nl.size() && std::isspace(static_cast<unsigned char>(nl[i]))) ++i;
    const size_t start = i;
    while (i < nl.size() && !std::isspace(static_cast<unsigned char>(nl[i]))) ++i;
    if (i > start) out.push_back({std::string(nl.substr(start, i - start)), start, i});
  }
  return out;
}

std::string replace_words(std::string_view nl,
                          const std::vector<WordToken>& tokens,
                          const std::vector<WordEdit>& edits) {
  std::vector<WordEdit> sorted = edits;
  std::sort(sorted.begin(), sorted.end(),
            [](const WordEdit& a, const WordEdit& b) {
              return a.token_index < b.token_index;
            });
  std::string out;
  size_t cursor = 0;
  for (const auto& e : sorted) {
    const WordToken& tok = tokens.at(e.token_index);
    out.append(nl.substr(cursor, tok.start - cursor));
    out.append(e.replacement);
    cursor = tok.end;
  }
  out.append(nl.substr(cursor));
  return out;
}

// ---------------------------------------------------------------------------
// TB

const std::vector<std::string>& typo_stopwords() {
  // "the" is deliberately absent: it is a valid typo target.
  static const std::vector<std::string> kWords = {
      "a",   "an",   "of",   "in",  "on",   "at",   "to",   "is",   "are",
      "was", "were", "be",   "by",  "for",  "from", "with", "and",  "or",
      "as",  "it",   "its",  "that", "this", "do",  "does"};
  return kWords;
}

std::string_view keyboard_neighbors(char lower) {
  switch (lower) {
    case 'q': return "was";
    case 'w': return "qeasd";
    case 'e': return "wrsdf";
    case 'r': return "etdfg";
    case 't': return "ryfgh";
    case 'y': return "tughj";
    case 'u': return "yihjk";
    case 'i': return "uojkl";
    case 'o': return "ipkl";
    case 'p': return "ol";
    case 'a': return "qwsz";
    case 's': return "qweadzx";
    case 'd': return "wersfxc";
    case 'f': return "ertdgcv";
    case 'g': return "rtyfhvb";
    case 'h': return "tyugjbn";
    case 'j': return "yuihknm";
    case 'k': return "uiojlm";
    case 'l': return "iopk";
    case 'z': return "asx";
    case 'x': return "zsdc";
    case 'c': return "xdfv";
    case 'v': return "cfgb";
    case 'b': return "vghn";
    case 'n': return "bhjm";
    case 'm': return "njk";
    default: return "";
  }
}

namespace {

std::optional<char> glyph_for(char c) {
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'l': return '1';
    case 'o': return '0';
    case 'a': return '@';
    case 's': return '5';
    case 'e': return '3';
    default: break;
  }
  switch (c) {
    case '1': return 'l';
    case '0': return 'o';
    case '@': return 'a';
    case '5': return 's';
    case '3': return 'e';
    default: return std::nullopt;
  }
}

}  // namespace

std::vector<std::string> typo_edits(std::string_view word, TypoFamily family) {
  const std::string w(word);
  const size_t n = w.size();
  std::vector<std::string> out;
  switch (family) {
    case TypoFamily::kInsertSpace:
      for (size_t p = 1; p < n; ++p) out.push_back(w.substr(0, p) + " " + w.substr(p));
      break;
    case TypoFamily::kDelete:
      for (size_t p = 1; p + 1 < n; ++p) out.push_back(w.substr(0, p) + w.substr(p + 1));
      break;
    case TypoFamily::kSwap:
      for (size_t p = 1; p + 2 < n; ++p) {
        if (w[p] == w[p + 1]) continue;
        std::string s = w;
        std::swap(s[p], s[p + 1]);
        out.push_back(std::move(s));
      }
      break;
    case TypoFamily::kGlyph: {
      std::string seen;
      for (char c : w) {
        if (seen.find(c) != std::string::npos) continue;
        seen.push_back(c);
        const auto g = glyph_for(c);
        if (!g) continue;
        std::string s = w;
        std::replace(s.begin(), s.end(), c, *g);
        out.push_back(std::move(s));
      }
      break;
    }
    case TypoFamily::kKeyboard:
      for (size_t p = 0; p < n; ++p) {
        const unsigned char c = static_cast<unsigned char>(w[p]);
        const bool upper = std::isupper(c);
        for (char nb : keyboard_neighbors(static_cast<char>(std::tolower(c)))) {
          std::string s = w;
          s[p] = upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(nb))) : nb;
          out.push_back(std::move(s));
        }
      }
      break;
  }
  return out;
}

TypoResult perturb_typo_detailed(std::string_view nl, uint64_t seed) {
  const auto tokens = tokenize_words(nl);
  const auto& stop = typo_stopwords();
  auto collect = [&](size_t min_len, bool skip_stopwords) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < tokens.size(); ++i) {
      const auto& s = tokens[i].surface;
      if (s.size() < min_len) continue;
      if (skip_stopwords &&
          std::find(stop.begin(), stop.end(), text::to_lower(s)) != stop.end()) {
        continue;
      }
      idx.push_back(i);
    }
    return idx;
  };
  std::vector<size_t> eligible = collect(3, true);
  if (eligible.size() < 2) eligible = collect(2, false);
  if (eligible.size() < 2) {
    throw PerturbError(PerturbErrorCode::kTooFewEligibleWords,
                       "TB needs at least 2 eligible words: '" + std::string(nl) + "'");
  }
  Rng rng(seed);
  TypoResult result;
  for (size_t pick : rng.sample_without_replacement(eligible.size(), 2)) {
    const size_t index = eligible[pick];
    const std::string& word = tokens[index].surface;
    std::vector<std::vector<std::string>> families;
    for (TypoFamily f : {TypoFamily::kInsertSpace, TypoFamily::kDelete,
                         TypoFamily::kSwap, TypoFamily::kGlyph,
                         TypoFamily::kKeyboard}) {
      auto edits = typo_edits(word, f);
      if (!edits.empty()) families.push_back(std::move(edits));
    }
    // Any word of length >= 2 admits an interior space, so never empty.
    const auto& family = families[rng.uniform_index(families.size())];
    result.edits.push_back({index, family[rng.uniform_index(family.size())]});
  }
  std::sort(result.edits.begin(), result.edits.end(),
            [](const WordEdit& a, const WordEdit& b) {
              return a.token_index < b.token_index;
            });
  result.text = replace_words(nl, tokens, result.edits);
  return result;
}

std::string perturb_typo(std::string_view nl, uint64_t seed) {
  return perturb_typo_detailed(nl, seed).text;
}

// ---------------------------------------------------------------------------
// RD, RS

std::string perturb_random_delete(std::string_view nl, uint64_t seed) {
  const auto words = text::split_whitespace(nl);
  if (words.size() < 3) {
    throw PerturbError(PerturbErrorCode::kTooShort,
                       "RD needs at least 3 words: '" + std::string(nl) + "'");
  }
  Rng rng(seed);
  const auto drop = rng.sample_without_replacement(words.size(), 2);
  std::vector<std::string> kept;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i != drop[0] && i != drop[1]) kept.push_back(words[i]);
  }
  return text::join(kept, " ");
}

std::string perturb_random_swap(std::string_view nl, uint64_t seed) {
  const auto tokens = tokenize_words(nl);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < tokens.size(); ++i) {
    for (size_t j = i + 1; j < tokens.size(); ++j) {
      if (tokens[i].surface != tokens[j].surface) pairs.emplace_back(i, j);
    }
  }
  if (pairs.empty()) {
    throw PerturbError(PerturbErrorCode::kNoSwappablePair,
                       "RS found no pair of differing words: '" + std::string(nl) + "'");
  }
  Rng rng(seed);
  const auto [i, j] = pairs[rng.uniform_index(pairs.size())];
  return replace_words(nl, tokens,
                       {{i, tokens[j].surface}, {j, tokens[i].surface}});
}

// ---------------------------------------------------------------------------
// CS, CI

namespace {

bool usable_fill(const std::string& fill) {
  return !fill.empty() && !text::contains_whitespace(fill) &&
         text::contains_alnum(fill);
}

}  // namespace

std::string perturb_context_substitute(std::string_view nl, uint64_t seed,
                                       llm::MaskFiller& masker, int top_k) {
  std::string current(nl);
  auto tokens = tokenize_words(current);
  if (tokens.size() < 2) {
    throw PerturbError(PerturbErrorCode::kTooFewEligibleWords,
                       "CS needs at least 2 words: '" + std::string(nl) + "'");
  }
  Rng rng(seed);
  int replaced = 0;
  for (size_t index : rng.permutation(tokens.size())) {
    const std::string original = tokens[index].surface;
    const std::string masked =
        replace_words(current, tokens, {{index, masker.mask_token()}});
    for (const auto& f : masker.mask_fill(masked, top_k)) {
      if (!usable_fill(f.fill) || text::iequals(f.fill, original)) continue;
      current = replace_words(current, tokens, {{index, f.fill}});
      tokens = tokenize_words(current);
      ++replaced;
      break;
    }
    if (replaced == 2) return current;
  }
  throw PerturbError(PerturbErrorCode::kNoSubstitute,
                     "CS could not find 2 substitutable words: '" + std::string(nl) + "'");
}

std::string perturb_context_insert(std::string_view nl, uint64_t seed,
                                   llm::MaskFiller& masker, int top_k) {
  auto words = text::split_whitespace(nl);
  Rng rng(seed);
  for (int round = 0; round < 2; ++round) {
    const size_t boundary = rng.uniform_index(words.size() + 1);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(boundary),
                 masker.mask_token());
    const auto fills = masker.mask_fill(text::join(words, " "), top_k);
    auto it = std::find_if(fills.begin(), fills.end(),
                           [](const llm::MaskFill& f) { return usable_fill(f.fill); });
    if (it == fills.end()) {
      throw PerturbError(PerturbErrorCode::kNoSubstitute,
                         "CI got no usable fill: '" + std::string(nl) + "'");
    }
    words[boundary] = it->fill;
  }
  return text::join(words, " ");
}

// ---------------------------------------------------------------------------
// RB, DB

std::string paraphrase_prompt(std::string_view nl) {
  return "Paraphrase the following question, preserving its exact meaning: " +
         text::single_line(nl) + "\nParaphrase:";
}

std::string perturb_rewrite(std::string_view nl, llm::Completer& paraphraser) {
  llm::CompletionRequest req;
  req.prompt = paraphrase_prompt(nl);
  req.temperature = 0.0;
  req.stop = {"\n"};
  const auto resp = paraphraser.complete(req);
  std::string out(text::trim(resp.text));
  if (out.empty()) {
    throw PerturbError(PerturbErrorCode::kEmptyParaphrase,
                       "empty paraphrase for '" + std::string(nl) + "'");
  }
  return out;
}

std::string perturb_distract(std::string_view nl) {
  return std::string(nl) + " " + std::string(kDistractSuffix);
}

// ---------------------------------------------------------------------------

std::string apply(Kind kind, std::string_view nl, uint64_t seed, const Clients& clients) {
  auto need = [&](auto* client, const char* what) -> decltype(*client) {
    if (client == nullptr) {
      throw ConfigError("kind " + std::string(to_string(kind)) + " needs a " + what + " client");
    }
    return *client;
  };
  switch (kind) {
    case Kind::kTB: return perturb_typo(nl, seed);
    case Kind::kRD: return perturb_random_delete(nl, seed);
    case Kind::kRS: return perturb_random_swap(nl, seed);
    case Kind::kCS: return perturb_context_substitute(nl, seed, need(clients.masker, "mask-fill"));
    case Kind::kCI: return perturb_context_insert(nl, seed, need(clients.masker, "mask-fill"));
    case Kind::kRB: return perturb_rewrite(nl, need(clients.completer, "completion"));
    case Kind::kDB: return perturb_distract(nl);
  }
  throw Error("unknown perturbation kind");
}

CandidateBatch generate_candidates(const corpus::Example& example, Kind kind,
                                   const Clients& clients, int n, uint64_t seed,
                                   size_t max_in_flight) {
  if (n < 1) throw ConfigError("candidate count must be >= 1");
  if ((kind == Kind::kCS || kind == Kind::kCI) && clients.masker == nullptr) {
    throw ConfigError("kind " + std::string(to_string(kind)) + " needs a mask-fill client");
  }
  if (kind == Kind::kRB && clients.completer == nullptr) {
    throw ConfigError("kind RB needs a completion client");
  }
  using Outcome = std::variant<std::string, std::exception_ptr>;
  auto run = [&](size_t i) -> Outcome {
    const uint64_t s = seed + i;
    try {
      return apply(kind, example.nl, s, clients);
    } catch (const Error&) {
      return std::current_exception();
    }
  };
  const auto outcomes = parallel_map(static_cast<size_t>(n), max_in_flight, run);

  CandidateBatch batch;
  std::unordered_set<std::string> seen;
  std::exception_ptr first_error;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const uint64_t s = seed + i;
    if (const auto* err = std::get_if<std::exception_ptr>(&outcomes[i])) {
      if (!first_error) first_error = *err;
      try {
        std::rethrow_exception(*err);
      } catch (const std::exception& e) {
        batch.failures.push_back({s, e.what()});
      }
      continue;
    }
    const auto& text = std::get<std::string>(outcomes[i]);
    if (!seen.insert(text).second) continue;
    batch.candidates.push_back({example.id, kind, text, std::nullopt, s});
  }
  if (batch.candidates.empty() && first_error) std::rethrow_exception(first_error);
  return batch;
}

json to_json(const PerturbedCandidate& c) {
  json j = {{"original_id", c.original_id},
            {"kind", to_string(c.kind)},
            {"text", c.text},
            {"seed", c.seed}};
  if (c.similarity) j["similarity"] = *c.similarity;
  return j;
}

PerturbedCandidate candidate_from_json(const json& j) {
  PerturbedCandidate c;
  try {
    c.original_id = j.at("original_id").get<std::string>();
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error("unknown kind '" + j.at("kind").get<std::string>() + "'");
    c.kind = *kind;
    c.text = j.at("text").get<std::string>();
    c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("similarity") && !j["similarity"].is_null()) {
      c.similarity = j["similarity"].get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(std::string("bad candidate record: ") + e.what());
  }
  if (c.text.empty()) throw Error("bad candidate record: empty text");
  return c;
}

void write_candidates(const std::filesystem::path& path,
                      const std::vector<PerturbedCandidate>& candidates) {
  std::vector<json> lines;
  lines.reserve(candidates.size());
  for (const auto& c : candidates) lines.push_back(to_json(c));
  files::write_json_lines(path, lines);
}

std::vector<PerturbedCandidate> read_candidates(const std::filesystem::path& path) {
  std::vector<PerturbedCandidate> out;
  files::for_each_json_line(path, [&](const json& j, size_t line) {
    try {
      out.push_back(candidate_from_json(j));
    } catch (const Error& e) {
      throw IoError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace advsp::perturb
