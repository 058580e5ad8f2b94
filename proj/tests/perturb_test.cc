#include <gtest/gtest.h>

#include "advsp/corpus/dataset.h"
#include "advsp/perturb/perturb.h"
#include "perturb_checks.h"
#include "support.h"

namespace advsp::perturb {
namespace {

using namespace advsp::testing;

const std::string kMissouri = "what can you tell me about the population of missouri";

std::vector<std::string> geo_test_nls() {
  std::vector<std::string> out;
  for (const auto& ex : corpus::load_dataset(data_dir() / "geo/geoquery.jsonl").split(corpus::Split::kTest)) {
    out.push_back(ex.nl);
  }
  return out;
}

PerturbErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const PerturbError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no PerturbError";
  return PerturbErrorCode::kTooShort;
}

TEST(Kinds, SevenKindsAndLevels) {
  EXPECT_EQ(all_kinds().size(), 7u);
  for (Kind k : all_kinds()) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_EQ(parse_kind("rb"), Kind::kRB);
  EXPECT_FALSE(parse_kind("XX"));
  int word = 0;
  for (Kind k : all_kinds()) word += is_word_level(k);
  EXPECT_EQ(word, 5);
  EXPECT_FALSE(is_word_level(Kind::kDB));
}

TEST(Tokenize, OffsetsPointIntoSource) {
  const std::string s = "  how  big, is\ttexas ";
  const auto toks = tokenize_words(s);
  ASSERT_EQ(toks.size(), 4u);
  for (size_t i = 0; i < toks.size(); ++i) {
    EXPECT_EQ(s.substr(toks[i].start, toks[i].end - toks[i].start), toks[i].surface);
    if (i > 0) {
      EXPECT_LT(toks[i - 1].end, toks[i].start);
    }
  }
  EXPECT_EQ(toks[1].surface, "big,");
}

TEST(Typo, EditFamilies) {
  EXPECT_EQ(typo_edits("tell", TypoFamily::kGlyph), (std::vector<std::string>{"t3ll", "te11"}));
  EXPECT_EQ(typo_edits("the", TypoFamily::kInsertSpace), (std::vector<std::string>{"t he", "th e"}));
  EXPECT_EQ(typo_edits("the", TypoFamily::kDelete), (std::vector<std::string>{"te"}));
  EXPECT_TRUE(typo_edits("the", TypoFamily::kSwap).empty());
  EXPECT_EQ(typo_edits("tell", TypoFamily::kSwap), (std::vector<std::string>{"tlel"}));
  EXPECT_EQ(keyboard_neighbors('q'), "was");
  EXPECT_EQ(keyboard_neighbors('1'), "");
  for (TypoFamily f : {TypoFamily::kInsertSpace, TypoFamily::kDelete, TypoFamily::kSwap,
                       TypoFamily::kGlyph, TypoFamily::kKeyboard}) {
    for (const std::string w : {"population", "tell", "Missouri", "at"}) {
      for (const auto& e : typo_edits(w, f)) {
        EXPECT_NE(e, w);
        EXPECT_TRUE(one_typo_edit(w, e)) << w << " -> " << e;
      }
    }
  }
}

TEST(Typo, KeyboardMapIsSymmetric) {
  for (char c = 'a'; c <= 'z'; ++c) {
    for (char n : keyboard_neighbors(c)) {
      EXPECT_NE(keyboard_neighbors(n).find(c), std::string_view::npos) << c << " " << n;
    }
  }
}

TEST(Typo, TheStaysEligibleOthersSkipped) {
  const auto& stop = typo_stopwords();
  EXPECT_EQ(stop.size(), 25u);
  EXPECT_EQ(std::find(stop.begin(), stop.end(), "the"), stop.end());
  // "of" is a stopword and "me" is too short: neither is ever touched.
  for (uint64_t s = 0; s < 300; ++s) {
    const auto r = perturb_typo_detailed(kMissouri, s);
    const auto toks = tokenize_words(kMissouri);
    for (const auto& e : r.edits) {
      EXPECT_NE(toks[e.token_index].surface, "of");
      EXPECT_NE(toks[e.token_index].surface, "me");
    }
  }
}

TEST(Typo, PreconditionsAndWidening) {
  EXPECT_EQ(code_of([] { perturb_typo("missouri", 1); }), PerturbErrorCode::kTooFewEligibleWords);
  EXPECT_EQ(code_of([] { perturb_typo("a b", 1); }), PerturbErrorCode::kTooFewEligibleWords);
  // Only stopwords: eligibility widens to every word of length >= 2.
  std::string why;
  const std::string out = perturb_typo("is it", 4);
  EXPECT_TRUE(tb_exactly_two_edits("is it", out, &why)) << why;
}

TEST(Typo, InvariantsOverGeoTest) {
  const auto nls = geo_test_nls();
  for (uint64_t s = 0; s < 300; ++s) {
    const auto& nl = nls[s % nls.size()];
    const auto out = perturb_typo(nl, s);
    std::string why;
    ASSERT_TRUE(tb_exactly_two_edits(nl, out, &why)) << why;
    ASSERT_EQ(out, perturb_typo(nl, s));
  }
}

TEST(RandomDelete, TableSevenExampleIsReachable) {
  bool hit = false;
  for (uint64_t s = 0; s < 2000 && !hit; ++s) {
    hit = perturb_random_delete(kMissouri, s) == "can you tell me the population of missouri";
  }
  EXPECT_TRUE(hit);
}

TEST(RandomDelete, InvariantsAndErrors) {
  EXPECT_EQ(code_of([] { perturb_random_delete("two words", 1); }), PerturbErrorCode::kTooShort);
  EXPECT_EQ(perturb_random_delete("a  b\tc", 3).find("  "), std::string::npos);
  for (const auto& nl : geo_test_nls()) {
    for (uint64_t s = 0; s < 3; ++s) {
      const auto in = words_of(nl), out = words_of(perturb_random_delete(nl, s));
      ASSERT_EQ(out.size() + 2, in.size());
      // order preserved: out is a subsequence of in
      size_t j = 0;
      for (size_t i = 0; i < in.size() && j < out.size(); ++i) j += in[i] == out[j];
      ASSERT_EQ(j, out.size());
    }
  }
}

TEST(RandomSwap, TableSevenExampleIsReachable) {
  bool hit = false;
  for (uint64_t s = 0; s < 2000 && !hit; ++s) {
    hit = perturb_random_swap(kMissouri, s) ==
          "what can you tell me missouri the population of about";
  }
  EXPECT_TRUE(hit);
}

TEST(RandomSwap, MultisetPreservedExactlyTwoSlotsMove) {
  EXPECT_EQ(code_of([] { perturb_random_swap("go go", 1); }), PerturbErrorCode::kNoSwappablePair);
  EXPECT_EQ(code_of([] { perturb_random_swap("alone", 1); }), PerturbErrorCode::kNoSwappablePair);
  for (const auto& nl : geo_test_nls()) {
    const auto out = perturb_random_swap(nl, 9);
    ASSERT_EQ(sorted_words(out), sorted_words(nl));
    const auto a = words_of(nl), b = words_of(out);
    size_t diff = 0;
    for (size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
    ASSERT_EQ(diff, 2u);
  }
}

TEST(ContextSubstitute, FixedFillLandsInBothSlots) {
  FixedMasker masker({"foo"});
  const auto out = perturb_context_substitute(kMissouri, 5, masker);
  const auto a = words_of(kMissouri), b = words_of(out);
  ASSERT_EQ(a.size(), b.size());
  size_t foo = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      EXPECT_EQ(b[i], "foo");
      ++foo;
    }
  }
  EXPECT_EQ(foo, 2u);
  // The second request already carries the first substitution.
  ASSERT_EQ(masker.seen.size(), 2u);
  EXPECT_NE(masker.seen[1].find("foo"), std::string::npos);
  EXPECT_EQ(text::count_occurrences(masker.seen[0], "<mask>"), 1u);
}

TEST(ContextSubstitute, SkipsFillsEqualToOriginal) {
  // The mask fill echoes the word it replaced; "ZZ" is the next usable fill.
  class Echo : public llm::MaskFiller {
   public:
    const std::string& mask_token() const override { return t_; }
    std::vector<llm::MaskFill> mask_fill(const std::string&, int) override {
      return {{"WHAT", 0.5}, {"two words", 0.2}, {"!!", 0.1}, {"zz", 0.05}};
    }
    std::string t_ = "<mask>";
  } echo;
  const auto out = perturb_context_substitute("what what what", 1, echo);
  EXPECT_EQ(words_of(out).size(), 3u);
  EXPECT_EQ(text::count_occurrences(out, "zz"), 2u);

  FixedMasker same({"go"});
  EXPECT_EQ(code_of([&] { perturb_context_substitute("go go go", 1, same); }),
            PerturbErrorCode::kNoSubstitute);
}

TEST(ContextSubstitute, TableOneExampleIsReachable) {
  ScriptedMasker masker(kMissouri, {{"can", "will"}, {"the", "a"}}, false);
  bool hit = false;
  for (uint64_t s = 0; s < 5000 && !hit; ++s) {
    hit = perturb_context_substitute(kMissouri, s, masker) ==
          "what will you tell me about a population of missouri";
  }
  EXPECT_TRUE(hit);
}

TEST(ContextInsert, CountsAndFixedFill) {
  FixedMasker masker({"zzz"});
  const auto out = perturb_context_insert(kMissouri, 11, masker);
  EXPECT_EQ(words_of(out).size(), words_of(kMissouri).size() + 2);
  EXPECT_EQ(text::count_occurrences(out, "zzz"), 2u);
  EXPECT_EQ(out, perturb_context_insert(kMissouri, 11, masker));
  // Removing the inserted words gives back the input.
  std::vector<std::string> rest;
  for (const auto& w : words_of(out)) {
    if (w != "zzz") rest.push_back(w);
  }
  EXPECT_EQ(text::join(rest, " "), kMissouri);
  FixedMasker useless({" ", "..."});
  EXPECT_EQ(code_of([&] { perturb_context_insert(kMissouri, 1, useless); }),
            PerturbErrorCode::kNoSubstitute);
}

TEST(ContextInsert, TableSevenExampleIsReachable) {
  ScriptedMasker masker(kMissouri, {{"what", "what"}, {"population", "exact"}}, true);
  bool hit = false;
  for (uint64_t s = 0; s < 5000 && !hit; ++s) {
    hit = perturb_context_insert(kMissouri, s, masker) ==
          "what what can you tell me about the exact population of missouri";
  }
  EXPECT_TRUE(hit);
}

TEST(Rewrite, PromptTrimAndEmpty) {
  FnCompleter ok([](const llm::CompletionRequest& r) {
    EXPECT_EQ(r.temperature, 0.0);
    EXPECT_NE(r.prompt.find("Paraphrase the following question, preserving its exact meaning: "),
              std::string::npos);
    return llm::CompletionResponse{"  What information can you provide on Missouri's population?  ", {}};
  });
  EXPECT_EQ(perturb_rewrite(kMissouri, ok),
            "What information can you provide on Missouri's population?");
  FnCompleter empty([](const llm::CompletionRequest&) { return llm::CompletionResponse{" \n", {}}; });
  EXPECT_EQ(code_of([&] { perturb_rewrite(kMissouri, empty); }), PerturbErrorCode::kEmptyParaphrase);
}

TEST(Distract, ExactSuffix) {
  EXPECT_EQ(perturb_distract(kMissouri),
            kMissouri + " who is who; what is what; when is when; which is which; where is where");
}

TEST(GenerateCandidates, DbCollapsesToOne) {
  const corpus::Example ex{"e1", kMissouri, "SELECT 1", corpus::Split::kTest};
  const auto b = generate_candidates(ex, Kind::kDB, {}, 20, 0);
  ASSERT_EQ(b.candidates.size(), 1u);
  EXPECT_EQ(b.candidates[0].seed, 0u);
  EXPECT_EQ(b.candidates[0].original_id, "e1");
}

TEST(GenerateCandidates, RdOnTenWords) {
  const corpus::Example ex{"e1", kMissouri, "SELECT 1", corpus::Split::kTest};
  const auto b = generate_candidates(ex, Kind::kRD, {}, 20, 100);
  EXPECT_LE(b.candidates.size(), 20u);
  EXPECT_GE(b.candidates.size(), 2u);
  std::set<std::string> texts;
  uint64_t last = 0;
  for (const auto& c : b.candidates) {
    EXPECT_EQ(words_of(c.text).size(), 8u);
    EXPECT_TRUE(texts.insert(c.text).second);
    EXPECT_GE(c.seed, 100u);
    EXPECT_LT(c.seed, 120u);
    EXPECT_GE(c.seed, last);
    last = c.seed;
    // first occurrence wins
    EXPECT_EQ(perturb_random_delete(kMissouri, c.seed), c.text);
  }
}

TEST(GenerateCandidates, ParallelMatchesSerial) {
  const corpus::Example ex{"e1", kMissouri, "SELECT 1", corpus::Split::kTest};
  mock::MockLlm llm(mock::MockMode::kEchoGold, {});
  MockMasker masker(llm);
  for (Kind k : {Kind::kTB, Kind::kCS, Kind::kCI}) {
    const auto a = generate_candidates(ex, k, {nullptr, &masker}, 20, 7, 1);
    const auto b = generate_candidates(ex, k, {nullptr, &masker}, 20, 7, 4);
    EXPECT_EQ(a.candidates, b.candidates);
  }
}

TEST(GenerateCandidates, PartialAndTotalFailure) {
  const corpus::Example ex{"e1", "go go", "SELECT 1", corpus::Split::kTest};
  EXPECT_THROW(generate_candidates(ex, Kind::kRS, {}, 5, 0), PerturbError);
  const corpus::Example three{"e2", "a b c", "SELECT 1", corpus::Split::kTest};
  int calls = 0;
  FnCompleter flaky([&](const llm::CompletionRequest&) {
    return llm::CompletionResponse{calls++ == 0 ? "" : "a paraphrase", {}};
  });
  const auto b = generate_candidates(three, Kind::kRB, {&flaky, nullptr}, 3, 0);
  EXPECT_EQ(b.candidates.size(), 1u);
  EXPECT_EQ(b.failures.size(), 1u);
  EXPECT_EQ(b.failures[0].seed, 0u);
  EXPECT_THROW(generate_candidates(three, Kind::kCS, {}, 3, 0), ConfigError);
  EXPECT_THROW(generate_candidates(three, Kind::kRB, {}, 3, 0), ConfigError);
  EXPECT_THROW(generate_candidates(three, Kind::kRD, {}, 0, 0), ConfigError);
}

TEST(Apply, DispatchesAndChecksClients) {
  EXPECT_EQ(apply(Kind::kRD, kMissouri, 3, {}), perturb_random_delete(kMissouri, 3));
  EXPECT_EQ(apply(Kind::kDB, kMissouri, 3, {}), perturb_distract(kMissouri));
  FixedMasker masker({"zzz"});
  EXPECT_EQ(apply(Kind::kCI, kMissouri, 5, {nullptr, &masker}),
            perturb_context_insert(kMissouri, 5, masker));
  EXPECT_THROW(apply(Kind::kCS, kMissouri, 1, {}), ConfigError);
  EXPECT_THROW(apply(Kind::kRB, kMissouri, 1, {}), ConfigError);
}

TEST(CandidatesIo, RoundTrip) {
  TempDir dir;
  std::vector<PerturbedCandidate> cs = {{"a", Kind::kTB, "x y", std::nullopt, 3},
                                        {"b", Kind::kRB, "z \"q\"", 0.25, 0}};
  write_candidates(dir / "c.jsonl", cs);
  EXPECT_EQ(read_candidates(dir / "c.jsonl"), cs);
}

}  // namespace
}  // namespace advsp::perturb
