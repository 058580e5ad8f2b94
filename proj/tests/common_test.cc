#include <gtest/gtest.h>

#include <set>
#include <stdexcept>

#include "advsp/common/files.h"
#include "advsp/common/parallel.h"
#include "advsp/common/rng.h"
#include "advsp/common/text.h"
#include "support.h"

namespace advsp {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng r(1);
  std::set<size_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const size_t v = r.uniform_index(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, UniformRealInUnitInterval) {
  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = r.uniform_real();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
  Rng r(3);
  for (size_t n = 1; n < 30; ++n) {
    for (size_t k = 0; k <= n; ++k) {
      const auto s = r.sample_without_replacement(n, k);
      ASSERT_EQ(s.size(), k);
      std::set<size_t> u(s.begin(), s.end());
      ASSERT_EQ(u.size(), k);
      for (size_t v : s) ASSERT_LT(v, n);
    }
  }
}

TEST(Rng, DeriveSeedSeparatesPurposesAndIndices) {
  std::set<uint64_t> seeds;
  for (const char* p : {"a", "b", "demo-sampling", "perturb"}) {
    for (uint64_t i = 0; i < 10; ++i) seeds.insert(derive_seed(7, p, i));
  }
  EXPECT_EQ(seeds.size(), 40u);
  EXPECT_EQ(derive_seed(7, "x", 1), derive_seed(7, "x", 1));
  EXPECT_NE(derive_seed(7, "x", 1), derive_seed(8, "x", 1));
}

TEST(Text, Basics) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::trim_right("  a \t"), "  a");
  EXPECT_EQ(text::to_lower("AbC"), "abc");
  EXPECT_TRUE(text::iequals("SeLeCt", "select"));
  EXPECT_EQ(text::split_whitespace("  a  b\tc\n"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(text::join({"a", "b"}, ", "), "a, b");
  EXPECT_EQ(text::single_line("a\r\nb\nc"), "a  b c");
  EXPECT_EQ(text::count_occurrences("aaaa", "aa"), 2u);
  EXPECT_TRUE(text::contains_alnum("--a"));
  EXPECT_FALSE(text::contains_alnum("--"));
}

TEST(ParallelMap, KeepsIndexOrder) {
  const auto out = parallel_map(50, 4, [](size_t i) { return i * i; });
  ASSERT_EQ(out.size(), 50u);
  for (size_t i = 0; i < 50; ++i) EXPECT_EQ(out[i], i * i);
}

TEST(ParallelMap, RethrowsLowestIndexError) {
  try {
    parallel_map(20, 4, [](size_t i) -> int {
      if (i == 5 || i == 15) throw std::runtime_error("fail " + std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "fail 5");
  }
}

TEST(Files, Sha256KnownVector) {
  EXPECT_EQ(files::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Files, AppendLineAndAtomicWrite) {
  testing::TempDir dir;
  const auto p = dir / "sub/x.jsonl";
  files::append_line(p, R"({"a":1})");
  files::append_line(p, R"({"a":2})");
  std::vector<int> seen;
  files::for_each_json_line(p, [&](const nlohmann::json& j, size_t) { seen.push_back(j["a"]); });
  EXPECT_EQ(seen, (std::vector<int>{1, 2}));
  files::write_text_atomic(dir / "y.txt", "hello");
  EXPECT_EQ(files::read_text(dir / "y.txt"), "hello");
  EXPECT_THROW(files::read_text(dir / "missing"), IoError);
}

}  // namespace
}  // namespace advsp
