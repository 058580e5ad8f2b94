#include <gtest/gtest.h>

#include "advsp/common/files.h"
#include "advsp/corpus/dataset.h"
#include "advsp/corpus/schema.h"
#include "advsp/prompt/prompt.h"
#include "support.h"

namespace advsp::prompt {
namespace {

using advsp::testing::data_dir;
using advsp::testing::source_dir;

const std::string kMissouri = "what can you tell me about the population of missouri";

class GeoPrompt : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    schema_text_ = new std::string(
        serialize_schema(corpus::load_schema(data_dir() / "geo/schema.json", 3), 3));
    const auto d = corpus::load_dataset(data_dir() / "geo/geoquery.jsonl");
    const auto train = d.split(corpus::Split::kTrain);
    train_ = new std::vector<corpus::Example>(train.begin(), train.begin() + 10);
  }
  static void TearDownTestSuite() {
    delete schema_text_;
    delete train_;
  }
  static std::string golden(const std::string& name) {
    return files::read_text(source_dir() / "tests/golden" / name);
  }
  static std::string* schema_text_;
  static std::vector<corpus::Example>* train_;
};
std::string* GeoPrompt::schema_text_ = nullptr;
std::vector<corpus::Example>* GeoPrompt::train_ = nullptr;

TEST_F(GeoPrompt, ZeroShotMatchesGolden) {
  const auto p = assemble(*schema_text_, PromptConfig{}, {}, kMissouri);
  EXPECT_EQ(p.text, golden("geo_zero_shot.txt"));
  EXPECT_EQ(p.shot_count, 0u);
}

TEST_F(GeoPrompt, TenShotMatchesGolden) {
  const auto p = assemble(*schema_text_, PromptConfig{}, {*train_, {}}, kMissouri);
  EXPECT_EQ(p.text, golden("geo_ten_shot.txt"));
  EXPECT_EQ(p.shot_count, 10u);
  EXPECT_EQ(p.token_estimate, (p.text.size() + 2) / 3);
}

TEST_F(GeoPrompt, AdversarialDemosFollowStandardOnes) {
  const std::vector<corpus::Example> two(train_->begin(), train_->begin() + 2);
  const DemoSet plain{two, {}};
  const DemoSet adv{two, {{"how big is texsa", "SELECT area FROM state WHERE state_name = 'texas'"}}};
  const auto a = assemble(*schema_text_, PromptConfig{}, plain, kMissouri);
  const auto b = assemble(*schema_text_, PromptConfig{}, adv, kMissouri);
  EXPECT_EQ(b.shot_count, 3u);
  const auto tail = "-- " + kMissouri + "\nSELECT";
  const auto demo = format_demo(adv.adversarial[0].text, adv.adversarial[0].gold_sql);
  const auto cut = a.text.size() - tail.size();
  EXPECT_EQ(b.text, a.text.substr(0, cut) + demo + tail);
}

TEST_F(GeoPrompt, BudgetIsEnforced) {
  PromptConfig cfg;
  const auto full = assemble(*schema_text_, cfg, {*train_, {}}, kMissouri);
  cfg.max_prompt_tokens = full.token_estimate;
  EXPECT_NO_THROW(assemble(*schema_text_, cfg, {*train_, {}}, kMissouri));
  cfg.max_prompt_tokens = full.token_estimate - 1;
  try {
    assemble(*schema_text_, cfg, {*train_, {}}, kMissouri);
    FAIL();
  } catch (const BudgetExceededError& e) {
    EXPECT_EQ(e.estimate(), full.token_estimate);
    EXPECT_EQ(e.limit(), full.token_estimate - 1);
  }
}

TEST(FormatDemo, Examples) {
  EXPECT_EQ(format_demo("how big is texas", "SELECT area FROM state"),
            "-- how big is texas\nSELECT area FROM state;\n");
  EXPECT_EQ(format_demo("  two\nlines ", " SELECT 1; "), "-- two lines\nSELECT 1;\n");
}

TEST(PredictedSql, PrependsPrimedKeyword) {
  EXPECT_EQ(predicted_sql(" population FROM state"), "SELECT population FROM state");
  EXPECT_EQ(predicted_sql(""), "SELECT");
  EXPECT_EQ(predicted_sql(" 1 \n"), "SELECT 1");
}

TEST(EstimateTokens, CeilOfThirds) {
  EXPECT_EQ(estimate_tokens(""), 0u);
  EXPECT_EQ(estimate_tokens("a"), 1u);
  EXPECT_EQ(estimate_tokens("abc"), 1u);
  EXPECT_EQ(estimate_tokens("abcd"), 2u);
}

TEST(PromptConfig, Validation) {
  EXPECT_THROW(prompt_config_from_json({{"instruction", "  "}}), ConfigError);
  EXPECT_THROW(prompt_config_from_json({{"max_prompt_tokens", 0}}), ConfigError);
  EXPECT_THROW(prompt_config_from_json({{"rows_limit", "x"}}), ConfigError);
  const auto c = prompt_config_from_json({{"rows_limit", 5}});
  EXPECT_EQ(c.rows_limit, 5u);
  EXPECT_EQ(prompt_config_from_json(to_json(c)).rows_limit, 5u);
}

TEST(SerializeSchema, RowsLimitCapsSampleRows) {
  corpus::Schema s;
  corpus::TableDef t;
  t.name = "t";
  t.columns = {{"a", "int"}, {"b", ""}};
  t.sample_rows = {{"1", "x"}, {"2", "y"}};
  s.tables = {t};
  EXPECT_EQ(serialize_schema(s, 1), "CREATE TABLE t (a int, b)\n/*\nSELECT * FROM t LIMIT 1;\na\tb\n1\tx\n*/");
  EXPECT_EQ(serialize_schema(s, 0), "CREATE TABLE t (a int, b)\n/*\nSELECT * FROM t LIMIT 0;\na\tb\n*/");
}

}  // namespace
}  // namespace advsp::prompt
