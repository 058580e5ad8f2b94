#include "advsp/prompt/prompt.h"

#include <algorithm>

#include "advsp/common/text.h"

namespace advsp::prompt {

using nlohmann::json;

void PromptConfig::validate() const {
  if (text::trim(instruction).empty()) {
    throw ConfigError("prompt instruction is empty");
  }
  if (max_prompt_tokens == 0) throw ConfigError("max_prompt_tokens must be > 0");
}

PromptConfig prompt_config_from_json(const json& j) {
  PromptConfig cfg;
  try {
    cfg.rows_limit = j.value("rows_limit", cfg.rows_limit);
    cfg.instruction = j.value("instruction", cfg.instruction);
    cfg.max_prompt_tokens = j.value("max_prompt_tokens", cfg.max_prompt_tokens);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("prompt config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const PromptConfig& cfg) {
  return {{"rows_limit", cfg.rows_limit},
          {"instruction", cfg.instruction},
          {"max_prompt_tokens", cfg.max_prompt_tokens}};
}

std::string serialize_schema(const corpus::Schema& schema, size_t rows_limit) {
  std::string out;
  for (size_t t = 0; t < schema.tables.size(); ++t) {
    const auto& table = schema.tables[t];
    if (t > 0) out += "\n\n";
    out += "CREATE TABLE " + table.name + " (";
    bool first = true;
    for (const auto& col : table.columns) {
      if (!first) out += ", ";
      first = false;
      out += col.name;
      if (!col.type.empty()) out += " " + col.type;
    }
    for (const auto& fk : table.foreign_keys) {
      out += ", FOREIGN KEY (" + fk.column + ") REFERENCES " + fk.ref_table +
             "(" + fk.ref_column + ")";
    }
    out += ")\n/*\nSELECT * FROM " + table.name + " LIMIT " +
           std::to_string(rows_limit) + ";\n";
    std::vector<std::string> header;
    for (const auto& col : table.columns) header.push_back(col.name);
    out += text::join(header, "\t") + "\n";
    const size_t rows = std::min(rows_limit, table.sample_rows.size());
    for (size_t r = 0; r < rows; ++r) {
      out += text::join(table.sample_rows[r], "\t") + "\n";
    }
    out += "*/";
  }
  return out;
}

std::string format_demo(std::string_view nl, std::string_view sql) {
  std::string q(text::trim(sql));
  if (q.empty() || q.back() != ';') q += ';';
  return "-- " + std::string(text::trim(text::single_line(nl))) + "\n" + q + "\n";
}

size_t estimate_tokens(std::string_view text) { return (text.size() + 2) / 3; }

AssembledPrompt assemble(std::string_view schema_text, const PromptConfig& cfg,
                         const DemoSet& demos, std::string_view target_nl) {
  std::string out(schema_text);
  out += "\n\n-- " + text::single_line(cfg.instruction) + "\n\n";
  for (const auto& ex : demos.standard) out += format_demo(ex.nl, ex.gold_sql);
  for (const auto& adv : demos.adversarial) out += format_demo(adv.text, adv.gold_sql);
  out += "-- " + std::string(text::trim(text::single_line(target_nl))) + "\nSELECT";

  AssembledPrompt result;
  result.token_estimate = estimate_tokens(out);
  if (result.token_estimate > cfg.max_prompt_tokens) {
    throw BudgetExceededError(result.token_estimate, cfg.max_prompt_tokens);
  }
  result.shot_count = demos.standard.size() + demos.adversarial.size();
  result.text = std::move(out);
  return result;
}

std::string predicted_sql(std::string_view continuation) {
  return std::string(text::trim("SELECT" + std::string(continuation)));
}

}  // namespace advsp::prompt
