#include "advsp/corpus/query_split.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "advsp/common/text.h"

namespace advsp::corpus {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_numeric_literal(std::string_view token) {
  size_t i = 0;
  auto digits = [&] {
    const size_t start = i;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i;
    return i > start;
  };
  if (!digits()) return false;
  if (i < token.size() && token[i] == '.') {
    ++i;
    digits();
  }
  if (i < token.size() && (token[i] == 'e' || token[i] == 'E')) {
    ++i;
    if (i < token.size() && (token[i] == '+' || token[i] == '-')) ++i;
    if (!digits()) return false;
  }
  return i == token.size();
}

}  // namespace

std::string lf_template(std::string_view sql) {
  std::string out;
  bool pending_space = false;
  auto emit = [&](std::string_view piece) {
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out.append(piece);
  };
  size_t i = 0;
  while (i < sql.size()) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      ++i;
    } else if (c == '\'' || c == '"') {
      // Quoted literal; a doubled quote is an escape. Unterminated literals
      // run to end of input.
      ++i;
      while (i < sql.size()) {
        if (sql[i] == c) {
          if (i + 1 < sql.size() && sql[i + 1] == c) {
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        ++i;
      }
      // Back-to-back literals get a separating space; "?""?" would read back
      // as one literal with an escaped quote.
      if (!out.empty() && out.back() == '"') pending_space = true;
      emit("\"?\"");
    } else if (std::isdigit(static_cast<unsigned char>(c)) &&
               (i == 0 || !is_ident_char(sql[i - 1]))) {
      size_t j = i;
      while (j < sql.size() && (is_ident_char(sql[j]) || sql[j] == '.' ||
                                ((sql[j] == '+' || sql[j] == '-') &&
                                 (sql[j - 1] == 'e' || sql[j - 1] == 'E')))) {
        ++j;
      }
      const std::string_view token = sql.substr(i, j - i);
      if (is_numeric_literal(token)) {
        emit("0");
      } else {
        emit(text::to_upper(token));
      }
      i = j;
    } else {
      const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      emit(std::string_view(&up, 1));
      ++i;
    }
  }
  return out;
}

std::vector<SplitViolation> validate_query_split(const Dataset& dataset) {
  struct Entry {
    size_t first_seen;
    std::set<Split> splits;
    std::vector<std::string> ids;
  };
  std::map<std::string, Entry> by_template;
  size_t order = 0;
  for (const auto& ex : dataset.examples()) {
    auto [it, inserted] = by_template.try_emplace(lf_template(ex.gold_sql));
    if (inserted) it->second.first_seen = order++;
    it->second.splits.insert(ex.split);
    it->second.ids.push_back(ex.id);
  }
  std::vector<std::pair<size_t, SplitViolation>> found;
  for (auto& [tmpl, entry] : by_template) {
    if (entry.splits.size() < 2) continue;
    found.push_back({entry.first_seen,
                     {tmpl,
                      std::vector<Split>(entry.splits.begin(), entry.splits.end()),
                      entry.ids}});
  }
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<SplitViolation> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

}  // namespace advsp::corpus
