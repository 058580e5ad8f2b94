#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "advsp/corpus/dataset.h"

namespace advsp::corpus {

// Lexical SQL template: string literals become "?", numeric literals 0,
// whitespace runs a single space, everything else uppercased. Total over any
// input and idempotent.
std::string lf_template(std::string_view sql);

struct SplitViolation {
  std::string sql_template;
  std::vector<Split> splits;             // distinct, in enum order
  std::vector<std::string> example_ids;  // file order
};

// Templates that occur in more than one split, in order of first occurrence.
// Empty means the dataset is a valid query split.
std::vector<SplitViolation> validate_query_split(const Dataset& dataset);

}  // namespace advsp::corpus
