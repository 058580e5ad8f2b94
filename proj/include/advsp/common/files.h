#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace advsp::files {

std::string read_text(const std::filesystem::path& path);

// Writes via a temp file in the same directory and renames over the target,
// so readers never observe a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view data);

// Calls `fn(record, line_number)` for every non-blank line. Parse failures
// throw IoError naming the 1-based line.
void for_each_json_line(
    const std::filesystem::path& path,
    const std::function<void(const nlohmann::json&, size_t)>& fn);

void write_json_lines(const std::filesystem::path& path,
                      const std::vector<nlohmann::json>& records);

// Appends `line` plus a newline and fsyncs before returning.
void append_line(const std::filesystem::path& path, std::string_view line);

nlohmann::json read_json(const std::filesystem::path& path);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace advsp::files
