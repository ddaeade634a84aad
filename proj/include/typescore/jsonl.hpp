#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace typescore::io {

using Json = nlohmann::ordered_json;

// Calls `fn(record, line_number)` for every non-blank line. Lines that are not
// JSON objects raise ParseError carrying the line number.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn);
void for_each_record_in(std::string_view text,
                        const std::function<void(const Json&, std::size_t)>& fn);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string to_jsonl(const std::vector<Json>& records);

// Field accessors that raise ParseError naming the field and line.
std::string require_string(const Json& record, std::string_view field, std::size_t line);
double require_number(const Json& record, std::string_view field, std::size_t line);

}  // namespace typescore::io
