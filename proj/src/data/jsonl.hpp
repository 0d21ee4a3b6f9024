#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace clhoi {

using Json = nlohmann::json;

// Calls fn(object, line_number) for every non-blank line. Malformed JSON and
// exceptions thrown by fn are rethrown as parse errors naming path and line.
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&, std::size_t)>& fn);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace clhoi
