#pragma once

#include <string>
#include <vector>

#include "json.hpp"

// Line-oriented JSON helpers. All writers emit LF line endings and
// alphabetically ordered keys so repeated runs are byte-identical.

namespace rulebench {

std::string json_line(const nlohmann::json& j);  // dump with sorted keys, no newline

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);  // throws std::runtime_error if unreadable

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

}  // namespace rulebench
