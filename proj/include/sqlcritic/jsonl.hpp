#pragma once

#include <functional>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

namespace sqlcritic {

using Json = nlohmann::json;

/// Parse one JSON object per line, skipping blank lines. Throws ConfigError
/// with the line number on malformed lines or an unreadable file.
std::vector<Json> read_jsonl(const std::string& path);
std::vector<Json> read_jsonl_stream(std::istream& in, const std::string& origin);

/// Serialize one object per line. Object keys come out sorted, so files are
/// byte-stable across runs.
void write_jsonl(const std::string& path, const std::vector<Json>& rows);

std::string jsonl_line(const Json& row);

}  // namespace sqlcritic
