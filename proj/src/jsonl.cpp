#include "sqlcritic/jsonl.hpp"

#include <fstream>

#include "sqlcritic/errors.hpp"

namespace sqlcritic {

std::vector<Json> read_jsonl_stream(std::istream& in, const std::string& origin) {
    std::vector<Json> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json parsed = Json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed JSON line");
        rows.push_back(std::move(parsed));
    }
    return rows;
}

std::vector<Json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open " + path);
    return read_jsonl_stream(in, path);
}

void write_jsonl(const std::string& path, const std::vector<Json>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out.good()) throw ConfigError("cannot write " + path);
    for (const auto& row : rows) out << jsonl_line(row) << '\n';
}

std::string jsonl_line(const Json& row) {
    return row.dump();
}

}  // namespace sqlcritic
