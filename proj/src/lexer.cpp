#include "sqlcritic/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "sqlcritic/errors.hpp"

namespace sqlcritic {

namespace {

const std::unordered_set<std::string>& keyword_set() {
    static const std::unordered_set<std::string> kws = {
        "select", "from",   "where",  "group",     "by",      "having", "order",  "limit",
        "offset", "join",   "inner",  "left",      "right",   "full",   "outer",  "cross",
        "natural", "on",    "using",  "as",        "and",     "or",     "not",    "in",
        "exists", "between", "like",  "glob",      "is",      "null",   "distinct", "all",
        "union",  "intersect", "except", "case",   "when",    "then",   "else",   "end",
        "cast",   "asc",    "desc",   "collate",   "over",    "partition",
    };
    return kws;
}

bool ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool is_keyword(std::string_view word) {
    return keyword_set().count(to_lower(word)) > 0;
}

const std::vector<std::string>& keywords() {
    static const std::vector<std::string> list = [] {
        std::vector<std::string> out;
        out.reserve(keyword_set().size());
        for (const auto& kw : keyword_set()) out.push_back(to_upper(kw));
        std::sort(out.begin(), out.end());
        return out;
    }();
    return list;
}

std::vector<Token> lex(std::string_view sql) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = sql.size();

    auto peek = [&](size_t k) -> char { return i + k < n ? sql[i + k] : '\0'; };

    while (i < n) {
        unsigned char c = static_cast<unsigned char>(sql[i]);

        if (std::isspace(c)) {
            ++i;
            continue;
        }
        // -- line comment
        if (c == '-' && peek(1) == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        // /* block comment */
        if (c == '/' && peek(1) == '*') {
            size_t start = i;
            i += 2;
            while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            if (i + 1 >= n) throw ParseError(start, "*/", "unterminated comment");
            i += 2;
            continue;
        }
        // string literal, '' escapes; slice kept byte-exact
        if (c == '\'') {
            size_t start = i;
            ++i;
            while (true) {
                if (i >= n) throw ParseError(start, "'", "unterminated string literal");
                if (sql[i] == '\'') {
                    if (peek(1) == '\'') {
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                ++i;
            }
            out.push_back({TokCat::String, std::string(sql.substr(start, i - start)), start});
            continue;
        }
        // quoted identifiers: `x`, "x", [x]
        if (c == '`' || c == '"' || c == '[') {
            char close = c == '[' ? ']' : static_cast<char>(c);
            size_t start = i;
            ++i;
            std::string content;
            while (true) {
                if (i >= n) throw ParseError(start, std::string(1, close), "unterminated quoted identifier");
                if (sql[i] == close) {
                    if (close != ']' && peek(1) == close) {  // doubled quote escape
                        content.push_back(close);
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                content.push_back(sql[i]);
                ++i;
            }
            out.push_back({TokCat::QuotedIdentifier, content, start});
            continue;
        }
        // number: 123, 1.5, .5, 1e-3
        if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            size_t start = i;
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            if (i < n && sql[i] == '.') {
                ++i;
                while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            }
            if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                size_t mark = i;
                ++i;
                if (i < n && (sql[i] == '+' || sql[i] == '-')) ++i;
                if (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) {
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                } else {
                    i = mark;  // not an exponent; 'e...' lexes as a following identifier
                }
            }
            out.push_back({TokCat::Number, std::string(sql.substr(start, i - start)), start});
            continue;
        }
        if (ident_start(c)) {
            size_t start = i;
            while (i < n && ident_char(static_cast<unsigned char>(sql[i]))) ++i;
            std::string word(sql.substr(start, i - start));
            std::string lower = to_lower(word);
            if (keyword_set().count(lower)) {
                out.push_back({TokCat::Keyword, to_upper(word), start});
            } else {
                out.push_back({TokCat::Identifier, std::move(word), start});
            }
            continue;
        }
        // multi-char operators first
        static const std::array<const char*, 9> two_char = {"||", "==", "!=", "<>", "<=", ">=", "<<", ">>", nullptr};
        bool matched = false;
        for (const char* op : two_char) {
            if (!op) break;
            if (c == static_cast<unsigned char>(op[0]) && peek(1) == op[1]) {
                out.push_back({TokCat::Op, op, i});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;

        switch (c) {
            case '=': case '<': case '>': case '+': case '-': case '*':
            case '/': case '%': case '&': case '|': case '~':
                out.push_back({TokCat::Op, std::string(1, static_cast<char>(c)), i});
                ++i;
                continue;
            case ',': case '(': case ')': case '.': case ';':
                out.push_back({TokCat::Punct, std::string(1, static_cast<char>(c)), i});
                ++i;
                continue;
            default:
                throw ParseError(i, "", std::string("unexpected character '") + static_cast<char>(c) + "'");
        }
    }
    return out;
}

}  // namespace sqlcritic
