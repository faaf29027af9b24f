#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sqlcritic {

enum class TokCat {
    Keyword,
    Identifier,
    QuotedIdentifier,  // `x`, "x" or [x]; text stores the bare content
    Number,
    String,  // single-quoted literal; text stores the full quoted slice, byte-exact
    Op,
    Punct,  // , ( ) . ;
};

struct Token {
    TokCat cat;
    std::string text;
    size_t offset;  // byte offset into the input

    bool is(TokCat c) const { return cat == c; }
    bool is_punct(char p) const { return cat == TokCat::Punct && text.size() == 1 && text[0] == p; }
};

/// Tokenize one SQL statement. Keywords are recognized case-insensitively and
/// emitted with canonical upper-case text; identifiers keep their raw spelling.
/// Comments (`--` and `/* */`) are skipped. Throws ParseError on unterminated
/// literals or characters outside the grammar.
std::vector<Token> lex(std::string_view sql);

/// True if `word` (any case) is a reserved keyword of the grammar.
bool is_keyword(std::string_view word);

/// All reserved keywords, upper-case, in a stable order.
const std::vector<std::string>& keywords();

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

}  // namespace sqlcritic
