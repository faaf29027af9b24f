#include "sqlcritic/parser.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sqlcritic/errors.hpp"
#include "sqlcritic/lexer.hpp"

namespace sqlcritic {

namespace {

bool bare_safe(const std::string& ident) {
    if (ident.empty()) return false;
    unsigned char c0 = static_cast<unsigned char>(ident[0]);
    if (!(std::isalpha(c0) || c0 == '_')) return false;
    for (unsigned char c : ident) {
        if (!(std::isalnum(c) || c == '_' || c == '$')) return false;
    }
    return !is_keyword(ident);
}

// One name scope per SELECT core. Aliases defined in a scope are visible in
// that scope and in nested subquery scopes (correlated references).
struct Scope {
    int parent = -1;
    std::map<std::string, std::string> aliases;  // alias (lower) -> base table name (lower)
};

// A base-table reference with an alias: `singer AS T1` or `singer T1`.
struct AliasDef {
    int scope;
    std::string table_lower;
    std::string alias_lower;
    size_t as_index;     // index of the AS token, or npos
    size_t alias_index;  // index of the alias token
};

constexpr size_t npos = static_cast<size_t>(-1);

struct ClauseRange {
    ClauseKind kind;
    size_t begin;  // token indices, half-open
    size_t end;
};

class Parser {
public:
    explicit Parser(std::string_view sql) : source_(sql), tokens_(lex(sql)) {
        token_scope_.resize(tokens_.size(), 0);
        drop_.resize(tokens_.size(), false);
        unary_.resize(tokens_.size(), false);
        final_.resize(tokens_.size());
    }

    // Sets the scope that consumed tokens are attributed to, restoring the
    // enclosing scope on exit.
    struct ScopeGuard {
        ScopeGuard(Parser& p, int scope) : parser(p), saved(p.scope_id_) { p.scope_id_ = scope; }
        ~ScopeGuard() { parser.scope_id_ = saved; }
        Parser& parser;
        int saved;
    };

    ClauseDecomposition run() {
        if (tokens_.empty()) throw ParseError(0, "SELECT", "empty statement");
        scopes_.push_back(Scope{});
        parse_statement(/*depth=*/0, /*scope=*/0);
        // Tolerate a trailing semicolon, nothing after it.
        if (!at_end() && cur().is_punct(';')) {
            drop_[pos_] = true;
            advance();
        }
        if (!at_end())
            throw ParseError(cur().offset, "end of statement", "trailing tokens after statement");
        finish_aliases();
        rewrite_tokens();
        return emit();
    }

private:
    // --- token cursor -------------------------------------------------------
    bool at_end() const { return pos_ >= tokens_.size(); }
    const Token& cur() const { return tokens_[pos_]; }
    const Token& prev() const { return tokens_[pos_ - 1]; }
    size_t input_offset() const { return at_end() ? source_.size() : cur().offset; }

    void advance() {
        token_scope_[pos_] = scope_id_;
        ++pos_;
    }

    bool peek_kw(std::string_view kw, size_t ahead = 0) const {
        size_t p = pos_ + ahead;
        return p < tokens_.size() && tokens_[p].cat == TokCat::Keyword && tokens_[p].text == kw;
    }

    bool peek_punct(char p, size_t ahead = 0) const {
        size_t q = pos_ + ahead;
        return q < tokens_.size() && tokens_[q].is_punct(p);
    }

    bool accept_kw(std::string_view kw) {
        if (peek_kw(kw)) {
            advance();
            return true;
        }
        return false;
    }

    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw))
            throw ParseError(input_offset(), std::string(kw),
                             at_end() ? "unexpected end of statement" : "unexpected token '" + cur().text + "'");
    }

    void expect_punct(char p) {
        if (!peek_punct(p))
            throw ParseError(input_offset(), std::string(1, p),
                             at_end() ? "unexpected end of statement" : "unexpected token '" + cur().text + "'");
        advance();
    }

    [[noreturn]] void fail(std::string expected) const {
        throw ParseError(input_offset(), std::move(expected),
                         at_end() ? "unexpected end of statement" : "unexpected token '" + cur().text + "'");
    }

    // --- statement structure ------------------------------------------------

    // statement := select_core (set_op select_core)* [ORDER BY ...] [LIMIT ...]
    void parse_statement(int depth, int scope) {
        ScopeGuard guard(*this, scope);
        size_t stmt_begin = pos_;
        parse_select_core(depth, scope);

        bool compound = false;
        while (peek_kw("UNION") || peek_kw("INTERSECT") || peek_kw("EXCEPT")) {
            compound = true;
            advance();
            accept_kw("ALL");
            int side = new_scope(scopes_[scope].parent);
            parse_select_core(depth + 1, side);
        }
        if (peek_kw("ORDER")) {
            size_t start = pos_;
            advance();
            expect_kw("BY");
            parse_order_terms(scope);
            if (depth == 0 && !compound) record(ClauseKind::OrderBy, start, pos_);
        }
        if (peek_kw("LIMIT")) {
            size_t start = pos_;
            advance();
            parse_expr(scope);
            if (accept_kw("OFFSET")) {
                parse_expr(scope);
            } else if (peek_punct(',')) {
                advance();
                parse_expr(scope);
            }
            if (depth == 0 && !compound) record(ClauseKind::Limit, start, pos_);
        }
        if (depth == 0 && compound) {
            // The whole compound statement is one SET_OP clause.
            ranges_.clear();
            ranges_.push_back({ClauseKind::SetOp, stmt_begin, pos_});
        }
    }

    // select_core := SELECT [DISTINCT|ALL] select_list [FROM ...] [WHERE ...]
    //                [GROUP BY ...] [HAVING ...]
    void parse_select_core(int depth, int scope) {
        ScopeGuard guard(*this, scope);
        size_t start = pos_;
        if (!peek_kw("SELECT")) fail("SELECT");
        advance();
        if (peek_kw("DISTINCT") || peek_kw("ALL")) advance();
        parse_select_list(scope);
        if (depth == 0) record(ClauseKind::Select, start, pos_);

        if (peek_kw("FROM")) {
            parse_from(depth, scope);
        }
        if (peek_kw("WHERE")) {
            size_t ws = pos_;
            advance();
            parse_expr(scope);
            if (depth == 0) record(ClauseKind::Where, ws, pos_);
        }
        if (peek_kw("GROUP")) {
            size_t gs = pos_;
            advance();
            expect_kw("BY");
            parse_expr_list(scope);
            if (depth == 0) record(ClauseKind::GroupBy, gs, pos_);
        }
        if (peek_kw("HAVING")) {
            size_t hs = pos_;
            advance();
            parse_expr(scope);
            if (depth == 0) record(ClauseKind::Having, hs, pos_);
        }
    }

    void parse_select_list(int scope) {
        do {
            parse_expr(scope);
            parse_optional_column_alias();
        } while (accept_comma());
    }

    bool accept_comma() {
        if (peek_punct(',')) {
            advance();
            return true;
        }
        return false;
    }

    void parse_optional_column_alias() {
        // Column aliases are kept; only base-table aliases are stripped.
        if (peek_kw("AS")) {
            advance();
            if (at_end() || !(cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier) ||
                              cur().is(TokCat::String)))
                fail("alias name");
            advance();
            return;
        }
        if (!at_end() && (cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier))) advance();
    }

    // FROM items separated by commas stay in the FROM clause; each JOIN opens
    // a new JOIN clause that also owns its ON/USING condition.
    void parse_from(int depth, int scope) {
        size_t fs = pos_;
        expect_kw("FROM");
        parse_table_or_subquery(scope);
        while (true) {
            if (peek_punct(',')) {
                advance();
                parse_table_or_subquery(scope);
                continue;
            }
            if (!at_join_start()) break;
            if (depth == 0) record(ClauseKind::From, fs, pos_);
            size_t js = pos_;
            parse_join(scope);
            if (depth == 0) record(ClauseKind::Join, js, pos_);
            fs = pos_;  // further commas cannot follow a join in this grammar
            while (at_join_start()) {
                size_t js2 = pos_;
                parse_join(scope);
                if (depth == 0) record(ClauseKind::Join, js2, pos_);
                fs = pos_;
            }
            break;
        }
        // If no join was recorded, the whole range is the FROM clause.
        if (depth == 0 && (ranges_.empty() || ranges_.back().kind != ClauseKind::Join))
            record(ClauseKind::From, fs, pos_);
    }

    bool at_join_start() const {
        return peek_kw("JOIN") || peek_kw("INNER") || peek_kw("LEFT") || peek_kw("RIGHT") ||
               peek_kw("FULL") || peek_kw("CROSS") || peek_kw("NATURAL");
    }

    void parse_join(int scope) {
        if (accept_kw("NATURAL")) {
            if (peek_kw("LEFT") || peek_kw("RIGHT") || peek_kw("FULL") || peek_kw("INNER")) advance();
            if (peek_kw("OUTER")) advance();
        } else if (peek_kw("LEFT") || peek_kw("RIGHT") || peek_kw("FULL")) {
            advance();
            accept_kw("OUTER");
        } else if (peek_kw("INNER") || peek_kw("CROSS")) {
            advance();
        }
        expect_kw("JOIN");
        parse_table_or_subquery(scope);
        if (accept_kw("ON")) {
            parse_expr(scope);
        } else if (accept_kw("USING")) {
            expect_punct('(');
            do {
                if (at_end() || !(cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier)))
                    fail("column name");
                advance();
            } while (accept_comma());
            expect_punct(')');
        }
    }

    void parse_table_or_subquery(int scope) {
        if (peek_punct('(')) {
            advance();
            if (!peek_kw("SELECT")) fail("SELECT");
            int sub = new_scope(scope);
            parse_statement(/*depth=*/1, sub);
            expect_punct(')');
            // A derived table's alias is load-bearing; keep it.
            accept_kw("AS");
            if (!at_end() && (cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier))) advance();
            return;
        }
        if (at_end() || !(cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier)))
            fail("table name");
        std::string table_lower = to_lower(cur().text);
        advance();
        scope_table_counts_[{scope, table_lower}]++;

        size_t as_index = npos;
        if (peek_kw("AS")) {
            as_index = pos_;
            advance();
            if (at_end() || !(cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier)))
                fail("alias name");
            alias_defs_.push_back({scope, table_lower, to_lower(cur().text), as_index, pos_});
            advance();
            return;
        }
        if (!at_end() && (cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier))) {
            alias_defs_.push_back({scope, table_lower, to_lower(cur().text), npos, pos_});
            advance();
        }
    }

    void parse_order_terms(int scope) {
        do {
            parse_expr(scope);
            if (peek_kw("ASC") || peek_kw("DESC")) advance();
        } while (accept_comma());
    }

    void parse_expr_list(int scope) {
        do {
            parse_expr(scope);
        } while (accept_comma());
    }

    // --- expressions ----------------------------------------------------------

    void parse_expr(int scope) { parse_or(scope); }

    void parse_or(int scope) {
        parse_and(scope);
        while (accept_kw("OR")) parse_and(scope);
    }

    void parse_and(int scope) {
        parse_not(scope);
        while (accept_kw("AND")) parse_not(scope);
    }

    void parse_not(int scope) {
        if (accept_kw("NOT")) {
            parse_not(scope);
            return;
        }
        parse_comparison(scope);
    }

    bool at_cmp_op() const {
        if (at_end() || cur().cat != TokCat::Op) return false;
        const std::string& t = cur().text;
        return t == "=" || t == "==" || t == "!=" || t == "<>" || t == "<" || t == ">" ||
               t == "<=" || t == ">=";
    }

    void parse_comparison(int scope) {
        parse_term(scope);
        while (true) {
            if (at_cmp_op()) {
                advance();
                parse_term(scope);
                continue;
            }
            if (peek_kw("IS")) {
                advance();
                accept_kw("NOT");
                if (accept_kw("NULL")) continue;
                parse_term(scope);
                continue;
            }
            bool negated = peek_kw("NOT") && (peek_kw("IN", 1) || peek_kw("BETWEEN", 1) ||
                                              peek_kw("LIKE", 1) || peek_kw("GLOB", 1));
            if (negated) advance();
            if (accept_kw("IN")) {
                expect_punct('(');
                if (peek_kw("SELECT")) {
                    int sub = new_scope(scope);
                    parse_statement(/*depth=*/1, sub);
                } else {
                    parse_expr_list(scope);
                }
                expect_punct(')');
                continue;
            }
            if (accept_kw("BETWEEN")) {
                parse_term(scope);
                expect_kw("AND");
                parse_term(scope);
                continue;
            }
            if (peek_kw("LIKE") || peek_kw("GLOB")) {
                advance();
                parse_term(scope);
                continue;
            }
            if (negated) fail("IN, BETWEEN or LIKE");
            break;
        }
    }

    void parse_term(int scope) {
        parse_factor(scope);
        while (!at_end() && cur().cat == TokCat::Op &&
               (cur().text == "+" || cur().text == "-" || cur().text == "||" || cur().text == "&" ||
                cur().text == "|" || cur().text == "<<" || cur().text == ">>")) {
            advance();
            parse_factor(scope);
        }
    }

    void parse_factor(int scope) {
        parse_unary(scope);
        while (!at_end() && cur().cat == TokCat::Op &&
               (cur().text == "*" || cur().text == "/" || cur().text == "%")) {
            advance();
            parse_unary(scope);
        }
    }

    void parse_unary(int scope) {
        if (!at_end() && cur().cat == TokCat::Op &&
            (cur().text == "-" || cur().text == "+" || cur().text == "~")) {
            unary_[pos_] = true;
            advance();
            parse_unary(scope);
            return;
        }
        parse_postfix(scope);
    }

    void parse_postfix(int scope) {
        parse_primary(scope);
        if (accept_kw("COLLATE")) {
            if (at_end() || !(cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier)))
                fail("collation name");
            advance();
        }
    }

    void parse_primary(int scope) {
        if (at_end()) fail("expression");
        const Token& t = cur();
        switch (t.cat) {
            case TokCat::Number:
            case TokCat::String:
                advance();
                return;
            case TokCat::Op:
                if (t.text == "*") {  // bare star in a select list
                    advance();
                    return;
                }
                fail("expression");
            case TokCat::Punct:
                if (t.text == "(") {
                    advance();
                    if (peek_kw("SELECT")) {
                        int sub = new_scope(scope);
                        parse_statement(/*depth=*/1, sub);
                    } else {
                        parse_expr_list(scope);
                    }
                    expect_punct(')');
                    return;
                }
                fail("expression");
            case TokCat::Keyword:
                if (t.text == "NULL") {
                    advance();
                    return;
                }
                if (t.text == "CASE") {
                    parse_case(scope);
                    return;
                }
                if (t.text == "CAST") {
                    advance();
                    expect_punct('(');
                    parse_expr(scope);
                    expect_kw("AS");
                    parse_type_name();
                    expect_punct(')');
                    return;
                }
                if (t.text == "EXISTS") {
                    advance();
                    expect_punct('(');
                    if (!peek_kw("SELECT")) fail("SELECT");
                    int sub = new_scope(scope);
                    parse_statement(/*depth=*/1, sub);
                    expect_punct(')');
                    return;
                }
                fail("expression");
            case TokCat::Identifier:
            case TokCat::QuotedIdentifier:
                parse_name_or_call(scope);
                return;
        }
        fail("expression");
    }

    // identifier | qualified.name | qualified.* | function(args) [OVER (...)]
    void parse_name_or_call(int scope) {
        advance();  // first name part
        if (peek_punct('(')) {
            advance();
            if (!peek_punct(')')) {
                accept_kw("DISTINCT");
                if (!at_end() && cur().cat == TokCat::Op && cur().text == "*") {
                    advance();
                } else {
                    parse_expr_list(scope);
                }
            }
            expect_punct(')');
            if (accept_kw("OVER")) parse_window(scope);
            return;
        }
        while (peek_punct('.')) {
            advance();
            if (!at_end() && cur().cat == TokCat::Op && cur().text == "*") {
                advance();
                return;
            }
            if (at_end() || !(cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier)))
                fail("column name");
            advance();
        }
    }

    void parse_window(int scope) {
        expect_punct('(');
        if (accept_kw("PARTITION")) {
            expect_kw("BY");
            parse_expr_list(scope);
        }
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            parse_order_terms(scope);
        }
        expect_punct(')');
    }

    void parse_case(int scope) {
        expect_kw("CASE");
        if (!peek_kw("WHEN")) parse_expr(scope);
        while (accept_kw("WHEN")) {
            parse_expr(scope);
            expect_kw("THEN");
            parse_expr(scope);
        }
        if (accept_kw("ELSE")) parse_expr(scope);
        expect_kw("END");
    }

    void parse_type_name() {
        if (at_end() || !(cur().is(TokCat::Identifier) || cur().is(TokCat::QuotedIdentifier)))
            fail("type name");
        advance();
        while (!at_end() && cur().is(TokCat::Identifier)) advance();  // e.g. "double precision"
        if (peek_punct('(')) {
            advance();
            do {
                if (at_end() || !cur().is(TokCat::Number)) fail("number");
                advance();
            } while (accept_comma());
            expect_punct(')');
        }
    }

    // --- scopes & aliases -----------------------------------------------------

    int new_scope(int parent) {
        scopes_.push_back(Scope{parent, {}});
        return static_cast<int>(scopes_.size()) - 1;
    }

    // Decide which aliases are dropped. An alias on a table that appears more
    // than once in the same scope (self-join) is load-bearing and kept.
    void finish_aliases() {
        for (const auto& def : alias_defs_) {
            bool duplicated = scope_table_counts_[{def.scope, def.table_lower}] > 1;
            if (duplicated) continue;
            scopes_[def.scope].aliases[def.alias_lower] = def.table_lower;
            if (def.as_index != npos) drop_[def.as_index] = true;
            drop_[def.alias_index] = true;
        }
    }

    const std::string* lookup_alias(int scope, const std::string& name_lower) const {
        for (int s = scope; s != -1; s = scopes_[s].parent) {
            auto it = scopes_[s].aliases.find(name_lower);
            if (it != scopes_[s].aliases.end()) return &it->second;
        }
        return nullptr;
    }

    // --- rewriting & emission -------------------------------------------------

    void rewrite_tokens() {
        for (size_t i = 0; i < tokens_.size(); ++i) {
            const Token& t = tokens_[i];
            switch (t.cat) {
                case TokCat::Keyword:
                case TokCat::Number:
                case TokCat::String:
                case TokCat::Op:
                case TokCat::Punct:
                    final_[i] = t.text;
                    break;
                case TokCat::Identifier:
                case TokCat::QuotedIdentifier: {
                    std::string lower = to_lower(t.text);
                    // Alias references appear as qualifiers: T1.name -> singer.name.
                    bool qualifier = i + 1 < tokens_.size() && tokens_[i + 1].is_punct('.');
                    if (qualifier && !drop_[i]) {
                        if (const std::string* table = lookup_alias(token_scope_[i], lower)) lower = *table;
                    }
                    if (t.cat == TokCat::QuotedIdentifier && !bare_safe(lower)) {
                        std::string quoted;
                        for (char c : lower) {
                            quoted += c;
                            if (c == '`') quoted += '`';
                        }
                        final_[i] = "`" + quoted + "`";
                    } else {
                        final_[i] = lower;
                    }
                    break;
                }
            }
        }
    }

    // Spacing: no space after '(' '.' or a unary sign; none before ')' ',' '.';
    // '(' attaches to a preceding identifier or CAST (call syntax).
    bool space_before(size_t i, size_t prev_idx) const {
        const Token& t = tokens_[i];
        const Token& p = tokens_[prev_idx];
        if (p.is_punct('(') || p.is_punct('.') || unary_[prev_idx]) return false;
        if (t.is_punct(')') || t.is_punct(',') || t.is_punct('.')) return false;
        if (t.is_punct('(')) {
            if (p.cat == TokCat::Identifier || p.cat == TokCat::QuotedIdentifier) return false;
            if (p.cat == TokCat::Keyword && p.text == "CAST") return false;
        }
        return true;
    }

    ClauseDecomposition emit() {
        ClauseDecomposition out;
        out.source.assign(source_);

        std::string normalized;
        for (const ClauseRange& range : ranges_) {
            Clause clause;
            clause.kind = range.kind;
            size_t prev = npos;
            std::string text;
            for (size_t i = range.begin; i < range.end; ++i) {
                if (drop_[i]) continue;
                if (prev != npos && space_before(i, prev)) text += ' ';
                text += final_[i];
                clause.tokens.push_back({final_[i], tokens_[i].cat});
                prev = i;
            }
            if (!normalized.empty()) normalized += ' ';
            clause.begin = normalized.size();
            normalized += text;
            clause.end = normalized.size();
            clause.text = std::move(text);
            out.clauses.push_back(std::move(clause));
        }
        out.normalized = std::move(normalized);
        return out;
    }

    void record(ClauseKind kind, size_t begin, size_t end) { ranges_.push_back({kind, begin, end}); }

    std::string_view source_;
    std::vector<Token> tokens_;
    size_t pos_ = 0;
    int scope_id_ = 0;

    std::vector<Scope> scopes_;
    std::vector<int> token_scope_;
    std::vector<AliasDef> alias_defs_;
    std::map<std::pair<int, std::string>, int> scope_table_counts_;

    std::vector<bool> drop_;
    std::vector<bool> unary_;
    std::vector<std::string> final_;
    std::vector<ClauseRange> ranges_;
};

}  // namespace

ClauseDecomposition decompose(std::string_view sql) {
    return Parser(sql).run();
}

std::string normalize(std::string_view sql) {
    return decompose(sql).normalized;
}

}  // namespace sqlcritic
