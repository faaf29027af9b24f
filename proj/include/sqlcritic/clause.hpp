#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqlcritic/lexer.hpp"

namespace sqlcritic {

/// Top-level clause kinds. Every token of a decomposed query belongs to
/// exactly one clause. SetOp wraps a whole compound query (UNION/INTERSECT/
/// EXCEPT) as a single clause.
enum class ClauseKind {
    Select,
    From,
    Join,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Limit,
    SetOp,
};

inline constexpr int kClauseKindCount = 9;

/// Canonical identifier: SELECT, FROM, JOIN, WHERE, GROUP_BY, HAVING,
/// ORDER_BY, LIMIT, SET_OP. Used in JSON/TSV output.
std::string_view clause_name(ClauseKind kind);

/// Display form used in critique text: underscores become spaces
/// (GROUP_BY -> "GROUP BY").
std::string_view clause_display(ClauseKind kind);

/// Accepts canonical, display, or lower-case spellings.
std::optional<ClauseKind> clause_from_name(std::string_view name);

struct ClauseToken {
    std::string text;
    TokCat cat;
};

struct Clause {
    ClauseKind kind;
    std::string text;                 // normalized slice, including the leading keyword(s)
    std::vector<ClauseToken> tokens;  // normalized tokens of the slice
    size_t begin = 0;                 // byte offsets into the normalized query
    size_t end = 0;

    /// Clause text with the leading clause keyword(s) stripped:
    /// "SELECT count(*)" -> "count(*)".
    std::string body() const;
};

struct ClauseDecomposition {
    std::string source;      // input text as given
    std::string normalized;  // canonical form; equals the clause texts joined by single spaces
    std::vector<Clause> clauses;
};

/// The unique clause of `kind`, or nullptr when absent. For Join (the only
/// repeatable kind) returns the first; use clauses_of for the full list.
const Clause* clause_of(const ClauseDecomposition& decomp, ClauseKind kind);

/// All clauses of `kind` in source order. Only Join may yield more than one.
std::vector<const Clause*> clauses_of(const ClauseDecomposition& decomp, ClauseKind kind);

}  // namespace sqlcritic
