#include "sqlcritic/clause.hpp"

#include "sqlcritic/lexer.hpp"

namespace sqlcritic {

namespace {

struct KindName {
    ClauseKind kind;
    std::string_view name;
    std::string_view display;
};

constexpr KindName kKindNames[] = {
    {ClauseKind::Select, "SELECT", "SELECT"},
    {ClauseKind::From, "FROM", "FROM"},
    {ClauseKind::Join, "JOIN", "JOIN"},
    {ClauseKind::Where, "WHERE", "WHERE"},
    {ClauseKind::GroupBy, "GROUP_BY", "GROUP BY"},
    {ClauseKind::Having, "HAVING", "HAVING"},
    {ClauseKind::OrderBy, "ORDER_BY", "ORDER BY"},
    {ClauseKind::Limit, "LIMIT", "LIMIT"},
    {ClauseKind::SetOp, "SET_OP", "SET OP"},
};

}  // namespace

std::string_view clause_name(ClauseKind kind) {
    return kKindNames[static_cast<int>(kind)].name;
}

std::string_view clause_display(ClauseKind kind) {
    return kKindNames[static_cast<int>(kind)].display;
}

std::optional<ClauseKind> clause_from_name(std::string_view name) {
    std::string upper = to_upper(name);
    for (char& c : upper) {
        if (c == ' ') c = '_';
    }
    for (const auto& kn : kKindNames) {
        if (upper == kn.name) return kn.kind;
    }
    return std::nullopt;
}

std::string Clause::body() const {
    // Number of leading keyword tokens that name the clause.
    size_t lead = 1;
    if (kind == ClauseKind::GroupBy || kind == ClauseKind::OrderBy) lead = 2;
    if (kind == ClauseKind::SetOp) lead = 0;  // the whole compound query is the body
    if (kind == ClauseKind::Join) {
        // Join type keywords (LEFT, OUTER, ...) up to and including JOIN.
        lead = 0;
        for (const auto& t : tokens) {
            ++lead;
            if (t.cat == TokCat::Keyword && t.text == "JOIN") break;
        }
    }
    if (lead == 0 || lead >= tokens.size()) return lead == 0 ? text : std::string();
    size_t pos = 0;
    for (size_t i = 0; i < lead; ++i) pos += tokens[i].text.size() + (i + 1 < lead ? 1 : 0);
    // Skip the single space that separates keywords from the body.
    pos = text.find_first_not_of(' ', pos);
    return pos == std::string::npos ? std::string() : text.substr(pos);
}

const Clause* clause_of(const ClauseDecomposition& decomp, ClauseKind kind) {
    for (const auto& c : decomp.clauses) {
        if (c.kind == kind) return &c;
    }
    return nullptr;
}

std::vector<const Clause*> clauses_of(const ClauseDecomposition& decomp, ClauseKind kind) {
    std::vector<const Clause*> out;
    for (const auto& c : decomp.clauses) {
        if (c.kind == kind) out.push_back(&c);
    }
    return out;
}

}  // namespace sqlcritic
