#include "sqlcritic/critique.hpp"

#include <algorithm>
#include <map>

#include "sqlcritic/errors.hpp"
#include "sqlcritic/lexer.hpp"

namespace sqlcritic {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Strip one leading bullet marker: -, *, or U+2022.
std::string_view strip_bullet(std::string_view line) {
    if (!line.empty() && (line.front() == '-' || line.front() == '*')) return trim(line.substr(1));
    if (line.size() >= 3 && line.substr(0, 3) == "\xE2\x80\xA2") return trim(line.substr(3));
    return line;
}

// Try to read a clause tag at the start of a point line. Accepts
// "[WHERE] ...", "WHERE: ..." and "GROUP BY ..." style prefixes.
bool read_clause_tag(std::string_view line, ClauseKind& kind, std::string_view& rest) {
    line = trim(line);
    if (!line.empty() && line.front() == '[') {
        size_t close = line.find(']');
        if (close == std::string_view::npos) return false;
        auto k = clause_from_name(trim(line.substr(1, close - 1)));
        if (!k) return false;
        kind = *k;
        rest = trim(line.substr(close + 1));
        return true;
    }
    // Two-word clause names first so "GROUP BY x" does not stop at "GROUP".
    static const std::pair<const char*, ClauseKind> prefixes[] = {
        {"GROUP BY", ClauseKind::GroupBy}, {"ORDER BY", ClauseKind::OrderBy},
        {"SET OP", ClauseKind::SetOp},     {"GROUP_BY", ClauseKind::GroupBy},
        {"ORDER_BY", ClauseKind::OrderBy}, {"SET_OP", ClauseKind::SetOp},
        {"SELECT", ClauseKind::Select},    {"FROM", ClauseKind::From},
        {"JOIN", ClauseKind::Join},        {"WHERE", ClauseKind::Where},
        {"HAVING", ClauseKind::Having},    {"LIMIT", ClauseKind::Limit},
    };
    std::string upper = to_upper(line);
    for (const auto& [prefix, k] : prefixes) {
        size_t n = std::string_view(prefix).size();
        if (upper.rfind(prefix, 0) == 0 && upper.size() > n &&
            (upper[n] == ' ' || upper[n] == ':')) {
            kind = k;
            rest = trim(line.substr(upper[n] == ':' ? n + 1 : n));
            return true;
        }
    }
    return false;
}

void append_point(std::vector<CritiquePoint>& points, ClauseKind kind, std::string explanation) {
    if (explanation.empty()) return;
    if (kind != ClauseKind::Join) {
        for (auto& p : points) {
            if (p.clause == kind) {
                p.explanation += "; " + explanation;
                return;
            }
        }
    }
    points.push_back({kind, std::move(explanation)});
}

}  // namespace

std::string serialize_critique(const Critique& c) {
    if (c.verdict == Verdict::Correct) return std::string(kCorrectSentence);
    std::string out;
    for (const auto& p : c.points) {
        if (!out.empty()) out += '\n';
        out += "- [";
        out += clause_display(p.clause);
        out += "] ";
        out += p.explanation;
    }
    return out;
}

Critique parse_critique(std::string_view text) {
    if (text.find(kCorrectSentence) != std::string_view::npos) return Critique::correct();

    std::vector<CritiquePoint> points;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = trim(text.substr(pos, eol == std::string_view::npos ? eol : eol - pos));
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        if (line.empty()) continue;
        line = strip_bullet(line);
        ClauseKind kind;
        std::string_view rest;
        if (read_clause_tag(line, kind, rest)) append_point(points, kind, std::string(rest));
    }
    if (points.empty())
        throw MalformedCritique("no verdict sentence and no parseable critique points");
    return Critique::incorrect(std::move(points));
}

Critique diff_critique(const ClauseDecomposition& pred, const ClauseDecomposition& gold) {
    std::vector<CritiquePoint> points;

    auto describe = [](ClauseKind kind, const std::string& pred_body, const std::string& gold_body) {
        std::string name(clause_display(kind));
        if (pred_body.empty())
            return "The " + name + " clause is missing; it should be `" + gold_body + "`.";
        if (gold_body.empty())
            return "The " + name + " clause `" + pred_body + "` should not be present.";
        return "The " + name + " clause should be `" + gold_body + "` instead of `" + pred_body + "`.";
    };

    // Walk kinds in the pred's clause order, then gold-only kinds in gold order.
    std::vector<ClauseKind> order;
    auto add_kind = [&](ClauseKind k) {
        if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
    };
    for (const auto& c : pred.clauses) add_kind(c.kind);
    for (const auto& c : gold.clauses) add_kind(c.kind);

    for (ClauseKind kind : order) {
        auto pred_list = clauses_of(pred, kind);
        auto gold_list = clauses_of(gold, kind);
        size_t n = std::max(pred_list.size(), gold_list.size());
        for (size_t i = 0; i < n; ++i) {
            std::string pb = i < pred_list.size() ? pred_list[i]->body() : std::string();
            std::string gb = i < gold_list.size() ? gold_list[i]->body() : std::string();
            if (pb != gb) points.push_back({kind, describe(kind, pb, gb)});
        }
    }
    if (points.empty()) return Critique::correct();
    return Critique::incorrect(std::move(points));
}

}  // namespace sqlcritic
