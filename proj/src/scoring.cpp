#include "sqlcritic/scoring.hpp"

#include <algorithm>

#include "sqlcritic/errors.hpp"

namespace sqlcritic {

namespace {

// Points of `c` on `kind`, in order. Only JOIN can yield more than one.
std::vector<const CritiquePoint*> points_on(const Critique& c, ClauseKind kind) {
    std::vector<const CritiquePoint*> out;
    for (const auto& p : c.points) {
        if (p.clause == kind) out.push_back(&p);
    }
    return out;
}

}  // namespace

MatchReport match_critiques(const Critique& pred, const Critique& label,
                            const ExplanationJudge& judge) {
    MatchReport report;
    report.both_correct = pred.verdict == Verdict::Correct && label.verdict == Verdict::Correct;
    report.label_point_count =
        label.verdict == Verdict::Incorrect ? static_cast<int>(label.points.size()) : 1;

    // Per-kind cursor so JOIN points pair by ordinal.
    std::array<size_t, kClauseKindCount> used{};
    for (const auto& p : pred.points) {
        auto label_pts = points_on(label, p.clause);
        size_t& cursor = used[static_cast<int>(p.clause)];
        if (cursor < label_pts.size()) {
            MatchCategory cat = judge.classify(p.explanation, label_pts[cursor]->explanation);
            report.pairs.emplace_back(p.clause, cat);
            ++cursor;
        } else {
            report.pairs.emplace_back(p.clause, MatchCategory::Redundant);
        }
    }
    for (const auto& lp : label.points) {
        auto pred_pts = points_on(pred, lp.clause);
        auto label_pts = points_on(label, lp.clause);
        // Ordinal of this label point among its kind.
        size_t ordinal = 0;
        for (const auto* q : label_pts) {
            if (q == &lp) break;
            ++ordinal;
        }
        if (ordinal >= pred_pts.size()) report.omissions.push_back(lp.clause);
    }
    return report;
}

double critique_quality(const MatchReport& report) {
    if (report.both_correct) return 1.0;
    double sum = 0.0;
    for (const auto& [kind, cat] : report.pairs) sum += match_weight(cat);
    int denom = std::max(report.label_point_count, 1);
    double cq = sum / static_cast<double>(denom);
    return std::clamp(cq, 0.0, 1.0);
}

ConsistencyScore consistency_score(const Critique& chosen, const Critique& rejected,
                                   const ExplanationJudge& judge) {
    if (chosen.verdict != rejected.verdict) return {-1.0};
    if (chosen.verdict == Verdict::Correct) return {1.0};

    int total = static_cast<int>(chosen.points.size());
    if (total == 0) return {1.0};
    int matched = 0;
    std::array<size_t, kClauseKindCount> used{};
    for (const auto& p : chosen.points) {
        auto rejected_pts = points_on(rejected, p.clause);
        size_t& cursor = used[static_cast<int>(p.clause)];
        if (cursor < rejected_pts.size()) {
            MatchCategory cat = judge.classify(rejected_pts[cursor]->explanation, p.explanation);
            if (cat == MatchCategory::ExactMatch || cat == MatchCategory::PartialMatch) ++matched;
            ++cursor;
        }
    }
    return {static_cast<double>(matched) / static_cast<double>(total)};
}

double cps(std::span<const CpsSample> samples) {
    if (samples.empty()) throw EmptyDataset("cps over an empty dataset");
    double sum = 0.0;
    for (const auto& s : samples) {
        if (s.pred_verdict == s.label_verdict) sum += s.cq;
    }
    return sum / static_cast<double>(samples.size());
}

TaxonomyTable error_taxonomy(std::span<const MatchReport> reports) {
    TaxonomyTable table{};
    for (const auto& r : reports) {
        for (ClauseKind k : r.omissions) table[static_cast<int>(k)].omission++;
        for (const auto& [kind, cat] : r.pairs) {
            if (cat == MatchCategory::ErrorMatch) table[static_cast<int>(kind)].critique_error++;
            if (cat == MatchCategory::Redundant) table[static_cast<int>(kind)].excessive++;
        }
    }
    return table;
}

std::string taxonomy_tsv(const TaxonomyTable& table) {
    std::string out = "clause\tomission\tcritique_error\texcessive\n";
    for (int k = 0; k < kClauseKindCount; ++k) {
        out += clause_name(static_cast<ClauseKind>(k));
        out += '\t';
        out += std::to_string(table[k].omission);
        out += '\t';
        out += std::to_string(table[k].critique_error);
        out += '\t';
        out += std::to_string(table[k].excessive);
        out += '\n';
    }
    return out;
}

}  // namespace sqlcritic
