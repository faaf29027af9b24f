#pragma once

#include <array>
#include <span>
#include <vector>

#include "sqlcritic/critique.hpp"
#include "sqlcritic/judge.hpp"

namespace sqlcritic {

/// Clause-level alignment of a predicted critique against the label critique.
struct MatchReport {
    std::vector<std::pair<ClauseKind, MatchCategory>> pairs;  // one entry per predicted point
    std::vector<ClauseKind> omissions;  // label points with no predicted counterpart
    int label_point_count = 0;          // >= 1; 1 when the label verdict is Correct
    bool both_correct = false;          // both verdicts Correct: perfect critique by convention
};

/// Pair points by clause kind (JOIN points pair by ordinal), grade paired
/// explanations with the judge, mark label-less predicted points Redundant
/// and unmatched label points as omissions.
MatchReport match_critiques(const Critique& pred, const Critique& label,
                            const ExplanationJudge& judge);

/// Weighted sum of pair categories over the label point count, clamped to
/// [0, 1]. Omissions contribute zero implicitly.
double critique_quality(const MatchReport& report);

/// Clause-level agreement between the validated (chosen) critique and the
/// rejected one: -1 on verdict conflict, otherwise the fraction of chosen
/// points whose counterpart in the rejected critique matches at least
/// partially. Both-Correct pairs score 1.
struct ConsistencyScore {
    double value = 0.0;  // -1, or within [0, 1]
};

ConsistencyScore consistency_score(const Critique& chosen, const Critique& rejected,
                                   const ExplanationJudge& judge);

struct CpsSample {
    Verdict pred_verdict;
    Verdict label_verdict;
    double cq;
};

/// Mean of verdict-indicator * CQ over the dataset, in [0, 1]; the CLI
/// reports it * 100. Throws EmptyDataset on an empty span.
double cps(std::span<const CpsSample> samples);

/// Per-clause error-analysis tallies.
struct TaxonomyRow {
    int omission = 0;        // label point missed entirely
    int critique_error = 0;  // matched clause, wrong explanation (ErrorMatch)
    int excessive = 0;       // flagged a clause the label does not flag (Redundant)
};

using TaxonomyTable = std::array<TaxonomyRow, kClauseKindCount>;

TaxonomyTable error_taxonomy(std::span<const MatchReport> reports);

/// TSV rendering of the taxonomy table, one row per clause kind.
std::string taxonomy_tsv(const TaxonomyTable& table);

}  // namespace sqlcritic
