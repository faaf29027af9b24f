#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sqlcritic/clause.hpp"

namespace sqlcritic {

enum class Verdict { Correct, Incorrect };

/// One (clause, explanation) point of a critique.
struct CritiquePoint {
    ClauseKind clause;
    std::string explanation;  // non-empty

    bool operator==(const CritiquePoint&) const = default;
};

/// Either a "correct" verdict with no points, or an ordered set of points.
/// At most one point per clause kind, except JOIN.
struct Critique {
    Verdict verdict = Verdict::Correct;
    std::vector<CritiquePoint> points;

    bool operator==(const Critique&) const = default;

    static Critique correct() { return {}; }
    static Critique incorrect(std::vector<CritiquePoint> pts) {
        return {Verdict::Incorrect, std::move(pts)};
    }
};

/// The exact sentence that labels a correct query.
inline constexpr std::string_view kCorrectSentence = "This SQL query is correct.";

/// Canonical wire form: the correct sentence, or one `- [<CLAUSE>] <text>`
/// line per point with GROUP_BY/ORDER_BY rendered as "GROUP BY"/"ORDER BY".
std::string serialize_critique(const Critique& c);

/// Inverse of serialize on canonical text. Tolerant of `*`/`•` bullets,
/// missing brackets when a line starts with a clause keyword, and treats any
/// text containing the exact correct-sentence as a Correct verdict. Points on
/// the same non-JOIN clause are merged. Throws MalformedCritique when neither
/// a verdict nor any point line can be read.
Critique parse_critique(std::string_view text);

/// Rule-based clause-diff critique: compares the two decompositions clause by
/// clause and emits one point per differing clause (Correct when none
/// differ). Used by the offline annotator and in tests.
Critique diff_critique(const ClauseDecomposition& pred, const ClauseDecomposition& gold);

/// One row of a preference dataset.
struct PreferenceRecord {
    std::string question;
    std::string db_id;
    std::string gold_sql;
    std::string pred_sql;
    Critique chosen;
    Critique rejected;
    bool validated = false;   // chosen passed correction-validation (or verdict Correct)
    bool has_rejected = true; // false in benchmark mode
};

}  // namespace sqlcritic
