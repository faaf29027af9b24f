#pragma once

#include <string>
#include <vector>

#include "sqlcritic/clause.hpp"

namespace sqlcritic {

/// Structural form of a query: literals and identifiers become the
/// placeholder `_`; keywords, operators, punctuation and function names are
/// retained. Qualified names (t.col) collapse to a single placeholder.
struct Skeleton {
    std::vector<std::string> tokens;
    std::vector<int> counts;  // one slot per skeleton_vocabulary() entry; sums to tokens.size()

    std::string text() const;
    size_t size() const { return tokens.size(); }
};

/// Fixed vocabulary the count vector is built over: every grammar keyword,
/// the common aggregate names, one slot per operator class, and `_`.
const std::vector<std::string>& skeleton_vocabulary();

Skeleton skeletonize(const ClauseDecomposition& decomp);

/// Euclidean distance between count vectors, divided by (1 + gold token
/// count) so longer queries are not penalized. Asymmetric in the normalizer
/// only; the caller passes the reference skeleton as `gold`.
double skeleton_distance(const Skeleton& pred, const Skeleton& gold);

struct FilterDecision {
    double distance;
    double threshold;
    bool kept;  // distance <= threshold, boundary inclusive
};

inline constexpr double kDefaultSkeletonThreshold = 0.35;

FilterDecision filter_pair(const ClauseDecomposition& pred, const ClauseDecomposition& gold,
                           double threshold = kDefaultSkeletonThreshold);

}  // namespace sqlcritic
