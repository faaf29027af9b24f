#pragma once

#include <span>
#include <string>
#include <vector>

#include "sqlcritic/critique.hpp"
#include "sqlcritic/loss.hpp"
#include "sqlcritic/parser.hpp"
#include "sqlcritic/scoring.hpp"
#include "sqlcritic/skeleton.hpp"

// Batch kernels over independent items. Each kernel has an OpenMP
// implementation and a `_serial` reference twin; they produce identical
// results (all reductions run serially in index order), the tests assert it,
// and tools/bench compares their throughput.

namespace sqlcritic::batch {

struct ParseOutcome {
    bool ok = false;
    ClauseDecomposition decomp;
    std::string error;
    size_t error_offset = 0;
};

std::vector<ParseOutcome> decompose_many(std::span<const std::string> queries, int threads = 0);
std::vector<ParseOutcome> decompose_many_serial(std::span<const std::string> queries);

struct SqlPair {
    std::string pred_sql;
    std::string gold_sql;
};

struct PairFilterOutcome {
    bool parse_ok = false;
    FilterDecision decision{0.0, 0.0, false};
    std::string error;
};

std::vector<PairFilterOutcome> filter_many(std::span<const SqlPair> pairs, double threshold,
                                           int threads = 0);
std::vector<PairFilterOutcome> filter_many_serial(std::span<const SqlPair> pairs,
                                                  double threshold);

struct CritiquePair {
    Critique pred;
    Critique label;
};

std::vector<MatchReport> match_many(std::span<const CritiquePair> pairs,
                                    const ExplanationJudge& judge, int threads = 0);
std::vector<MatchReport> match_many_serial(std::span<const CritiquePair> pairs,
                                           const ExplanationJudge& judge);

/// CPS over matched pairs: per-item CQ in parallel, the mean accumulated
/// serially in index order so thread count never changes the result.
double cps_many(std::span<const CritiquePair> pairs, const ExplanationJudge& judge,
                int threads = 0);
double cps_many_serial(std::span<const CritiquePair> pairs, const ExplanationJudge& judge);

struct LossSample {
    ActionScores scores;
    double cs = 0.0;
};

std::vector<LossResult> critic_dpo_many(std::span<const LossSample> samples, double beta,
                                        int threads = 0);
std::vector<LossResult> critic_dpo_many_serial(std::span<const LossSample> samples, double beta);

}  // namespace sqlcritic::batch
