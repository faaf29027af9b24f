#include "sqlcritic/batch.hpp"

#include <omp.h>

#include "sqlcritic/errors.hpp"

namespace sqlcritic::batch {

namespace {

int resolve_threads(int threads) {
    return threads > 0 ? threads : omp_get_max_threads();
}

ParseOutcome parse_one(const std::string& sql) {
    ParseOutcome out;
    try {
        out.decomp = decompose(sql);
        out.ok = true;
    } catch (const ParseError& e) {
        out.error = e.what();
        out.error_offset = e.offset();
    }
    return out;
}

PairFilterOutcome filter_one(const SqlPair& pair, double threshold) {
    PairFilterOutcome out;
    try {
        ClauseDecomposition pred = decompose(pair.pred_sql);
        ClauseDecomposition gold = decompose(pair.gold_sql);
        out.decision = filter_pair(pred, gold, threshold);
        out.parse_ok = true;
    } catch (const ParseError& e) {
        out.error = e.what();
        out.decision = {0.0, threshold, false};
    }
    return out;
}

}  // namespace

std::vector<ParseOutcome> decompose_many(std::span<const std::string> queries, int threads) {
    std::vector<ParseOutcome> out(queries.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic, 16)
    for (size_t i = 0; i < queries.size(); ++i) out[i] = parse_one(queries[i]);
    return out;
}

std::vector<ParseOutcome> decompose_many_serial(std::span<const std::string> queries) {
    std::vector<ParseOutcome> out(queries.size());
    for (size_t i = 0; i < queries.size(); ++i) out[i] = parse_one(queries[i]);
    return out;
}

std::vector<PairFilterOutcome> filter_many(std::span<const SqlPair> pairs, double threshold,
                                           int threads) {
    std::vector<PairFilterOutcome> out(pairs.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic, 16)
    for (size_t i = 0; i < pairs.size(); ++i) out[i] = filter_one(pairs[i], threshold);
    return out;
}

std::vector<PairFilterOutcome> filter_many_serial(std::span<const SqlPair> pairs,
                                                  double threshold) {
    std::vector<PairFilterOutcome> out(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) out[i] = filter_one(pairs[i], threshold);
    return out;
}

std::vector<MatchReport> match_many(std::span<const CritiquePair> pairs,
                                    const ExplanationJudge& judge, int threads) {
    std::vector<MatchReport> out(pairs.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic, 16)
    for (size_t i = 0; i < pairs.size(); ++i)
        out[i] = match_critiques(pairs[i].pred, pairs[i].label, judge);
    return out;
}

std::vector<MatchReport> match_many_serial(std::span<const CritiquePair> pairs,
                                           const ExplanationJudge& judge) {
    std::vector<MatchReport> out(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i)
        out[i] = match_critiques(pairs[i].pred, pairs[i].label, judge);
    return out;
}

namespace {

double cps_from_reports(std::span<const CritiquePair> pairs,
                        const std::vector<MatchReport>& reports) {
    std::vector<CpsSample> samples;
    samples.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        samples.push_back({pairs[i].pred.verdict, pairs[i].label.verdict,
                           critique_quality(reports[i])});
    }
    return cps(samples);
}

}  // namespace

double cps_many(std::span<const CritiquePair> pairs, const ExplanationJudge& judge, int threads) {
    return cps_from_reports(pairs, match_many(pairs, judge, threads));
}

double cps_many_serial(std::span<const CritiquePair> pairs, const ExplanationJudge& judge) {
    return cps_from_reports(pairs, match_many_serial(pairs, judge));
}

std::vector<LossResult> critic_dpo_many(std::span<const LossSample> samples, double beta,
                                        int threads) {
    std::vector<LossResult> out(samples.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(static)
    for (size_t i = 0; i < samples.size(); ++i)
        out[i] = critic_dpo_loss(samples[i].scores, beta, {samples[i].cs});
    return out;
}

std::vector<LossResult> critic_dpo_many_serial(std::span<const LossSample> samples, double beta) {
    std::vector<LossResult> out(samples.size());
    for (size_t i = 0; i < samples.size(); ++i)
        out[i] = critic_dpo_loss(samples[i].scores, beta, {samples[i].cs});
    return out;
}

}  // namespace sqlcritic::batch
