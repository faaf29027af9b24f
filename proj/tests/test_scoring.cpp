#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "sqlcritic/errors.hpp"
#include "sqlcritic/scoring.hpp"

using namespace sqlcritic;

namespace {

const DeterministicJudge kJudge;

Critique two_point_label() {
    return Critique::incorrect({
        {ClauseKind::Select, "The SELECT clause should select count(*) instead of name."},
        {ClauseKind::Where, "The filter should use age > 56 instead of age >= 56."},
    });
}

// Random critique over distinct clause kinds with explanations drawn from a
// small phrase pool, so judged categories vary.
Critique random_critique(std::mt19937_64& rng) {
    static const char* phrases[] = {
        "The filter drops the year condition.",
        "The column list is wrong.",
        "Aggregation should use count(*) not sum(id).",
        "The table reference is missing a join.",
        "Sorting must be descending by capacity.",
    };
    std::uniform_int_distribution<int> verdict(0, 4);
    if (verdict(rng) == 0) return Critique::correct();
    std::vector<CritiquePoint> pts;
    std::uniform_int_distribution<int> npts(1, 4);
    std::uniform_int_distribution<int> pick(0, 4);
    int n = npts(rng);
    std::vector<int> kinds = {0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(kinds.begin(), kinds.end(), rng);
    for (int i = 0; i < n; ++i)
        pts.push_back({static_cast<ClauseKind>(kinds[i]), phrases[pick(rng)]});
    return Critique::incorrect(std::move(pts));
}

}  // namespace

TEST_CASE("deterministic judge: exact, partial, error") {
    CHECK(kJudge.classify("The filter is wrong.", "the  FILTER is wrong.") ==
          MatchCategory::ExactMatch);
    CHECK(kJudge.classify("The filter should use age > 56",
                          "The filter should use age >= 60") == MatchCategory::PartialMatch);
    CHECK(kJudge.classify("Sorting must be descending.",
                          "The join table is missing entirely from the query plan.") ==
          MatchCategory::ErrorMatch);
}

TEST_CASE("match weights are the four fixed constants") {
    CHECK(match_weight(MatchCategory::ExactMatch) == 1.0);
    CHECK(match_weight(MatchCategory::PartialMatch) == 0.5);
    CHECK(match_weight(MatchCategory::ErrorMatch) == 0.0);
    CHECK(match_weight(MatchCategory::Redundant) == -0.3);
}

TEST_CASE("match_critiques: identity gives all ExactMatch") {
    auto label = two_point_label();
    auto report = match_critiques(label, label, kJudge);
    REQUIRE(report.pairs.size() == 2);
    CHECK(report.pairs[0].second == MatchCategory::ExactMatch);
    CHECK(report.pairs[1].second == MatchCategory::ExactMatch);
    CHECK(report.omissions.empty());
    CHECK(report.label_point_count == 2);
}

TEST_CASE("match_critiques: redundant and omitted points") {
    auto pred = Critique::incorrect({{ClauseKind::Where, "Wrong filter."}});
    auto label = Critique::incorrect({{ClauseKind::Select, "Wrong column."}});
    auto report = match_critiques(pred, label, kJudge);
    REQUIRE(report.pairs.size() == 1);
    CHECK(report.pairs[0].first == ClauseKind::Where);
    CHECK(report.pairs[0].second == MatchCategory::Redundant);
    REQUIRE(report.omissions.size() == 1);
    CHECK(report.omissions[0] == ClauseKind::Select);
}

TEST_CASE("match_critiques: JOIN points pair by ordinal") {
    auto pred = Critique::incorrect({
        {ClauseKind::Join, "First join wrong."},
        {ClauseKind::Join, "Second join wrong."},
    });
    auto label = Critique::incorrect({{ClauseKind::Join, "First join wrong."}});
    auto report = match_critiques(pred, label, kJudge);
    REQUIRE(report.pairs.size() == 2);
    CHECK(report.pairs[0].second == MatchCategory::ExactMatch);
    CHECK(report.pairs[1].second == MatchCategory::Redundant);
    CHECK(report.omissions.empty());
}

TEST_CASE("critique_quality fixtures") {
    // 1 Exact + 1 Partial + 1 Redundant over 2 label points -> 0.6.
    MatchReport r;
    r.pairs = {{ClauseKind::Select, MatchCategory::ExactMatch},
               {ClauseKind::Where, MatchCategory::PartialMatch},
               {ClauseKind::Limit, MatchCategory::Redundant}};
    r.label_point_count = 2;
    CHECK(critique_quality(r) == doctest::Approx(0.6).epsilon(1e-12));

    MatchReport all_exact;
    all_exact.pairs = {{ClauseKind::Select, MatchCategory::ExactMatch},
                       {ClauseKind::Where, MatchCategory::ExactMatch}};
    all_exact.label_point_count = 2;
    CHECK(critique_quality(all_exact) == 1.0);

    // Two redundant points over one label point clamps at zero.
    MatchReport clamped;
    clamped.pairs = {{ClauseKind::Limit, MatchCategory::Redundant},
                     {ClauseKind::GroupBy, MatchCategory::Redundant}};
    clamped.label_point_count = 1;
    clamped.omissions = {ClauseKind::Where};
    CHECK(critique_quality(clamped) == 0.0);

    MatchReport both;
    both.both_correct = true;
    both.label_point_count = 1;
    CHECK(critique_quality(both) == 1.0);
}

TEST_CASE("consistency_score boundaries") {
    auto chosen = two_point_label();
    CHECK(consistency_score(chosen, Critique::correct(), kJudge).value == -1.0);
    CHECK(consistency_score(Critique::correct(), chosen, kJudge).value == -1.0);
    CHECK(consistency_score(chosen, chosen, kJudge).value == 1.0);
    CHECK(consistency_score(Critique::correct(), Critique::correct(), kJudge).value == 1.0);

    // 4 chosen points, rejected matches exactly 2 of them.
    auto four = Critique::incorrect({
        {ClauseKind::Select, "The column list is wrong."},
        {ClauseKind::Where, "The filter drops the year condition."},
        {ClauseKind::GroupBy, "Group by country, not name."},
        {ClauseKind::OrderBy, "Sorting must be descending."},
    });
    auto rejected = Critique::incorrect({
        {ClauseKind::Select, "The column list is wrong."},
        {ClauseKind::Where, "The filter drops the year condition."},
        {ClauseKind::GroupBy, "An entirely unrelated remark about join tables here."},
    });
    CHECK(consistency_score(four, rejected, kJudge).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cps fixtures") {
    std::vector<CpsSample> wrong = {{Verdict::Correct, Verdict::Incorrect, 1.0},
                                    {Verdict::Incorrect, Verdict::Correct, 1.0}};
    CHECK(cps(wrong) == 0.0);

    std::vector<CpsSample> perfect = {{Verdict::Correct, Verdict::Correct, 1.0},
                                      {Verdict::Incorrect, Verdict::Incorrect, 1.0}};
    CHECK(cps(perfect) == 1.0);

    std::vector<CpsSample> mixed = {{Verdict::Incorrect, Verdict::Incorrect, 0.6},
                                    {Verdict::Correct, Verdict::Incorrect, 1.0}};
    CHECK(cps(mixed) == doctest::Approx(0.3).epsilon(1e-12));

    CHECK_THROWS_AS(cps(std::span<const CpsSample>{}), EmptyDataset);
}

TEST_CASE("CQ is 1 exactly when every label point is exact-matched with no redundancy") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 300; ++i) {
        Critique pred = random_critique(rng);
        Critique label = random_critique(rng);
        MatchReport r = match_critiques(pred, label, kJudge);
        double cq = critique_quality(r);
        CHECK(cq >= 0.0);
        CHECK(cq <= 1.0);
        bool all_exact_no_redundant =
            r.both_correct ||
            (static_cast<int>(r.pairs.size()) == r.label_point_count && r.omissions.empty() &&
             std::all_of(r.pairs.begin(), r.pairs.end(),
                         [](const auto& p) { return p.second == MatchCategory::ExactMatch; }));
        CHECK((cq == 1.0) == all_exact_no_redundant);
    }
}

TEST_CASE("cps never exceeds verdict accuracy") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> cq(0.0, 1.0);
    std::bernoulli_distribution flip(0.5);
    std::vector<CpsSample> samples;
    for (int i = 0; i < 200; ++i) {
        Verdict p = flip(rng) ? Verdict::Correct : Verdict::Incorrect;
        Verdict l = flip(rng) ? Verdict::Correct : Verdict::Incorrect;
        samples.push_back({p, l, cq(rng)});
    }
    double acc = 0.0;
    for (const auto& s : samples) acc += s.pred_verdict == s.label_verdict ? 1.0 : 0.0;
    acc /= static_cast<double>(samples.size());
    CHECK(cps(samples) <= acc + 1e-12);
}

TEST_CASE("error taxonomy tallies and conservation") {
    CHECK(taxonomy_tsv(error_taxonomy({})).find("SELECT\t0\t0\t0") != std::string::npos);

    MatchReport r;
    r.omissions = {ClauseKind::Where};
    r.label_point_count = 1;
    auto t = error_taxonomy(std::vector<MatchReport>{r});
    CHECK(t[static_cast<int>(ClauseKind::Where)].omission == 1);

    // Randomized reports: per-report category counts account for every
    // predicted point and every omission, and the aggregate equals a
    // brute-force recount.
    std::mt19937_64 rng(23);
    std::vector<MatchReport> reports;
    std::vector<std::pair<Critique, Critique>> inputs;
    for (int i = 0; i < 100; ++i) {
        Critique pred = random_critique(rng);
        Critique label = random_critique(rng);
        inputs.emplace_back(pred, label);
        MatchReport rep = match_critiques(pred, label, kJudge);
        CHECK(rep.pairs.size() + 0 == pred.points.size());
        CHECK(rep.pairs.size() + rep.omissions.size() ==
              pred.points.size() + rep.omissions.size());
        reports.push_back(rep);
    }
    auto table = error_taxonomy(reports);
    TaxonomyTable brute{};
    for (const auto& rep : reports) {
        for (auto k : rep.omissions) brute[static_cast<int>(k)].omission++;
        for (auto& [k, cat] : rep.pairs) {
            if (cat == MatchCategory::ErrorMatch) brute[static_cast<int>(k)].critique_error++;
            if (cat == MatchCategory::Redundant) brute[static_cast<int>(k)].excessive++;
        }
    }
    for (int k = 0; k < kClauseKindCount; ++k) {
        CHECK(table[k].omission == brute[k].omission);
        CHECK(table[k].critique_error == brute[k].critique_error);
        CHECK(table[k].excessive == brute[k].excessive);
    }
}
