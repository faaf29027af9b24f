#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "sqlcritic/errors.hpp"
#include "sqlcritic/exec.hpp"
#include "support/testdb.hpp"

using namespace sqlcritic;

namespace {

struct DbFixture {
    std::filesystem::path root = testsupport::scratch_dir("exec");
    std::string path = testsupport::make_concert_db(root);
    ~DbFixture() { std::filesystem::remove_all(root); }
};

const ExecOptions kFast{/*timeout_s=*/10.0, /*timed_runs=*/1};

}  // namespace

TEST_CASE("execute returns rows, errors and timeouts") {
    DbFixture fx;

    auto one = execute_sql(fx.path, "SELECT 1", kFast);
    REQUIRE(one.status == ExecStatus::Rows);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0][0] == Value{int64_t{1}});
    CHECK(one.elapsed_s > 0.0);

    auto bad = execute_sql(fx.path, "SELECT * FROM nonexistent", kFast);
    CHECK(bad.status == ExecStatus::ExecError);
    CHECK(!bad.error_text.empty());

    auto runaway = execute_sql(
        fx.path,
        "WITH RECURSIVE cnt(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM cnt) "
        "SELECT count(*) FROM cnt",
        ExecOptions{/*timeout_s=*/0.05, /*timed_runs=*/1});
    CHECK(runaway.status == ExecStatus::Timeout);

    CHECK_THROWS_AS(execute_sql("/no/such/dir/x.sqlite", "SELECT 1", kFast), DbUnavailable);
}

TEST_CASE("results_equal: multiset vs ordered semantics") {
    DbFixture fx;
    auto asc = execute_sql(fx.path, "SELECT name FROM singer ORDER BY age ASC", kFast);
    auto desc = execute_sql(fx.path, "SELECT name FROM singer ORDER BY age DESC", kFast);
    REQUIRE(asc.status == ExecStatus::Rows);

    // Same row multiset in different order: equal without ORDER BY, not with.
    CHECK(results_equal(asc, desc, /*gold_sql_ordered=*/false));
    CHECK_FALSE(results_equal(asc, desc, /*gold_sql_ordered=*/true));
    CHECK(results_equal(asc, asc, /*gold_sql_ordered=*/true));

    auto errored = execute_sql(fx.path, "SELECT * FROM nope", kFast);
    CHECK_FALSE(results_equal(errored, asc, false));
}

TEST_CASE("results_equal: numeric tolerance boundary") {
    ExecutionOutcome a{ExecStatus::Rows, {{Value{1.0000001}}}, 0.001, ""};
    ExecutionOutcome b{ExecStatus::Rows, {{Value{1.0}}}, 0.001, ""};
    CHECK(results_equal(a, b, false));  // |diff| = 1e-7 <= 1e-6

    ExecutionOutcome c{ExecStatus::Rows, {{Value{1.00001}}}, 0.001, ""};
    CHECK_FALSE(results_equal(c, b, false));  // |diff| = 1e-5 > 1e-6

    // Integer 1 and real 1.0 compare numerically.
    ExecutionOutcome i{ExecStatus::Rows, {{Value{int64_t{1}}}}, 0.001, ""};
    CHECK(results_equal(i, b, false));

    // NULL and empty string stay distinct.
    ExecutionOutcome null_row{ExecStatus::Rows, {{Value{std::monostate{}}}}, 0.001, ""};
    ExecutionOutcome empty_str{ExecStatus::Rows, {{Value{std::string()}}}, 0.001, ""};
    CHECK_FALSE(results_equal(null_row, empty_str, false));
    CHECK(results_equal(null_row, null_row, false));
}

TEST_CASE("top-level ORDER BY detection ignores subqueries and strings") {
    CHECK(has_top_level_order_by("SELECT a FROM t ORDER BY a"));
    CHECK(has_top_level_order_by("select a from t order   by a desc"));
    CHECK_FALSE(has_top_level_order_by("SELECT a FROM t"));
    CHECK_FALSE(has_top_level_order_by(
        "SELECT a FROM t WHERE x = (SELECT b FROM u ORDER BY b LIMIT 1)"));
    CHECK_FALSE(has_top_level_order_by("SELECT 'ORDER BY' FROM t"));
}

TEST_CASE("eval_ex_ves: identity pairs give EX 1 and VES 1 under stubbed timing") {
    DbFixture fx;
    std::vector<EvalPair> pairs = {
        {"SELECT name FROM singer WHERE age > 30", "SELECT name FROM singer WHERE age > 30",
         "concert_db"},
        {"SELECT count(*) FROM concert", "SELECT count(*) FROM concert", "concert_db"},
    };
    EvalOptions opt;
    opt.db_root = fx.root.string();
    opt.exec = kFast;
    opt.elapsed_override = [](size_t) { return std::pair<double, double>{1.0, 1.0}; };
    auto summary = eval_ex_ves(pairs, opt);
    CHECK(summary.ex == 1.0);
    CHECK(summary.ves == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(summary.n_correct == 2);
    CHECK(summary.n_exec_error == 0);
}

TEST_CASE("eval_ex_ves: errors score zero; time ratios gate into VES") {
    DbFixture fx;
    std::vector<EvalPair> pairs = {
        {"SELECT * FROM missing_table", "SELECT name FROM singer", "concert_db"},
        {"SELECT name FROM singer", "SELECT name FROM singer", "concert_db"},
    };
    EvalOptions opt;
    opt.db_root = fx.root.string();
    opt.exec = kFast;
    // Correct pair runs 4x faster than gold: contributes sqrt(4) = 2.
    opt.elapsed_override = [](size_t) { return std::pair<double, double>{4.0, 1.0}; };
    auto summary = eval_ex_ves(pairs, opt);
    CHECK(summary.ex == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(summary.ves == doctest::Approx(1.0).epsilon(1e-12));  // (0 + 2) / 2
    CHECK(summary.n_exec_error == 1);

    std::vector<EvalPair> all_bad = {
        {"SELECT * FROM missing_table", "SELECT name FROM singer", "concert_db"},
        {"garbage query", "SELECT name FROM singer", "concert_db"},
    };
    auto zero = eval_ex_ves(all_bad, opt);
    CHECK(zero.ex == 0.0);
    CHECK(zero.ves == 0.0);
    CHECK(zero.n_exec_error == 2);
}

TEST_CASE("db_path applies the layout template") {
    CHECK(db_path("/data/dbs", "concert_db") == "/data/dbs/concert_db/concert_db.sqlite");
    CHECK(db_path("r", "x", "{root}/{db}.db") == "r/x.db");
}

TEST_CASE("schema_text lists CREATE statements") {
    DbFixture fx;
    auto schema = schema_text(fx.path);
    CHECK(schema.find("CREATE TABLE singer") != std::string::npos);
    CHECK(schema.find("CREATE TABLE concert") != std::string::npos);
    CHECK(schema.find("CREATE TABLE stadium") != std::string::npos);
}
