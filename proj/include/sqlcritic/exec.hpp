#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sqlcritic {

struct Blob {
    std::vector<unsigned char> bytes;
    bool operator==(const Blob&) const = default;
    auto operator<=>(const Blob&) const = default;
};

/// One cell: NULL, integer, real, text or blob.
using Value = std::variant<std::monostate, int64_t, double, std::string, Blob>;
using Row = std::vector<Value>;

enum class ExecStatus { Rows, ExecError, Timeout };

struct ExecutionOutcome {
    ExecStatus status = ExecStatus::ExecError;
    std::vector<Row> rows;     // present iff status == Rows
    double elapsed_s = 0.0;    // median over the timed runs; > 0 when status == Rows
    std::string error_text;    // engine message when status == ExecError
};

struct ExecOptions {
    double timeout_s = 30.0;
    int timed_runs = 5;  // median of this many timed executions
};

/// Run one query read-only against a database file. A missing or corrupt
/// file throws DbUnavailable; a bad query is an ExecError outcome.
ExecutionOutcome execute_sql(const std::string& db_path, const std::string& sql,
                             const ExecOptions& options = {});

/// True when the statement has ORDER BY at paren depth zero. Raw token scan,
/// independent of the clause parser, so it works on any SQL the engine takes.
bool has_top_level_order_by(std::string_view sql);

/// Result equivalence: multiset equality of rows (column order sensitive),
/// or sequence equality when the gold query is ordered. Numeric cells
/// compare with absolute tolerance. False unless pred produced rows.
bool results_equal(const ExecutionOutcome& pred, const ExecutionOutcome& gold,
                   bool gold_sql_ordered, double tolerance = 1e-6);

struct EvalPair {
    std::string pred_sql;
    std::string gold_sql;
    std::string db_id;
};

struct EvalSummary {
    double ex = 0.0;   // fraction of pairs whose results match
    double ves = 0.0;  // correctness-gated mean of sqrt(gold_time / pred_time)
    int n_correct = 0;
    int n_exec_error = 0;  // pred executions that errored or timed out
    int n_total = 0;
};

struct EvalOptions {
    std::string db_root;
    std::string path_template = "{root}/{db}/{db}.sqlite";
    ExecOptions exec;
    // Test seam: when set, returns (gold_elapsed, pred_elapsed) per pair
    // index instead of measured timings.
    std::function<std::pair<double, double>(size_t)> elapsed_override;
};

/// Resolve a database id to its file path under the benchmark layout.
std::string db_path(const std::string& db_root, const std::string& db_id,
                    const std::string& path_template = "{root}/{db}/{db}.sqlite");

EvalSummary eval_ex_ves(std::span<const EvalPair> pairs, const EvalOptions& options);

/// CREATE statements of all tables in the database, for prompt construction.
std::string schema_text(const std::string& db_path);

}  // namespace sqlcritic
