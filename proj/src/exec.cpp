#include "sqlcritic/exec.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "sqlcritic/errors.hpp"

namespace sqlcritic {

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
    Clock::time_point at;
    bool expired = false;
};

int progress_callback(void* ctx) {
    auto* deadline = static_cast<Deadline*>(ctx);
    if (Clock::now() >= deadline->at) {
        deadline->expired = true;
        return 1;  // abort the statement
    }
    return 0;
}

struct DbHandle {
    sqlite3* db = nullptr;

    explicit DbHandle(const std::string& path) {
        if (!std::filesystem::exists(path))
            throw DbUnavailable("database file not found: " + path);
        int rc = sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr);
        if (rc != SQLITE_OK) {
            std::string msg = db ? sqlite3_errmsg(db) : "open failed";
            sqlite3_close(db);
            throw DbUnavailable("cannot open database " + path + ": " + msg);
        }
    }
    DbHandle(const DbHandle&) = delete;
    DbHandle& operator=(const DbHandle&) = delete;
    ~DbHandle() { sqlite3_close(db); }
};

Value column_value(sqlite3_stmt* stmt, int col) {
    switch (sqlite3_column_type(stmt, col)) {
        case SQLITE_NULL:
            return std::monostate{};
        case SQLITE_INTEGER:
            return static_cast<int64_t>(sqlite3_column_int64(stmt, col));
        case SQLITE_FLOAT:
            return sqlite3_column_double(stmt, col);
        case SQLITE_TEXT: {
            const unsigned char* p = sqlite3_column_text(stmt, col);
            int n = sqlite3_column_bytes(stmt, col);
            return std::string(reinterpret_cast<const char*>(p), static_cast<size_t>(n));
        }
        default: {
            const auto* p = static_cast<const unsigned char*>(sqlite3_column_blob(stmt, col));
            int n = sqlite3_column_bytes(stmt, col);
            return Blob{std::vector<unsigned char>(p, p + n)};
        }
    }
}

// One full execution. Rows are collected only when `collect` is set; timing
// runs discard them.
ExecutionOutcome run_once(sqlite3* db, const std::string& sql, double timeout_s, bool collect) {
    Deadline deadline{Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double>(timeout_s))};
    sqlite3_progress_handler(db, 500, progress_callback, &deadline);

    ExecutionOutcome out;
    auto start = Clock::now();

    sqlite3_stmt* stmt = nullptr;
    int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt, nullptr);
    if (rc == SQLITE_NOTADB) {
        sqlite3_finalize(stmt);
        throw DbUnavailable("file is not a database");
    }
    if (rc != SQLITE_OK) {
        out.status = deadline.expired ? ExecStatus::Timeout : ExecStatus::ExecError;
        out.error_text = sqlite3_errmsg(db);
        sqlite3_finalize(stmt);
        return out;
    }
    int cols = sqlite3_column_count(stmt);
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
        if (!collect) continue;
        Row row;
        row.reserve(static_cast<size_t>(cols));
        for (int c = 0; c < cols; ++c) row.push_back(column_value(stmt, c));
        out.rows.push_back(std::move(row));
    }
    bool ok = rc == SQLITE_DONE;
    bool interrupted = rc == SQLITE_INTERRUPT || deadline.expired;
    std::string err = ok ? "" : sqlite3_errmsg(db);
    sqlite3_finalize(stmt);
    sqlite3_progress_handler(db, 0, nullptr, nullptr);

    if (!ok) {
        out.rows.clear();
        out.status = interrupted ? ExecStatus::Timeout : ExecStatus::ExecError;
        out.error_text = interrupted ? "query timed out" : err;
        return out;
    }
    out.status = ExecStatus::Rows;
    out.elapsed_s = std::max(std::chrono::duration<double>(Clock::now() - start).count(), 1e-9);
    return out;
}

}  // namespace

ExecutionOutcome execute_sql(const std::string& db_path, const std::string& sql,
                             const ExecOptions& options) {
    DbHandle handle(db_path);
    ExecutionOutcome first = run_once(handle.db, sql, options.timeout_s, /*collect=*/true);
    if (first.status != ExecStatus::Rows) return first;

    std::vector<double> elapsed = {first.elapsed_s};
    for (int run = 1; run < options.timed_runs; ++run) {
        ExecutionOutcome timed = run_once(handle.db, sql, options.timeout_s, /*collect=*/false);
        if (timed.status != ExecStatus::Rows) break;  // flaky timing run; keep what we have
        elapsed.push_back(timed.elapsed_s);
    }
    std::sort(elapsed.begin(), elapsed.end());
    first.elapsed_s = elapsed[elapsed.size() / 2];
    return first;
}

bool has_top_level_order_by(std::string_view sql) {
    int depth = 0;
    size_t i = 0;
    const size_t n = sql.size();
    auto word_at = [&](size_t& pos, std::string& out) {
        out.clear();
        while (pos < n && (std::isalnum(static_cast<unsigned char>(sql[pos])) || sql[pos] == '_')) {
            out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(sql[pos]))));
            ++pos;
        }
    };
    while (i < n) {
        char c = sql[i];
        if (c == '\'' || c == '"' || c == '`') {
            char close = c;
            ++i;
            while (i < n && sql[i] != close) ++i;
            ++i;
            continue;
        }
        if (c == '(') {
            ++depth;
            ++i;
            continue;
        }
        if (c == ')') {
            --depth;
            ++i;
            continue;
        }
        if (depth == 0 && (c == 'o' || c == 'O')) {
            size_t j = i;
            std::string w;
            word_at(j, w);
            if (w == "ORDER") {
                while (j < n && std::isspace(static_cast<unsigned char>(sql[j]))) ++j;
                std::string by;
                word_at(j, by);
                if (by == "BY") return true;
            }
            i = j > i ? j : i + 1;
            continue;
        }
        ++i;
    }
    return false;
}

namespace {

bool both_numeric(const Value& a, const Value& b) {
    auto num = [](const Value& v) {
        return std::holds_alternative<int64_t>(v) || std::holds_alternative<double>(v);
    };
    return num(a) && num(b);
}

double as_double(const Value& v) {
    if (std::holds_alternative<int64_t>(v)) return static_cast<double>(std::get<int64_t>(v));
    return std::get<double>(v);
}

bool value_equal(const Value& a, const Value& b, double tol) {
    if (both_numeric(a, b)) return std::fabs(as_double(a) - as_double(b)) <= tol;
    return a == b;
}

bool row_equal(const Row& a, const Row& b, double tol) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!value_equal(a[i], b[i], tol)) return false;
    }
    return true;
}

// Total order used to canonicalize row multisets before pairwise comparison.
// Numeric values (int and real) interleave by magnitude so near-equal cells
// land adjacent on both sides.
int value_rank(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return 0;
    if (both_numeric(v, v)) return 1;
    if (std::holds_alternative<std::string>(v)) return 2;
    return 3;
}

bool value_less(const Value& a, const Value& b) {
    int ra = value_rank(a);
    int rb = value_rank(b);
    if (ra != rb) return ra < rb;
    switch (ra) {
        case 0:
            return false;
        case 1: {
            double da = as_double(a);
            double db = as_double(b);
            if (da != db) return da < db;
            // ints before reals on exact ties, for determinism
            return std::holds_alternative<int64_t>(a) && std::holds_alternative<double>(b);
        }
        case 2:
            return std::get<std::string>(a) < std::get<std::string>(b);
        default:
            return std::get<Blob>(a) < std::get<Blob>(b);
    }
}

bool row_less(const Row& a, const Row& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), value_less);
}

}  // namespace

bool results_equal(const ExecutionOutcome& pred, const ExecutionOutcome& gold,
                   bool gold_sql_ordered, double tolerance) {
    if (pred.status != ExecStatus::Rows || gold.status != ExecStatus::Rows) return false;
    if (pred.rows.size() != gold.rows.size()) return false;

    auto pairwise = [&](const std::vector<Row>& a, const std::vector<Row>& b) {
        for (size_t i = 0; i < a.size(); ++i) {
            if (!row_equal(a[i], b[i], tolerance)) return false;
        }
        return true;
    };

    if (gold_sql_ordered) return pairwise(pred.rows, gold.rows);

    std::vector<Row> ps = pred.rows;
    std::vector<Row> gs = gold.rows;
    std::sort(ps.begin(), ps.end(), row_less);
    std::sort(gs.begin(), gs.end(), row_less);
    return pairwise(ps, gs);
}

std::string db_path(const std::string& db_root, const std::string& db_id,
                    const std::string& path_template) {
    std::string out = path_template;
    auto replace_all = [&](const std::string& key, const std::string& value) {
        size_t pos = 0;
        while ((pos = out.find(key, pos)) != std::string::npos) {
            out.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{root}", db_root);
    replace_all("{db}", db_id);
    return out;
}

EvalSummary eval_ex_ves(std::span<const EvalPair> pairs, const EvalOptions& options) {
    if (pairs.empty()) throw EmptyDataset("eval_ex_ves over an empty dataset");
    EvalSummary summary;
    summary.n_total = static_cast<int>(pairs.size());
    double ves_sum = 0.0;

    for (size_t i = 0; i < pairs.size(); ++i) {
        const EvalPair& pair = pairs[i];
        std::string path = db_path(options.db_root, pair.db_id, options.path_template);
        ExecutionOutcome gold = execute_sql(path, pair.gold_sql, options.exec);
        ExecutionOutcome pred = execute_sql(path, pair.pred_sql, options.exec);
        if (pred.status != ExecStatus::Rows) summary.n_exec_error++;
        if (gold.status != ExecStatus::Rows) continue;  // unusable reference; counted incorrect

        bool correct = results_equal(pred, gold, has_top_level_order_by(pair.gold_sql));
        if (!correct) continue;
        summary.n_correct++;
        double gold_t = gold.elapsed_s;
        double pred_t = pred.elapsed_s;
        if (options.elapsed_override) {
            auto [g, p] = options.elapsed_override(i);
            gold_t = g;
            pred_t = p;
        }
        ves_sum += std::sqrt(gold_t / pred_t);
    }
    summary.ex = static_cast<double>(summary.n_correct) / static_cast<double>(summary.n_total);
    summary.ves = ves_sum / static_cast<double>(summary.n_total);
    return summary;
}

std::string schema_text(const std::string& db_path) {
    DbHandle handle(db_path);
    ExecutionOutcome out = run_once(
        handle.db,
        "SELECT sql FROM sqlite_master WHERE type = 'table' AND sql IS NOT NULL ORDER BY name",
        /*timeout_s=*/30.0, /*collect=*/true);
    if (out.status != ExecStatus::Rows)
        throw DbUnavailable("cannot read schema from " + db_path + ": " + out.error_text);
    std::string text;
    for (const auto& row : out.rows) {
        if (row.empty() || !std::holds_alternative<std::string>(row[0])) continue;
        if (!text.empty()) text += "\n";
        text += std::get<std::string>(row[0]) + ";";
    }
    return text;
}

}  // namespace sqlcritic
