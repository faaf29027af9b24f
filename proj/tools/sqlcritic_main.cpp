// sqlcritic: clause-wise Text-to-SQL critique toolkit.
//
// Machine-readable output goes to stdout; diagnostics go to stderr.
// Exit codes: 0 ok, 1 validation/parse failure, 2 config error,
// 3 external-service failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sqlcritic/batch.hpp"
#include "sqlcritic/critique.hpp"
#include "sqlcritic/errors.hpp"
#include "sqlcritic/exec.hpp"
#include "sqlcritic/jsonl.hpp"
#include "sqlcritic/loss.hpp"
#include "sqlcritic/parser.hpp"
#include "sqlcritic/pipeline.hpp"
#include "sqlcritic/scoring.hpp"
#include "sqlcritic/skeleton.hpp"

using namespace sqlcritic;

namespace {

// Output sink: stdout or --out file.
struct Sink {
    std::ofstream file;
    bool to_file = false;

    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file.open(path, std::ios::trunc);
            if (!file.good()) throw ConfigError("cannot write " + path);
            to_file = true;
        }
    }
    std::ostream& out() { return to_file ? file : std::cout; }
};

std::string percent1(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
    return buf;
}

Json decomposition_json(const ClauseDecomposition& d) {
    Json clauses = Json::array();
    for (const auto& c : d.clauses) {
        clauses.push_back({{"kind", std::string(clause_name(c.kind))},
                           {"text", c.text},
                           {"body", c.body()},
                           {"span", {c.begin, c.end}}});
    }
    return Json{{"normalized", d.normalized}, {"clauses", clauses}};
}

Json report_json(const MatchReport& r) {
    Json pairs = Json::array();
    for (const auto& [kind, cat] : r.pairs)
        pairs.push_back({{"clause", std::string(clause_name(kind))},
                         {"category", std::string(match_category_name(cat))}});
    Json omissions = Json::array();
    for (ClauseKind k : r.omissions) omissions.push_back(std::string(clause_name(k)));
    return Json{{"pairs", pairs},
                {"omissions", omissions},
                {"label_point_count", r.label_point_count},
                {"both_correct", r.both_correct}};
}

MatchReport report_from_json(const Json& j) {
    MatchReport r;
    for (const auto& p : j.at("pairs")) {
        auto kind = clause_from_name(p.at("clause").get<std::string>());
        if (!kind) throw ConfigError("unknown clause name in report");
        std::string cat = p.at("category").get<std::string>();
        MatchCategory category;
        if (cat == "exact") {
            category = MatchCategory::ExactMatch;
        } else if (cat == "partial") {
            category = MatchCategory::PartialMatch;
        } else if (cat == "error") {
            category = MatchCategory::ErrorMatch;
        } else if (cat == "redundant") {
            category = MatchCategory::Redundant;
        } else {
            throw ConfigError("unknown match category: " + cat);
        }
        r.pairs.emplace_back(*kind, category);
    }
    for (const auto& o : j.at("omissions")) {
        auto kind = clause_from_name(o.get<std::string>());
        if (!kind) throw ConfigError("unknown clause name in report omissions");
        r.omissions.push_back(*kind);
    }
    r.label_point_count = j.value("label_point_count", 1);
    r.both_correct = j.value("both_correct", false);
    return r;
}

// Judge selection for the scoring commands. Deterministic by default; a URL
// selects the remote judge.
struct JudgePick {
    std::unique_ptr<ChatClient> client;  // keeps the remote judge's client alive
    std::unique_ptr<ExplanationJudge> judge;
};

JudgePick pick_judge(const std::string& spec) {
    JudgePick pick;
    if (spec.empty() || spec == "deterministic") {
        pick.judge = std::make_unique<DeterministicJudge>();
        return pick;
    }
    ClientConfig cfg;
    cfg.role = ClientRole::Judge;
    cfg.endpoint = spec;
    pick.client = make_client(cfg, RetryPolicy{});
    pick.judge = std::make_unique<RemoteJudge>(*pick.client, PromptSet::builtin().judge);
    return pick;
}


// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_normalize(const std::string& sql, const std::string& in_path, Sink& sink) {
    if (!in_path.empty()) {
        for (const Json& row : read_jsonl(in_path)) {
            std::string text = row.at("sql").get<std::string>();
            Json out = {{"sql", text}};
            try {
                out["normalized"] = normalize(text);
            } catch (const ParseError& e) {
                out["error"] = e.what();
                out["offset"] = e.offset();
            }
            sink.out() << jsonl_line(out) << '\n';
        }
        return 0;
    }
    sink.out() << normalize(sql) << '\n';
    return 0;
}

int cmd_decompose(const std::string& sql, const std::string& in_path, Sink& sink) {
    if (!in_path.empty()) {
        for (const Json& row : read_jsonl(in_path)) {
            std::string text = row.at("sql").get<std::string>();
            Json out;
            try {
                out = decomposition_json(decompose(text));
            } catch (const ParseError& e) {
                out = {{"error", e.what()}, {"offset", e.offset()}};
            }
            out["sql"] = text;
            sink.out() << jsonl_line(out) << '\n';
        }
        return 0;
    }
    sink.out() << decomposition_json(decompose(sql)).dump(2) << '\n';
    return 0;
}

int cmd_skeleton(const std::string& sql, const std::string& in_path, Sink& sink) {
    auto skeleton_json = [](const std::string& text) {
        Skeleton sk = skeletonize(decompose(text));
        return Json{{"sql", text}, {"skeleton", sk.text()}, {"tokens", sk.tokens}};
    };
    if (!in_path.empty()) {
        for (const Json& row : read_jsonl(in_path))
            sink.out() << jsonl_line(skeleton_json(row.at("sql").get<std::string>())) << '\n';
        return 0;
    }
    sink.out() << skeleton_json(sql).dump(2) << '\n';
    return 0;
}

int cmd_filter(const std::string& in_path, double threshold, int threads, Sink& sink) {
    std::vector<batch::SqlPair> pairs;
    for (const Json& row : read_jsonl(in_path))
        pairs.push_back({row.at("pred_sql").get<std::string>(),
                         row.at("gold_sql").get<std::string>()});
    auto outcomes = batch::filter_many(pairs, threshold, threads);
    for (size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        Json out = {{"kept", o.parse_ok && o.decision.kept}, {"threshold", threshold}};
        if (o.parse_ok) {
            out["distance"] = o.decision.distance;
        } else {
            out["error"] = o.error;
        }
        sink.out() << jsonl_line(out) << '\n';
    }
    return 0;
}

int cmd_match(const std::string& pred_text, const std::string& label_text,
              const std::string& in_path, const std::string& judge_spec, Sink& sink) {
    JudgePick judge = pick_judge(judge_spec);
    if (!in_path.empty()) {
        for (const Json& row : read_jsonl(in_path)) {
            Critique pred = parse_critique(row.at("pred").get<std::string>());
            Critique label = parse_critique(row.at("label").get<std::string>());
            sink.out() << jsonl_line(report_json(match_critiques(pred, label, *judge.judge)))
                       << '\n';
        }
        return 0;
    }
    Critique pred = parse_critique(pred_text);
    Critique label = parse_critique(label_text);
    sink.out() << report_json(match_critiques(pred, label, *judge.judge)).dump(2) << '\n';
    return 0;
}

int cmd_score_cps(const std::string& preds_path, const std::string& labels_path,
                  const std::string& judge_spec, const std::string& report_out, Sink& sink) {
    auto preds = read_jsonl(preds_path);
    auto labels = read_jsonl(labels_path);
    if (preds.size() != labels.size())
        throw ConfigError("prediction and label files differ in length (" +
                          std::to_string(preds.size()) + " vs " + std::to_string(labels.size()) +
                          ")");
    JudgePick judge = pick_judge(judge_spec);

    std::vector<CpsSample> samples;
    std::vector<MatchReport> reports;
    for (size_t i = 0; i < preds.size(); ++i) {
        Critique pred = parse_critique(preds[i].at("critique").get<std::string>());
        Critique label = parse_critique(labels[i].at("critique").get<std::string>());
        MatchReport report = match_critiques(pred, label, *judge.judge);
        samples.push_back({pred.verdict, label.verdict, critique_quality(report)});
        reports.push_back(std::move(report));
    }
    if (!report_out.empty()) {
        std::ofstream out(report_out, std::ios::trunc);
        if (!out.good()) throw ConfigError("cannot write " + report_out);
        for (const auto& r : reports) out << jsonl_line(report_json(r)) << '\n';
    }
    sink.out() << "CPS " << percent1(cps(samples)) << "/100" << '\n';
    return 0;
}

int cmd_error_report(const std::string& in_path, Sink& sink) {
    std::vector<MatchReport> reports;
    for (const Json& row : read_jsonl(in_path)) reports.push_back(report_from_json(row));
    sink.out() << taxonomy_tsv(error_taxonomy(reports));
    return 0;
}

int cmd_eval_ex(const std::string& pairs_path, const std::string& db_root, double timeout_s,
                int timed_runs, bool stub_timings, const std::string& detail_out, Sink& sink) {
    std::vector<EvalPair> pairs;
    for (const Json& row : read_jsonl(pairs_path))
        pairs.push_back({row.at("pred_sql").get<std::string>(),
                         row.at("gold_sql").get<std::string>(),
                         row.at("db_id").get<std::string>()});

    EvalOptions options;
    options.db_root = db_root;
    options.exec = ExecOptions{timeout_s, timed_runs};
    if (stub_timings)
        options.elapsed_override = [](size_t) { return std::pair<double, double>{1.0, 1.0}; };

    if (!detail_out.empty()) {
        std::ofstream detail(detail_out, std::ios::trunc);
        if (!detail.good()) throw ConfigError("cannot write " + detail_out);
        for (const auto& p : pairs) {
            std::string path = db_path(db_root, p.db_id);
            ExecutionOutcome gold = execute_sql(path, p.gold_sql, options.exec);
            ExecutionOutcome pred = execute_sql(path, p.pred_sql, options.exec);
            bool correct = gold.status == ExecStatus::Rows &&
                           results_equal(pred, gold, has_top_level_order_by(p.gold_sql));
            detail << jsonl_line(Json{{"db_id", p.db_id},
                                      {"correct", correct},
                                      {"pred_rows", pred.rows.size()},
                                      {"pred_status", static_cast<int>(pred.status)}})
                   << '\n';
        }
    }

    EvalSummary summary = eval_ex_ves(pairs, options);
    sink.out() << "EX " << percent1(summary.ex) << '\n';
    sink.out() << "VES " << percent1(summary.ves) << '\n';
    std::cerr << "evaluated " << summary.n_total << " pairs: " << summary.n_correct
              << " correct, " << summary.n_exec_error << " execution failures\n";
    return 0;
}

int cmd_loss_check(const std::string& in_path, double beta, Sink& sink) {
    double max_err = 0.0;
    for (const Json& row : read_jsonl(in_path)) {
        ActionScores s{row.at("policy_chosen").get<double>(),
                       row.at("policy_rejected").get<double>(),
                       row.at("ref_chosen").get<double>(), row.at("ref_rejected").get<double>()};
        double cs = row.value("cs", 0.0);
        LossResult r = critic_dpo_loss(s, beta, {cs});
        double err =
            grad_check([&](const ActionScores& a) { return critic_dpo_loss(a, beta, {cs}); }, s);
        max_err = std::max(max_err, err);
        sink.out() << jsonl_line(Json{{"loss", r.loss},
                                      {"margin", r.margin},
                                      {"grad_policy_chosen", r.grad_policy_chosen},
                                      {"grad_policy_rejected", r.grad_policy_rejected},
                                      {"s_avg", beta + 0.1 * cs},
                                      {"grad_check_rel_error", err}})
                   << '\n';
    }
    sink.out() << jsonl_line(Json{{"grad_check_max_rel_error", max_err}}) << '\n';
    return 0;
}

int cmd_curate(const std::string& config_path, std::optional<uint64_t> seed,
               std::optional<double> threshold) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("SQLCRITIC_CONFIG")) path = env;
    }
    if (path.empty())
        throw ConfigError("curate needs --config or the SQLCRITIC_CONFIG environment variable");
    PipelineConfig config = load_pipeline_config(path);
    if (seed) config.seed = *seed;
    if (threshold) config.skeleton_threshold = *threshold;

    PipelineResult result = run_pipeline(config);
    for (const StageLog& log : result.logs) {
        std::cerr << stage_name(log.stage) << ": in=" << log.in_count << " out=" << log.out_count
                  << " dropped=" << log.dropped << '\n';
    }
    std::cout << jsonl_line(Json{{"emitted", result.emitted},
                                 {"skipped_existing", result.skipped_existing},
                                 {"records", config.outputs.records_path}})
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clause-wise Text-to-SQL critique toolkit"};
    app.require_subcommand(1);

    std::string sql, in_path, out_path, judge_spec, config_path, db_root;
    std::string pred_text, label_text, preds_path, labels_path, report_out, detail_out;
    double threshold = kDefaultSkeletonThreshold;
    double beta = 0.2;
    double timeout_s = 30.0;
    int timed_runs = 5;  // median timing for the efficiency score
    int threads = 0;
    bool stub_timings = false;
    std::optional<uint64_t> seed_flag;
    std::optional<double> threshold_flag;

    auto* normalize_cmd = app.add_subcommand("normalize", "Canonicalize one SQL statement");
    normalize_cmd->add_option("sql", sql, "SQL text");
    normalize_cmd->add_option("--in", in_path, "JSONL input with a 'sql' field");
    normalize_cmd->add_option("--out", out_path, "write output here instead of stdout");

    auto* decompose_cmd = app.add_subcommand("decompose", "Split SQL into top-level clauses");
    decompose_cmd->add_option("sql", sql, "SQL text");
    decompose_cmd->add_option("--in", in_path, "JSONL input with a 'sql' field");
    decompose_cmd->add_option("--out", out_path, "write output here instead of stdout");

    auto* skeleton_cmd = app.add_subcommand("skeleton", "Structural skeleton of a query");
    skeleton_cmd->add_option("sql", sql, "SQL text");
    skeleton_cmd->add_option("--in", in_path, "JSONL input with a 'sql' field");
    skeleton_cmd->add_option("--out", out_path, "write output here instead of stdout");

    auto* filter_cmd = app.add_subcommand("filter", "Skeleton-similarity filter over pairs");
    filter_cmd->add_option("--in", in_path, "JSONL with pred_sql and gold_sql")->required();
    filter_cmd->add_option("--skeleton-threshold", threshold, "keep pairs at distance <= t");
    filter_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
    filter_cmd->add_option("--out", out_path, "write output here instead of stdout");

    auto* match_cmd = app.add_subcommand("match", "Clause-level critique match report");
    match_cmd->add_option("pred", pred_text, "predicted critique text");
    match_cmd->add_option("label", label_text, "label critique text");
    match_cmd->add_option("--in", in_path, "JSONL with 'pred' and 'label' critique texts");
    match_cmd->add_option("--judge", judge_spec, "deterministic (default) or a judge endpoint URL");
    match_cmd->add_option("--out", out_path, "write output here instead of stdout");

    auto* cps_cmd = app.add_subcommand("score-cps", "Critique performance score over a dataset");
    cps_cmd->add_option("preds", preds_path, "JSONL with a 'critique' field")->required();
    cps_cmd->add_option("labels", labels_path, "JSONL with a 'critique' field")->required();
    cps_cmd->add_option("--judge", judge_spec, "deterministic (default) or a judge endpoint URL");
    cps_cmd->add_option("--report-out", report_out, "write per-sample match reports (JSONL)");
    cps_cmd->add_option("--out", out_path, "write the summary line here instead of stdout");

    auto* taxonomy_cmd = app.add_subcommand("error-report", "Per-clause error taxonomy TSV");
    taxonomy_cmd->add_option("--in", in_path, "JSONL of match reports")->required();
    taxonomy_cmd->add_option("--out", out_path, "write output here instead of stdout");

    auto* eval_cmd = app.add_subcommand("eval-ex", "Execution accuracy and efficiency score");
    eval_cmd->add_option("pairs", in_path, "JSONL with pred_sql, gold_sql, db_id")->required();
    eval_cmd->add_option("--db-root", db_root, "directory of <db_id>/<db_id>.sqlite files")
        ->required();
    eval_cmd->add_option("--timeout", timeout_s, "per-query timeout in seconds");
    eval_cmd->add_option("--timed-runs", timed_runs, "timing runs per query (median)");
    eval_cmd->add_flag("--stub-timings", stub_timings, "fix all timings to 1s (VES == EX)");
    eval_cmd->add_option("--detail-out", detail_out, "write per-pair outcomes (JSONL)");
    eval_cmd->add_option("--out", out_path, "write the summary here instead of stdout");

    auto* loss_cmd = app.add_subcommand("loss-check", "Preference loss values and gradient check");
    loss_cmd->add_option("scores", in_path, "JSONL with policy/ref log-likelihoods and cs")
        ->required();
    loss_cmd->add_option("--beta", beta, "base preference coefficient (> 0.1)");
    loss_cmd->add_option("--out", out_path, "write output here instead of stdout");

    auto* curate_cmd = app.add_subcommand("curate", "Run the critique-dataset curation pipeline");
    curate_cmd->add_option("--config", config_path, "pipeline config JSON (or SQLCRITIC_CONFIG)");
    curate_cmd->add_option("--seed", seed_flag, "override the config seed");
    curate_cmd->add_option("--skeleton-threshold", threshold_flag, "override the config threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        Sink sink(out_path);
        if (normalize_cmd->parsed()) {
            if (sql.empty() && in_path.empty()) throw ConfigError("normalize needs SQL or --in");
            return cmd_normalize(sql, in_path, sink);
        }
        if (decompose_cmd->parsed()) {
            if (sql.empty() && in_path.empty()) throw ConfigError("decompose needs SQL or --in");
            return cmd_decompose(sql, in_path, sink);
        }
        if (skeleton_cmd->parsed()) {
            if (sql.empty() && in_path.empty()) throw ConfigError("skeleton needs SQL or --in");
            return cmd_skeleton(sql, in_path, sink);
        }
        if (filter_cmd->parsed()) return cmd_filter(in_path, threshold, threads, sink);
        if (match_cmd->parsed()) {
            if (in_path.empty() && (pred_text.empty() || label_text.empty()))
                throw ConfigError("match needs two critique texts or --in");
            return cmd_match(pred_text, label_text, in_path, judge_spec, sink);
        }
        if (cps_cmd->parsed())
            return cmd_score_cps(preds_path, labels_path, judge_spec, report_out, sink);
        if (taxonomy_cmd->parsed()) return cmd_error_report(in_path, sink);
        if (eval_cmd->parsed())
            return cmd_eval_ex(in_path, db_root, timeout_s, timed_runs, stub_timings, detail_out,
                               sink);
        if (loss_cmd->parsed()) return cmd_loss_check(in_path, beta, sink);
        if (curate_cmd->parsed()) return cmd_curate(config_path, seed_flag, threshold_flag);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ClientError& e) {
        std::cerr << "client error: " << e.what() << '\n';
        return 3;
    } catch (const JudgeUnavailable& e) {
        std::cerr << "judge unavailable: " << e.what() << '\n';
        return 3;
    } catch (const DbUnavailable& e) {
        std::cerr << "database unavailable: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
