#include "sqlcritic/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sqlcritic/errors.hpp"
#include "sqlcritic/hash.hpp"
#include "sqlcritic/jsonl.hpp"
#include "sqlcritic/parser.hpp"

namespace sqlcritic {

std::string_view stage_name(PipelineStage stage) {
    switch (stage) {
        case PipelineStage::Generate: return "generate";
        case PipelineStage::Filter: return "filter";
        case PipelineStage::Annotate: return "annotate";
        case PipelineStage::Validate: return "validate";
        case PipelineStage::PairUp: return "pair_up";
    }
    return "?";
}

namespace {

constexpr const char* kGeneratorPrompt =
    "Translate the question into a single SQLite SQL query for the schema below.\n"
    "Reply with the SQL only.\n\nSchema:\n{schema}\n\nQuestion: {question}\nSQL:";

constexpr const char* kAnnotatorPrompt =
    "You review a predicted SQL query clause by clause against a reference query.\n"
    "For every clause that is wrong, output one line `- [<CLAUSE>] <explanation>`.\n"
    "If nothing is wrong, output exactly: This SQL query is correct.\n"
    "{attempt_hint}\n"
    "Question: {question}\nPredicted SQL: {pred_sql}\nReference SQL: {gold_sql}\n\n"
    "Clause comparison:\n{clause_pairs}\n\nCritique:";

constexpr const char* kCorrectorPrompt =
    "Revise the SQL query so the critique no longer applies. Reply with the revised SQL only.\n\n"
    "Question: {question}\nSQL: {pred_sql}\nCritique:\n{critique}\n\nRevised SQL:";

constexpr const char* kJudgePrompt =
    "Two explanations criticize the same SQL clause. Answer with one word:\n"
    "exact    - they say the same thing\n"
    "partial  - they overlap but differ in detail\n"
    "error    - they disagree\n\n"
    "Explanation A: {pred_explanation}\nExplanation B: {label_explanation}\nAnswer:";

std::string slurp_or(const std::filesystem::path& path, const char* fallback) {
    std::ifstream in(path);
    if (!in.good()) return fallback;
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text.empty() ? std::string(fallback) : text;
}

// Resume key: one record per (question, normalized prediction).
uint64_t record_key(const std::string& question, const std::string& pred_sql) {
    return fnv1a64(question + '\x1f' + pred_sql);
}

// Model replies often wrap SQL in markdown fences or prefix text; keep the
// first statement-looking payload.
std::string extract_sql(const std::string& reply) {
    std::string text = reply;
    size_t fence = text.find("```");
    if (fence != std::string::npos) {
        size_t start = text.find('\n', fence);
        size_t end = text.find("```", fence + 3);
        if (start != std::string::npos && end != std::string::npos && start < end)
            text = text.substr(start + 1, end - start - 1);
    }
    size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    size_t finish = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, finish - begin + 1);
}

std::string clause_pairs_text(const ClauseDecomposition& pred, const ClauseDecomposition& gold) {
    std::vector<ClauseKind> order;
    auto add = [&](ClauseKind k) {
        if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
    };
    for (const auto& c : pred.clauses) add(c.kind);
    for (const auto& c : gold.clauses) add(c.kind);

    std::string out;
    for (ClauseKind kind : order) {
        auto ps = clauses_of(pred, kind);
        auto gs = clauses_of(gold, kind);
        size_t n = std::max(ps.size(), gs.size());
        for (size_t i = 0; i < n; ++i) {
            out += "- ";
            out += clause_display(kind);
            out += ": predicted ";
            out += i < ps.size() ? "`" + ps[i]->body() + "`" : "(absent)";
            out += " | reference ";
            out += i < gs.size() ? "`" + gs[i]->body() + "`" : "(absent)";
            out += '\n';
        }
    }
    return out;
}

std::map<std::string, std::string> base_metadata(const Candidate& c) {
    return {{"question", c.question},
            {"db_id", c.db_id},
            {"gold_sql", c.gold_sql_raw},
            {"pred_sql", c.pred_sql_raw}};
}

std::string generic_flip_explanation(ClauseKind kind) {
    std::string name(clause_display(kind));
    switch (kind) {
        case ClauseKind::Select:
            return "The SELECT clause does not return the columns the question asks for.";
        case ClauseKind::From:
            return "The FROM clause references the wrong table for this question.";
        case ClauseKind::Join:
            return "The JOIN clause links the tables on the wrong condition.";
        case ClauseKind::Where:
            return "The WHERE clause filters on the wrong condition.";
        default:
            return "The " + name + " clause does not match what the question requires.";
    }
}

int clamp_workers(int workers) { return std::max(1, workers); }

}  // namespace

// ---------------------------------------------------------------------------
// prompts & config
// ---------------------------------------------------------------------------

PromptSet PromptSet::builtin() {
    return {kGeneratorPrompt, kAnnotatorPrompt, kCorrectorPrompt, kJudgePrompt};
}

PromptSet PromptSet::load(const std::string& dir) {
    std::filesystem::path base(dir);
    return {slurp_or(base / "generator.txt", kGeneratorPrompt),
            slurp_or(base / "annotator.txt", kAnnotatorPrompt),
            slurp_or(base / "corrector.txt", kCorrectorPrompt),
            slurp_or(base / "judge.txt", kJudgePrompt)};
}

std::string render_prompt(std::string text, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        std::string token = "{" + key + "}";
        size_t pos = 0;
        while ((pos = text.find(token, pos)) != std::string::npos) {
            text.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return text;
}

namespace {

ClientConfig parse_client(const Json& j, ClientRole role, const std::string& where) {
    if (!j.is_object() || !j.contains("endpoint"))
        throw ConfigError(where + ": client needs an \"endpoint\"");
    ClientConfig c;
    c.role = role;
    c.endpoint = j["endpoint"].get<std::string>();
    c.model_name = j.value("model", std::string("default"));
    c.api_key_env = j.value("api_key_env", std::string());
    c.temperature = j.value("temperature", 0.0);
    c.n_samples = j.value("n_samples", 1);
    c.timeout_s = j.value("timeout_s", 60.0);
    if (c.n_samples < 1) throw ConfigError(where + ": n_samples must be >= 1");
    if (c.temperature < 0.0) throw ConfigError(where + ": temperature must be >= 0");
    return c;
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw ConfigError("cannot open config " + path);
    Json j = Json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path);

    PipelineConfig cfg;
    std::string mode = j.value("mode", std::string("curate"));
    if (mode == "curate") {
        cfg.mode = PipelineMode::Curate;
    } else if (mode == "benchmark") {
        cfg.mode = PipelineMode::Benchmark;
    } else {
        throw ConfigError("mode must be \"curate\" or \"benchmark\", got \"" + mode + "\"");
    }
    if (!j.contains("db_root")) throw ConfigError("config needs db_root");
    cfg.db_root = j["db_root"].get<std::string>();
    cfg.db_path_template = j.value("db_path_template", cfg.db_path_template);
    cfg.skeleton_threshold = j.value("skeleton_threshold", kDefaultSkeletonThreshold);
    cfg.seed = j.value("seed", uint64_t{0});
    cfg.workers = j.value("workers", 4);
    cfg.include_correct_pairs = j.value("include_correct_pairs", true);
    cfg.annotate_attempts = j.value("annotate_attempts", 2);
    cfg.prompts_dir = j.value("prompts_dir", std::string());
    if (!j.contains("input")) throw ConfigError("config needs input (source JSONL path)");
    cfg.input_path = j["input"].get<std::string>();

    if (j.contains("retry")) {
        const auto& r = j["retry"];
        cfg.retry.budget = r.value("budget", 3);
        cfg.retry.backoff_initial_ms = r.value("backoff_initial_ms", 250.0);
        cfg.retry.backoff_multiplier = r.value("backoff_multiplier", 2.0);
        if (cfg.retry.budget < 1) throw ConfigError("retry.budget must be >= 1");
    }
    if (j.contains("exec")) {
        cfg.exec.timeout_s = j["exec"].value("timeout_s", 30.0);
        cfg.exec.timed_runs = j["exec"].value("timed_runs", 1);
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        cfg.outputs.records_path = o.value("records", cfg.outputs.records_path);
        cfg.outputs.stage_log_path = o.value("stage_log", cfg.outputs.stage_log_path);
        cfg.outputs.summary_path = o.value("summary", cfg.outputs.summary_path);
    }
    if (!j.contains("clients")) throw ConfigError("config needs a clients section");
    const auto& clients = j["clients"];
    if (!clients.contains("generator") || !clients.contains("annotator") ||
        !clients.contains("corrector"))
        throw ConfigError("clients must define generator, annotator and corrector");
    cfg.generator = parse_client(clients["generator"], ClientRole::Generator, "clients.generator");
    cfg.annotator = parse_client(clients["annotator"], ClientRole::Annotator, "clients.annotator");
    cfg.corrector = parse_client(clients["corrector"], ClientRole::Corrector, "clients.corrector");
    if (clients.contains("judge") && clients["judge"].value("endpoint", std::string()) != "deterministic")
        cfg.judge = parse_client(clients["judge"], ClientRole::Judge, "clients.judge");
    return cfg;
}

// ---------------------------------------------------------------------------
// stages
// ---------------------------------------------------------------------------

GenerateResult generate_candidates(std::span<const SourceItem> source, ChatClient& generator,
                                   const PipelineConfig& config, const PromptSet& prompts) {
    GenerateResult result;
    result.log.stage = PipelineStage::Generate;
    result.log.in_count = static_cast<int>(source.size());

    struct ItemOutcome {
        std::vector<Candidate> candidates;
        std::string drop_reason;  // empty: survived
    };
    std::vector<ItemOutcome> outcomes(source.size());

#pragma omp parallel for num_threads(clamp_workers(config.workers)) schedule(dynamic)
    for (size_t i = 0; i < source.size(); ++i) {
        const SourceItem& item = source[i];
        ItemOutcome& out = outcomes[i];
        try {
            std::string schema =
                schema_text(db_path(config.db_root, item.db_id, config.db_path_template));
            ChatRequest req;
            req.temperature = config.generator.temperature;
            req.n = config.generator.n_samples;
            req.messages = {{"user", render_prompt(prompts.generator,
                                                   {{"schema", schema}, {"question", item.question}})}};
            req.metadata = {{"question", item.question},
                            {"db_id", item.db_id},
                            {"gold_sql", item.gold_sql}};
            std::vector<std::string> replies = generator.complete(req);

            // Dedup after normalization; unparseable texts dedup verbatim.
            std::set<std::string> seen;
            for (const std::string& reply : replies) {
                std::string sql = extract_sql(reply);
                if (sql.empty()) continue;
                std::string key;
                try {
                    key = normalize(sql);
                } catch (const ParseError&) {
                    key = sql;
                }
                if (!seen.insert(key).second) continue;
                Candidate cand;
                cand.source_index = i;
                cand.variant_index = out.candidates.size();
                cand.question = item.question;
                cand.db_id = item.db_id;
                cand.gold_sql_raw = item.gold_sql;
                cand.pred_sql_raw = sql;
                out.candidates.push_back(std::move(cand));
            }
            if (out.candidates.empty()) out.drop_reason = "no_candidates";
        } catch (const DbUnavailable&) {
            out.drop_reason = "db_unavailable";
        } catch (const ClientError&) {
            out.drop_reason = "client_error";
        }
    }

    for (auto& out : outcomes) {
        if (!out.drop_reason.empty()) {
            result.log.dropped++;
            result.log.reasons[out.drop_reason]++;
            continue;
        }
        result.log.out_count++;
        for (auto& cand : out.candidates) result.candidates.push_back(std::move(cand));
    }
    return result;
}

FilterResult filter_candidates(std::vector<Candidate> candidates, double threshold, int workers) {
    FilterResult result;
    result.log.stage = PipelineStage::Filter;
    result.log.in_count = static_cast<int>(candidates.size());

    std::vector<std::string> drop(candidates.size());

#pragma omp parallel for num_threads(clamp_workers(workers)) schedule(dynamic)
    for (size_t i = 0; i < candidates.size(); ++i) {
        Candidate& cand = candidates[i];
        try {
            cand.gold_decomp = decompose(cand.gold_sql_raw);
            cand.gold_sql = cand.gold_decomp.normalized;
        } catch (const ParseError&) {
            drop[i] = "gold_parse_error";
            continue;
        }
        try {
            cand.pred_decomp = decompose(cand.pred_sql_raw);
            cand.pred_sql = cand.pred_decomp.normalized;
        } catch (const ParseError&) {
            drop[i] = "parse_error";
            continue;
        }
        FilterDecision decision = filter_pair(cand.pred_decomp, cand.gold_decomp, threshold);
        if (!decision.kept) drop[i] = "skeleton_mismatch";
    }

    for (size_t i = 0; i < candidates.size(); ++i) {
        if (drop[i].empty()) {
            result.log.out_count++;
            result.kept.push_back(std::move(candidates[i]));
        } else {
            result.log.dropped++;
            result.log.reasons[drop[i]]++;
        }
    }
    return result;
}

Critique annotate_candidate(const Candidate& candidate, ChatClient& annotator,
                            const PromptSet& prompts, int attempt) {
    if (candidate.exec_correct) return Critique::correct();

    std::string hint =
        attempt > 1 ? "A previous critique failed correction-validation; reconsider which "
                      "clauses are actually wrong."
                    : "";
    ChatRequest req;
    req.temperature = 0.0;
    req.n = 1;
    req.messages = {
        {"user",
         render_prompt(prompts.annotator,
                       {{"question", candidate.question},
                        {"pred_sql", candidate.pred_sql},
                        {"gold_sql", candidate.gold_sql},
                        {"clause_pairs",
                         clause_pairs_text(candidate.pred_decomp, candidate.gold_decomp)},
                        {"attempt_hint", hint}})}};
    req.metadata = base_metadata(candidate);
    req.metadata["attempt"] = std::to_string(attempt);

    std::vector<std::string> replies = annotator.complete(req);
    return parse_critique(replies.empty() ? "" : replies[0]);
}

bool validate_by_correction(const Candidate& candidate, const Critique& critique,
                            ChatClient& corrector, const PromptSet& prompts,
                            const PipelineConfig& config) {
    // The reference query is deliberately absent from the messages; the
    // corrector must succeed from the critique alone.
    ChatRequest req;
    req.temperature = 0.0;
    req.n = 1;
    req.messages = {{"user", render_prompt(prompts.corrector,
                                           {{"question", candidate.question},
                                            {"pred_sql", candidate.pred_sql},
                                            {"critique", serialize_critique(critique)}})}};
    req.metadata = base_metadata(candidate);

    std::vector<std::string> replies = corrector.complete(req);
    std::string revised = extract_sql(replies.empty() ? "" : replies[0]);
    if (revised.empty()) return false;

    std::string path = db_path(config.db_root, candidate.db_id, config.db_path_template);
    ExecutionOutcome gold = execute_sql(path, candidate.gold_sql_raw, config.exec);
    if (gold.status != ExecStatus::Rows) return false;
    ExecutionOutcome rev = execute_sql(path, revised, config.exec);
    return results_equal(rev, gold, has_top_level_order_by(candidate.gold_sql_raw));
}

Critique sample_dispreferred(const Candidate& candidate, const Critique& chosen,
                             std::span<const Critique> failed_pool, uint64_t seed) {
    std::vector<const Critique*> usable;
    for (const Critique& c : failed_pool) {
        if (!(c == chosen)) usable.push_back(&c);
    }
    if (!usable.empty()) return *usable[seed % usable.size()];

    if (chosen.verdict == Verdict::Incorrect) return Critique::correct();
    ClauseKind kind = candidate.pred_decomp.clauses.empty()
                          ? ClauseKind::Select
                          : candidate.pred_decomp.clauses.front().kind;
    return Critique::incorrect({{kind, generic_flip_explanation(kind)}});
}

// ---------------------------------------------------------------------------
// end-to-end run
// ---------------------------------------------------------------------------

namespace {

std::vector<SourceItem> load_source(const std::string& path) {
    std::vector<SourceItem> items;
    for (const Json& row : read_jsonl(path)) {
        if (!row.contains("question") || !row.contains("gold_sql") || !row.contains("db_id"))
            throw ConfigError(path + ": source rows need question, gold_sql and db_id");
        items.push_back({row["question"].get<std::string>(), row["gold_sql"].get<std::string>(),
                         row["db_id"].get<std::string>()});
    }
    if (items.empty()) throw ConfigError(path + ": source file is empty");
    return items;
}

Json record_json(const Candidate& cand, PipelineMode mode) {
    Json j;
    j["question"] = cand.question;
    j["db_id"] = cand.db_id;
    j["gold_sql"] = cand.gold_sql;
    j["pred_sql"] = cand.pred_sql;
    j["chosen"] = serialize_critique(cand.chosen);
    j["validated"] = cand.validated;
    if (mode == PipelineMode::Curate) j["rejected"] = serialize_critique(cand.rejected);
    return j;
}

Json stage_log_json(const PipelineResult& result) {
    Json stages = Json::array();
    for (const StageLog& log : result.logs) {
        Json reasons = Json::object();
        for (const auto& [reason, count] : log.reasons) reasons[reason] = count;
        stages.push_back({{"stage", std::string(stage_name(log.stage))},
                          {"in", log.in_count},
                          {"out", log.out_count},
                          {"dropped", log.dropped},
                          {"reasons", reasons}});
    }
    return Json{{"stages", stages},
                {"emitted", result.emitted},
                {"skipped_existing", result.skipped_existing}};
}

std::string summary_tsv(const PipelineResult& result) {
    std::string out = "stage\tin\tout\tdropped\treasons\n";
    for (const StageLog& log : result.logs) {
        std::string reasons;
        for (const auto& [reason, count] : log.reasons) {
            if (!reasons.empty()) reasons += ';';
            reasons += reason + "=" + std::to_string(count);
        }
        out += std::string(stage_name(log.stage)) + '\t' + std::to_string(log.in_count) + '\t' +
               std::to_string(log.out_count) + '\t' + std::to_string(log.dropped) + '\t' +
               reasons + '\n';
    }
    return out;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    std::vector<SourceItem> source = load_source(config.input_path);
    PromptSet prompts =
        config.prompts_dir.empty() ? PromptSet::builtin() : PromptSet::load(config.prompts_dir);

    auto generator = make_client(config.generator, config.retry);
    auto annotator = make_client(config.annotator, config.retry);
    auto corrector = make_client(config.corrector, config.retry);

    // Resume: keys already present in the output file are skipped.
    std::set<uint64_t> existing;
    if (std::filesystem::exists(config.outputs.records_path)) {
        for (const Json& row : read_jsonl(config.outputs.records_path)) {
            if (row.contains("question") && row.contains("pred_sql"))
                existing.insert(record_key(row["question"].get<std::string>(),
                                           row["pred_sql"].get<std::string>()));
        }
    }

    PipelineResult result;

    GenerateResult gen = generate_candidates(source, *generator, config, prompts);
    result.logs.push_back(gen.log);

    FilterResult filt =
        filter_candidates(std::move(gen.candidates), config.skeleton_threshold, config.workers);
    result.logs.push_back(filt.log);

    std::vector<Candidate> work;
    for (Candidate& cand : filt.kept) {
        if (existing.count(record_key(cand.question, cand.pred_sql))) {
            result.skipped_existing++;
        } else {
            work.push_back(std::move(cand));
        }
    }

    // Annotate + validate. One worker owns one candidate end to end; the two
    // stages keep separate conservation accounting.
    struct Processed {
        std::string drop_annotate;  // non-empty: dropped in the annotate stage
        std::string drop_validate;  // non-empty: dropped in the validate stage
    };
    std::vector<Processed> processed(work.size());

#pragma omp parallel for num_threads(clamp_workers(config.workers)) schedule(dynamic)
    for (size_t i = 0; i < work.size(); ++i) {
        Candidate& cand = work[i];
        Processed& p = processed[i];
        try {
            std::string path = db_path(config.db_root, cand.db_id, config.db_path_template);
            ExecutionOutcome gold = execute_sql(path, cand.gold_sql_raw, config.exec);
            ExecutionOutcome pred = execute_sql(path, cand.pred_sql_raw, config.exec);
            cand.exec_correct = gold.status == ExecStatus::Rows &&
                                results_equal(pred, gold, has_top_level_order_by(cand.gold_sql_raw));

            if (cand.exec_correct) {
                cand.chosen = Critique::correct();
                cand.validated = true;
                continue;
            }
            bool any_parsed = false;
            bool any_conflict = false;
            for (int attempt = 1; attempt <= config.annotate_attempts; ++attempt) {
                Critique critique;
                try {
                    critique = annotate_candidate(cand, *annotator, prompts, attempt);
                } catch (const MalformedCritique&) {
                    continue;  // next annotation attempt
                }
                if (critique.verdict == Verdict::Correct) {
                    any_conflict = true;  // contradicts the execution outcome
                    continue;
                }
                any_parsed = true;
                bool ok;
                try {
                    ok = validate_by_correction(cand, critique, *corrector, prompts, config);
                } catch (const ClientError&) {
                    p.drop_validate = "client_error";
                    break;
                }
                if (ok) {
                    cand.chosen = critique;
                    cand.validated = true;
                    break;
                }
                cand.failed_critiques.push_back(std::move(critique));
            }
            if (!cand.validated && p.drop_validate.empty()) {
                if (any_parsed) {
                    p.drop_validate = "validation_failed";
                } else {
                    p.drop_annotate = any_conflict ? "verdict_conflict" : "malformed_critique";
                }
            }
        } catch (const DbUnavailable&) {
            p.drop_annotate = "db_unavailable";
        } catch (const ClientError&) {
            p.drop_annotate = "client_error";
        }
    }

    StageLog annotate_log;
    annotate_log.stage = PipelineStage::Annotate;
    annotate_log.in_count = static_cast<int>(work.size());
    StageLog validate_log;
    validate_log.stage = PipelineStage::Validate;

    std::vector<Candidate> labeled;
    for (size_t i = 0; i < work.size(); ++i) {
        if (!processed[i].drop_annotate.empty()) {
            annotate_log.dropped++;
            annotate_log.reasons[processed[i].drop_annotate]++;
            continue;
        }
        annotate_log.out_count++;
        if (!processed[i].drop_validate.empty()) {
            validate_log.dropped++;
            validate_log.reasons[processed[i].drop_validate]++;
            continue;
        }
        labeled.push_back(std::move(work[i]));
    }
    validate_log.in_count = annotate_log.out_count;
    validate_log.out_count = static_cast<int>(labeled.size());
    result.logs.push_back(annotate_log);
    result.logs.push_back(validate_log);

    // Pair up (curate mode): attach a dispreferred critique to every record.
    std::vector<Candidate> final_records;
    if (config.mode == PipelineMode::Curate) {
        StageLog pair_log;
        pair_log.stage = PipelineStage::PairUp;
        pair_log.in_count = static_cast<int>(labeled.size());
        for (Candidate& cand : labeled) {
            if (!config.include_correct_pairs && cand.chosen.verdict == Verdict::Correct) {
                pair_log.dropped++;
                pair_log.reasons["correct_excluded"]++;
                continue;
            }
            uint64_t seed = config.seed ^ record_key(cand.question, cand.pred_sql);
            cand.rejected =
                sample_dispreferred(cand, cand.chosen, cand.failed_critiques, seed);
            pair_log.out_count++;
            final_records.push_back(std::move(cand));
        }
        result.logs.push_back(pair_log);
    } else {
        final_records = std::move(labeled);
    }

    std::sort(final_records.begin(), final_records.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.source_index, a.variant_index) < std::tie(b.source_index, b.variant_index);
    });

    // Append-only emission: the record file is valid JSONL after every line.
    {
        std::ofstream out(config.outputs.records_path, std::ios::app);
        if (!out.good())
            throw ConfigError("cannot write records to " + config.outputs.records_path);
        for (const Candidate& cand : final_records) {
            out << jsonl_line(record_json(cand, config.mode)) << '\n';
            out.flush();
        }
    }
    result.emitted = final_records.size();

    {
        std::ofstream out(config.outputs.stage_log_path, std::ios::trunc);
        out << stage_log_json(result).dump(2) << '\n';
    }
    {
        std::ofstream out(config.outputs.summary_path, std::ios::trunc);
        out << summary_tsv(result);
    }
    return result;
}

}  // namespace sqlcritic
