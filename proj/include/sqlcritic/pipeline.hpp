#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlcritic/client.hpp"
#include "sqlcritic/critique.hpp"
#include "sqlcritic/exec.hpp"
#include "sqlcritic/skeleton.hpp"

namespace sqlcritic {

enum class PipelineStage { Generate, Filter, Annotate, Validate, PairUp };

std::string_view stage_name(PipelineStage stage);

/// Per-stage conservation accounting: out_count + dropped == in_count.
struct StageLog {
    PipelineStage stage;
    int in_count = 0;
    int out_count = 0;
    int dropped = 0;
    std::map<std::string, int> reasons;  // drop-cause histogram
};

struct SourceItem {
    std::string question;
    std::string gold_sql;
    std::string db_id;
};

/// One generated prediction flowing through the stages.
struct Candidate {
    size_t source_index = 0;
    size_t variant_index = 0;
    std::string question;
    std::string db_id;
    std::string gold_sql_raw;
    std::string pred_sql_raw;
    std::string gold_sql;  // normalized
    std::string pred_sql;  // normalized
    ClauseDecomposition gold_decomp;
    ClauseDecomposition pred_decomp;
    bool exec_correct = false;
    Critique chosen;
    Critique rejected;
    bool validated = false;
    std::vector<Critique> failed_critiques;  // annotations that failed correction-validation
};

enum class PipelineMode { Curate, Benchmark };

struct PipelineOutputs {
    std::string records_path = "d_critic.jsonl";
    std::string stage_log_path = "stage_log.json";
    std::string summary_path = "summary.tsv";
};

struct PipelineConfig {
    PipelineMode mode = PipelineMode::Curate;
    std::string db_root;
    std::string db_path_template = "{root}/{db}/{db}.sqlite";
    double skeleton_threshold = kDefaultSkeletonThreshold;
    uint64_t seed = 0;
    int workers = 4;
    bool include_correct_pairs = true;
    int annotate_attempts = 2;  // annotate+validate rounds per incorrect candidate
    std::string prompts_dir;    // empty: use the built-in templates
    RetryPolicy retry;
    ExecOptions exec{30.0, /*timed_runs=*/1};
    std::string input_path;
    PipelineOutputs outputs;
    ClientConfig generator;
    ClientConfig annotator;
    ClientConfig corrector;
    std::optional<ClientConfig> judge;
};

/// Parse and validate the JSON config file. Throws ConfigError.
PipelineConfig load_pipeline_config(const std::string& path);

/// Prompt templates for the three model roles; {placeholders} are filled per
/// call. Missing files fall back to the built-in templates.
struct PromptSet {
    std::string generator;
    std::string annotator;
    std::string corrector;
    std::string judge;

    static PromptSet load(const std::string& dir);
    static PromptSet builtin();
};

std::string render_prompt(std::string text, const std::map<std::string, std::string>& values);

// --- stages, exposed for direct testing -------------------------------------

struct GenerateResult {
    std::vector<Candidate> candidates;
    StageLog log;
};

/// Up to n_samples predictions per item, deduplicated after normalization.
/// Items whose schema cannot be read or whose generator calls exhaust the
/// retry budget are dropped and logged.
GenerateResult generate_candidates(std::span<const SourceItem> source, ChatClient& generator,
                                   const PipelineConfig& config, const PromptSet& prompts);

struct FilterResult {
    std::vector<Candidate> kept;
    StageLog log;
};

/// Drops candidates whose prediction does not parse, then applies the
/// skeleton filter against the gold query. Fills the normalized fields of
/// surviving candidates.
FilterResult filter_candidates(std::vector<Candidate> candidates, double threshold,
                               int workers = 1);

/// Clause-wise critique for one candidate. Execution-correct candidates get
/// the Correct critique without any model call. Throws MalformedCritique when
/// the annotator's reply cannot be parsed, and ClientError past the retry
/// budget.
Critique annotate_candidate(const Candidate& candidate, ChatClient& annotator,
                            const PromptSet& prompts, int attempt = 1);

/// Correction-based validation: the corrector sees question, prediction and
/// critique (gold withheld), and the revision must execute to the gold
/// results. A revision that fails to execute is a false validation, not an
/// error.
bool validate_by_correction(const Candidate& candidate, const Critique& critique,
                            ChatClient& corrector, const PromptSet& prompts,
                            const PipelineConfig& config);

/// Dispreferred critique for a preference pair: (1) a same-candidate critique
/// that failed validation, else (2) a verdict-flipped critique. Never equal
/// to chosen; deterministic in the seed.
Critique sample_dispreferred(const Candidate& candidate, const Critique& chosen,
                             std::span<const Critique> failed_pool, uint64_t seed);

struct PipelineResult {
    std::vector<StageLog> logs;
    size_t emitted = 0;
    size_t skipped_existing = 0;  // resume: records already present in the output
};

/// End-to-end run: generate, filter, annotate, validate, pair up (curate
/// mode), writing the record file, stage log JSON and summary TSV. Reruns
/// skip records already present in the output file.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace sqlcritic
