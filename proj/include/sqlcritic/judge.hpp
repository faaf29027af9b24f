#pragma once

#include <memory>
#include <string_view>

namespace sqlcritic {

/// How a predicted critique point relates to the label point on the same
/// clause. Redundant marks a predicted point whose clause the label does not
/// flag at all.
enum class MatchCategory { ExactMatch, PartialMatch, ErrorMatch, Redundant };

/// Fixed per-category weights: 1.0, 0.5, 0.0, -0.3.
double match_weight(MatchCategory c);

std::string_view match_category_name(MatchCategory c);

/// Grades a predicted explanation against the label explanation for the same
/// clause; returns ExactMatch, PartialMatch or ErrorMatch. Implementations
/// must be safe to call concurrently.
class ExplanationJudge {
public:
    virtual ~ExplanationJudge() = default;
    virtual MatchCategory classify(std::string_view pred_explanation,
                                   std::string_view label_explanation) const = 0;
};

/// Offline judge: ExactMatch on whitespace/case-normalized equality,
/// PartialMatch when word-set Jaccard >= 0.5, ErrorMatch otherwise.
class DeterministicJudge : public ExplanationJudge {
public:
    MatchCategory classify(std::string_view pred_explanation,
                           std::string_view label_explanation) const override;
};

/// Word-set Jaccard similarity used by the deterministic judge.
double explanation_jaccard(std::string_view a, std::string_view b);

class ChatClient;

/// Judge backed by a model endpoint. The prompt template receives
/// {pred_explanation} and {label_explanation}; the response must contain one
/// of "exact", "partial" or "error". Transport failures surface as
/// JudgeUnavailable so callers may retry or fall back to the deterministic
/// judge.
class RemoteJudge : public ExplanationJudge {
public:
    RemoteJudge(ChatClient& client, std::string prompt_template);

    MatchCategory classify(std::string_view pred_explanation,
                           std::string_view label_explanation) const override;

private:
    ChatClient& client_;
    std::string prompt_template_;
};

}  // namespace sqlcritic
