#include "sqlcritic/judge.hpp"

#include <cctype>
#include <set>
#include <string>

#include "sqlcritic/client.hpp"
#include "sqlcritic/errors.hpp"

namespace sqlcritic {

double match_weight(MatchCategory c) {
    switch (c) {
        case MatchCategory::ExactMatch: return 1.0;
        case MatchCategory::PartialMatch: return 0.5;
        case MatchCategory::ErrorMatch: return 0.0;
        case MatchCategory::Redundant: return -0.3;
    }
    return 0.0;
}

std::string_view match_category_name(MatchCategory c) {
    switch (c) {
        case MatchCategory::ExactMatch: return "exact";
        case MatchCategory::PartialMatch: return "partial";
        case MatchCategory::ErrorMatch: return "error";
        case MatchCategory::Redundant: return "redundant";
    }
    return "?";
}

namespace {

// Lower-cased alphanumeric words; everything else is a separator.
std::set<std::string> word_set(std::string_view text) {
    std::set<std::string> words;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            words.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.insert(cur);
    return words;
}

std::string squash(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

}  // namespace

double explanation_jaccard(std::string_view a, std::string_view b) {
    auto wa = word_set(a);
    auto wb = word_set(b);
    if (wa.empty() && wb.empty()) return 1.0;
    size_t inter = 0;
    for (const auto& w : wa) inter += wb.count(w);
    size_t uni = wa.size() + wb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

MatchCategory DeterministicJudge::classify(std::string_view pred_explanation,
                                           std::string_view label_explanation) const {
    if (squash(pred_explanation) == squash(label_explanation)) return MatchCategory::ExactMatch;
    if (explanation_jaccard(pred_explanation, label_explanation) >= 0.5)
        return MatchCategory::PartialMatch;
    return MatchCategory::ErrorMatch;
}

RemoteJudge::RemoteJudge(ChatClient& client, std::string prompt_template)
    : client_(client), prompt_template_(std::move(prompt_template)) {}

MatchCategory RemoteJudge::classify(std::string_view pred_explanation,
                                    std::string_view label_explanation) const {
    std::string prompt = prompt_template_;
    auto fill = [&](const std::string& key, std::string_view value) {
        size_t pos;
        while ((pos = prompt.find(key)) != std::string::npos)
            prompt.replace(pos, key.size(), value);
    };
    fill("{pred_explanation}", pred_explanation);
    fill("{label_explanation}", label_explanation);

    ChatRequest request;
    request.messages = {{"user", prompt}};
    std::vector<std::string> choices;
    try {
        choices = client_.complete(request);
    } catch (const ClientError& e) {
        throw JudgeUnavailable(std::string("remote judge unreachable: ") + e.what());
    }
    std::string reply = choices.empty() ? "" : squash(choices[0]);
    if (reply.find("exact") != std::string::npos) return MatchCategory::ExactMatch;
    if (reply.find("partial") != std::string::npos) return MatchCategory::PartialMatch;
    if (reply.find("error") != std::string::npos) return MatchCategory::ErrorMatch;
    throw JudgeUnavailable("remote judge reply not understood: " + reply);
}

}  // namespace sqlcritic
