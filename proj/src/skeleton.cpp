#include "sqlcritic/skeleton.hpp"

#include <cmath>
#include <unordered_map>

#include "sqlcritic/lexer.hpp"

namespace sqlcritic {

namespace {

constexpr const char* kAggregates[] = {"count", "sum", "avg", "min", "max"};
constexpr const char* kClassSlots[] = {"<cmp>",    "<arith>",  "<concat>", "<comma>", "<lparen>",
                                       "<rparen>", "<dot>",    "<star>",   "<func>",  "_"};

const std::unordered_map<std::string, int>& vocab_index() {
    static const std::unordered_map<std::string, int> index = [] {
        std::unordered_map<std::string, int> m;
        const auto& vocab = skeleton_vocabulary();
        for (size_t i = 0; i < vocab.size(); ++i) m[vocab[i]] = static_cast<int>(i);
        return m;
    }();
    return index;
}

int slot_of(const std::string& name) { return vocab_index().at(name); }

bool is_cmp(const std::string& op) {
    return op == "=" || op == "==" || op == "!=" || op == "<>" || op == "<" || op == ">" ||
           op == "<=" || op == ">=";
}

}  // namespace

const std::vector<std::string>& skeleton_vocabulary() {
    static const std::vector<std::string> vocab = [] {
        std::vector<std::string> v = keywords();
        for (const char* agg : kAggregates) v.push_back(agg);
        for (const char* cls : kClassSlots) v.push_back(cls);
        return v;
    }();
    return vocab;
}

std::string Skeleton::text() const {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

Skeleton skeletonize(const ClauseDecomposition& decomp) {
    Skeleton sk;
    sk.counts.assign(skeleton_vocabulary().size(), 0);

    auto emit = [&](const std::string& text, const std::string& slot) {
        sk.tokens.push_back(text);
        sk.counts[slot_of(slot)]++;
    };

    for (const auto& clause : decomp.clauses) {
        const auto& toks = clause.tokens;
        for (size_t i = 0; i < toks.size(); ++i) {
            const ClauseToken& t = toks[i];
            switch (t.cat) {
                case TokCat::Keyword:
                    emit(t.text, t.text);
                    break;
                case TokCat::Number:
                case TokCat::String:
                    emit("_", "_");
                    break;
                case TokCat::Identifier:
                case TokCat::QuotedIdentifier: {
                    bool call = i + 1 < toks.size() && toks[i + 1].text == "(" &&
                                toks[i + 1].cat == TokCat::Punct;
                    if (call) {
                        std::string name = to_lower(t.text);
                        bool agg = false;
                        for (const char* a : kAggregates) agg = agg || name == a;
                        emit(name, agg ? name : "<func>");
                        break;
                    }
                    // Collapse a qualified name run: a.b -> _, a.* -> *.
                    bool star = false;
                    while (i + 2 < toks.size() && toks[i + 1].cat == TokCat::Punct &&
                           toks[i + 1].text == "." &&
                           (toks[i + 2].cat == TokCat::Identifier ||
                            toks[i + 2].cat == TokCat::QuotedIdentifier ||
                            toks[i + 2].text == "*")) {
                        star = toks[i + 2].text == "*";
                        i += 2;
                    }
                    if (star) {
                        emit("*", "<star>");
                    } else {
                        emit("_", "_");
                    }
                    break;
                }
                case TokCat::Op:
                    if (t.text == "*") {
                        emit("*", "<star>");
                    } else if (t.text == "||") {
                        emit(t.text, "<concat>");
                    } else if (is_cmp(t.text)) {
                        emit(t.text, "<cmp>");
                    } else {
                        emit(t.text, "<arith>");
                    }
                    break;
                case TokCat::Punct:
                    if (t.text == ",") {
                        emit(t.text, "<comma>");
                    } else if (t.text == "(") {
                        emit(t.text, "<lparen>");
                    } else if (t.text == ")") {
                        emit(t.text, "<rparen>");
                    } else if (t.text == ".") {
                        emit(t.text, "<dot>");
                    }
                    break;
            }
        }
    }
    return sk;
}

double skeleton_distance(const Skeleton& pred, const Skeleton& gold) {
    double sum = 0.0;
    for (size_t i = 0; i < pred.counts.size(); ++i) {
        double d = static_cast<double>(pred.counts[i]) - static_cast<double>(gold.counts[i]);
        sum += d * d;
    }
    return std::sqrt(sum) / (1.0 + static_cast<double>(gold.size()));
}

FilterDecision filter_pair(const ClauseDecomposition& pred, const ClauseDecomposition& gold,
                           double threshold) {
    double distance = skeleton_distance(skeletonize(pred), skeletonize(gold));
    return {distance, threshold, distance <= threshold};
}

}  // namespace sqlcritic
