#include "sqlcritic/loss.hpp"

#include <cmath>

#include "sqlcritic/errors.hpp"

namespace sqlcritic {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

// -log(sigmoid(x)) = log(1 + exp(-x)), computed without overflow.
double neg_log_sigmoid(double x) {
    if (x > 0.0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

LossResult margin_loss(const ActionScores& s, double coeff) {
    double delta = (s.policy_chosen - s.ref_chosen) - (s.policy_rejected - s.ref_rejected);
    double margin = coeff * delta;
    // d(-log sigma(m))/dm = -(1 - sigma(m)) = -sigma(-m)
    double slope = sigmoid(-margin);
    LossResult r;
    r.margin = margin;
    r.loss = neg_log_sigmoid(margin);
    r.grad_policy_chosen = -coeff * slope;
    r.grad_policy_rejected = coeff * slope;
    return r;
}

}  // namespace

double sft_loss(std::span<const std::vector<double>> token_logprobs) {
    if (token_logprobs.empty()) throw EmptyBatch("sft_loss over an empty batch");
    double total = 0.0;
    for (const auto& sample : token_logprobs) {
        if (sample.empty()) throw EmptyBatch("sft_loss sample with no tokens");
        for (double lp : sample) total += lp;
    }
    return -total / static_cast<double>(token_logprobs.size());
}

double sft_logprob_gradient(size_t n_samples) {
    return -1.0 / static_cast<double>(n_samples);
}

LossResult dpo_loss(const ActionScores& s, double beta) {
    return margin_loss(s, beta);
}

LossResult critic_dpo_loss(const ActionScores& s, double beta, ConsistencyScore cs) {
    double s_avg = beta + 0.1 * cs.value;
    if (s_avg <= 0.0)
        throw DegenerateCoefficient("adaptive coefficient " + std::to_string(s_avg) +
                                    " <= 0; beta must exceed 0.1");
    return margin_loss(s, s_avg);
}

double grad_check(const std::function<LossResult(const ActionScores&)>& fn,
                  const ActionScores& at, double h) {
    LossResult base = fn(at);

    auto central = [&](double ActionScores::*field) {
        ActionScores plus = at;
        ActionScores minus = at;
        plus.*field += h;
        minus.*field -= h;
        return (fn(plus).loss - fn(minus).loss) / (2.0 * h);
    };

    auto rel_err = [](double analytic, double numeric) {
        double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
        return std::fabs(analytic - numeric) / denom;
    };

    double err_chosen = rel_err(base.grad_policy_chosen, central(&ActionScores::policy_chosen));
    double err_rejected =
        rel_err(base.grad_policy_rejected, central(&ActionScores::policy_rejected));
    return std::max(err_chosen, err_rejected);
}

}  // namespace sqlcritic
