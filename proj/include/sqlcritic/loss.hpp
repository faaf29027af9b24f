#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sqlcritic/scoring.hpp"

namespace sqlcritic {

/// Full-response log-likelihoods (sums over tokens) under the policy and the
/// frozen reference, for the chosen and rejected critiques of one pair.
struct ActionScores {
    double policy_chosen = 0.0;
    double policy_rejected = 0.0;
    double ref_chosen = 0.0;
    double ref_rejected = 0.0;
};

struct LossResult {
    double loss = 0.0;
    double grad_policy_chosen = 0.0;
    double grad_policy_rejected = 0.0;
    double margin = 0.0;  // the scaled log-ratio difference inside the sigmoid
};

/// Token-level negative log-likelihood of the chosen critiques: sum over
/// tokens per sample, mean over samples. Throws EmptyBatch.
double sft_loss(std::span<const std::vector<double>> token_logprobs);

/// Gradient of sft_loss w.r.t. any single token log-probability: -1/N.
double sft_logprob_gradient(size_t n_samples);

/// Preference loss over the log-ratio margin
///   margin = beta * [(policy_chosen - ref_chosen) - (policy_rejected - ref_rejected)]
///   loss   = -log sigmoid(margin)
/// with analytic gradients w.r.t. the two policy scores.
LossResult dpo_loss(const ActionScores& s, double beta);

/// Preference loss with the clause-inconsistency-adaptive coefficient
/// s_avg = beta + 0.1 * cs replacing the fixed beta. Requires beta > 0.1 so
/// the coefficient stays positive even on verdict-conflict pairs (cs = -1);
/// throws DegenerateCoefficient when s_avg <= 0.
LossResult critic_dpo_loss(const ActionScores& s, double beta, ConsistencyScore cs);

/// Max relative error between the analytic policy gradients of `fn` and
/// central finite differences with step h.
double grad_check(const std::function<LossResult(const ActionScores&)>& fn,
                  const ActionScores& at, double h = 1e-5);

double sigmoid(double x);

}  // namespace sqlcritic
