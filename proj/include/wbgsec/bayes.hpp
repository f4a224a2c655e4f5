#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wbgsec {

/// Per-class score densities for the recursive filter: log-normal location and
/// scale for benign and anomalous reconstruction-error scores, with a floor
/// that keeps every likelihood strictly positive.
struct LikelihoodModel {
    double benign_log_mean = 0.0;
    double benign_log_sigma = 1.0;
    double anomalous_log_mean = 0.0;
    double anomalous_log_sigma = 1.0;
    double floor = 1e-6;

    double benign_likelihood(double score) const;
    double anomalous_likelihood(double score) const;

    std::string to_json_string() const;
    static LikelihoodModel from_json_string(const std::string& text);
};

struct BayesConfig {
    double decision_threshold = 0.9;
    double forgetting = 0.95;   // lambda
    double initial_prior = 0.01;

    void validate() const;
};

struct PosteriorState {
    double p_anomalous = 0.01;
    double prior_at_reset = 0.01;
    double forgetting = 0.95;
    std::uint64_t frames_seen = 0;
};

enum class AlertDecision { no_alert, alert };

PosteriorState make_posterior_state(const BayesConfig& cfg);

/// One filter step: the prior is pulled toward prior_at_reset by the
/// forgetting factor, then updated by the floored likelihood ratio:
///   prior  = lambda * p + (1 - lambda) * prior_at_reset
///   post   = prior * L1 / (prior * L1 + (1 - prior) * L0)
PosteriorState update(const PosteriorState& state, double score, const LikelihoodModel& lm);

/// alert iff p_anomalous >= decision_threshold (inclusive).
AlertDecision decide(const PosteriorState& state, const BayesConfig& cfg);

double lognormal_pdf(double x, double log_mean, double log_sigma);

/// Fits the two log-normal densities by log-moment matching (sample stddev,
/// N-1 divisor) on >= 20 scores per class.
LikelihoodModel fit_likelihoods(const std::vector<double>& benign_scores,
                                const std::vector<double>& attack_scores, double floor = 1e-6);

}  // namespace wbgsec
