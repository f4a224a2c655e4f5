#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wbgsec/rng.hpp"
#include "wbgsec/spectral.hpp"

namespace wbgsec {

struct PcaModel {
    std::vector<double> mean;                     // n
    std::vector<std::vector<double>> components;  // k rows, orthonormal, length n
    std::vector<double> explained_variance;       // k, descending
    std::size_t k = 0;
    std::size_t n = 0;

    std::string to_json_string() const;
    static PcaModel from_json_string(const std::string& text);
};

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

struct RewardConfig {
    double alpha = 1.0;  // weight on true positives
    double beta = 1.0;   // weight on false positives

    void validate() const;
};

/// Candidate-threshold bandit state. grid must be strictly increasing.
struct ThresholdPolicy {
    std::vector<double> grid;
    std::vector<double> q_values;
    double epsilon = 0.05;
    double learning_rate = 0.2;
    std::size_t current_index = 0;

    void validate() const;
    double current_threshold() const { return grid.at(current_index); }

    std::string to_json_string() const;
};

enum class DetectorLabel { normal, anomalous };

/// Mean-centered principal components by descending variance, sign fixed so
/// the largest-magnitude element of each component is positive.
PcaModel fit_pca(const std::vector<std::vector<double>>& rows, std::size_t k);
PcaModel fit_pca(const std::vector<FeatureVector>& features, std::size_t k);

/// Squared reconstruction error of f against the model subspace.
double anomaly_score(const PcaModel& model, const std::vector<double>& f);
double anomaly_score(const PcaModel& model, const FeatureVector& f);

/// Smallest k whose cumulative explained variance reaches `target` fraction,
/// capped at k_max. Helper for choosing the retained dimension.
std::size_t choose_k(const std::vector<double>& explained_variance, double target,
                     std::size_t k_max);

/// anomalous iff score > current threshold (strict; ties classify as normal).
DetectorLabel classify(double score, const ThresholdPolicy& policy);

/// One bandit step: reward = alpha*tp - beta*fp, Q-update on the current arm,
/// then epsilon-greedy re-selection (ties break toward the lower index).
ThresholdPolicy rl_update(const ThresholdPolicy& policy, const ConfusionCounts& batch,
                          const RewardConfig& cfg, Rng& rng);

/// Builds the candidate grid from benign scores: n_points geometrically spaced
/// over [p50, p99.9] (scores are right-skewed). Starts at the top candidate.
ThresholdPolicy make_threshold_policy(const std::vector<double>& benign_scores,
                                      std::size_t n_points = 32, double epsilon = 0.05,
                                      double learning_rate = 0.2);

}  // namespace wbgsec
