#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wbgsec/bayes.hpp"
#include "wbgsec/detector.hpp"
#include "wbgsec/noise_synth.hpp"
#include "wbgsec/puf.hpp"
#include "wbgsec/spectral.hpp"

#include <nlohmann/json.hpp>

namespace wbgsec {

struct PipelineConfig {
    SynthConfig synth;
    StftConfig stft;
    FeatureConfig features;
    PufConfig puf;
    RewardConfig reward;
    BayesConfig bayes;
    std::size_t pca_k_max = 8;
    double pca_variance_target = 0.95;
    double rl_epsilon = 0.05;
    double rl_learning_rate = 0.2;
    std::size_t rl_grid_points = 32;
};

struct AttackConfig {
    double emi_fraction = 0.1;
    double tamper_fraction = 0.1;
    double impersonation_fraction = 0.1;
    double emi_amplitude = 0.5;      // relative to benign RMS
    double emi_freq_offset = 2000.0; // Hz
    double tamper_sigma = 0.15;      // volts

    double attack_total() const { return emi_fraction + tamper_fraction + impersonation_fraction; }
};

struct ScenarioConfig {
    std::size_t fleet_size = 10;
    std::size_t n_challenges = 5;
    std::size_t n_calib_traces = 8;
    std::size_t measure_samples = 16384;  // enrollment/authentication traces
    std::size_t frame_samples = 4096;     // one detection frame = one STFT window
    std::size_t n_reliability_repeats = 20;
    std::size_t n_train_frames = 64;         // per device, detector training
    std::size_t n_val_frames = 40;           // per device, benign validation
    std::size_t n_attack_val_per_kind = 5;   // per device per attack kind
    std::size_t frames = 2000;               // detection stream length
    std::size_t rl_batch = 50;
    std::size_t episode_frames = 20;
    std::size_t n_auth_genuine = 200;
    std::size_t n_auth_rogue = 200;
    std::uint64_t master_seed = 42;
    double variability = 0.1;
    bool detector_enabled = true;
    bool bayes_enabled = true;
    AttackConfig attacks;
    PipelineConfig pipeline;

    void validate() const;
};

nlohmann::json scenario_config_to_json(const ScenarioConfig& cfg);
/// Strict parse: unknown keys anywhere in the document are rejected with the
/// offending path; missing keys fall back to defaults.
ScenarioConfig scenario_config_from_json(const nlohmann::json& j);

/// Challenge ladder used by enrollment and the CLI: load steps down by 0.1
/// within a group of five, temperature steps up by 15 degC per group.
std::vector<Challenge> make_challenges(std::size_t n, double switching_freq = 100e3);

/// Deterministic virtual fleet: device d gets seed derive(derive(master_seed,
/// 0xDE), d) and device_id d.
std::vector<DeviceProfile> make_fleet(const ScenarioConfig& cfg);

struct DetectionMetrics {
    ConfusionCounts counts;
    std::optional<double> precision, recall, f1, accuracy, fpr, fnr;
};

struct RocResult {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr)
    double auc = 0.0;
};

struct LatencySummary {
    std::size_t n = 0;
    double p50_us = 0.0, p90_us = 0.0, p99_us = 0.0;
};

struct PufMetrics {
    std::map<int, double> uniqueness_per_challenge;  // percent
    double uniqueness_pooled_mean = 0.0;
    std::map<int, double> reliability_per_device;    // percent, mean over challenges
    std::map<int, double> uniformity_per_device;     // percent, challenge 0 reference
    std::map<int, double> entropy_per_device;        // bits/bit, challenge 0 reference
    std::map<int, RandomnessReport> randomness_per_device;  // responses pooled over challenges
    RandomnessReport fleet_randomness;               // challenge-0 references concatenated
};

struct AuthMetrics {
    std::uint64_t genuine_attempts = 0, genuine_accepted = 0;
    std::uint64_t rogue_attempts = 0, rogue_rejected = 0;

    double genuine_accept_rate() const {
        return genuine_attempts ? static_cast<double>(genuine_accepted) /
                                      static_cast<double>(genuine_attempts)
                                : 0.0;
    }
    double rogue_reject_rate() const {
        return rogue_attempts ? static_cast<double>(rogue_rejected) /
                                    static_cast<double>(rogue_attempts)
                              : 0.0;
    }
};

struct FrameRecord {
    std::uint32_t frame_index = 0;
    int device_id = 0;
    TraceLabel truth = TraceLabel::benign;
    double score = 0.0;       // PCA reconstruction error
    double posterior = 0.0;   // Bayesian anomaly belief after this frame
    bool ml_anomalous = false;
    bool alert = false;
    bool baseline_anomalous = false;
    double baseline_energy = 0.0;
    double auth_distance = 0.0;  // fractional Hamming of the frame response
};

struct ScenarioResult {
    std::string schema_version = "1";
    ScenarioConfig config;  // echo, with all seeds
    PufMetrics puf;
    AuthMetrics auth;
    std::map<std::string, DetectionMetrics> detection_per_attack;
    DetectionMetrics detection_overall;
    DetectionMetrics baseline_overall;
    std::optional<RocResult> roc;  // absent when the stream is single-class
    std::map<std::string, double> auc_per_attack;
    std::map<int, std::size_t> pca_k_per_device;
    std::vector<FrameRecord> frame_trace;
    std::vector<double> latency_us;  // per-frame pipeline durations, post-warmup
    LatencySummary latency;

    /// include_latency=false yields the canonical form used for determinism
    /// comparisons (latency is wall-clock, everything else must replay).
    nlohmann::json to_json(bool include_latency = true) const;
    static ScenarioResult from_json(const nlohmann::json& j);
};

/// End-to-end reference run: enrollment, PUF metrology, authentication
/// trials, detector calibration, labeled detection stream with RL batches and
/// Bayesian smoothing, and every reported metric. Deterministic given the
/// config (latency values excepted).
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Threshold sweep over the unique scores (ties grouped), trapezoidal AUC.
/// Points run (0,0) .. (1,1); labels are 0 = negative, 1 = positive, and both
/// classes must be present.
RocResult roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

/// Standard confusion-matrix metrics; any 0/0 is reported as absent.
DetectionMetrics prf_metrics(const ConfusionCounts& counts);

struct LatencyReport {
    std::vector<double> per_frame_us;
    double p50_us = 0.0, p90_us = 0.0, p99_us = 0.0;
};

/// Per-frame wall-clock of pipeline stages 2-5 (acquisition excluded) over a
/// benign stream. warmup frames are executed but not recorded.
/// empty_pipeline measures the harness loop overhead alone.
LatencyReport latency_bench(const ScenarioConfig& cfg, std::size_t n_frames,
                            bool empty_pipeline = false, std::size_t warmup = 20);

/// Writes report.json plus plot-ready CSVs (roc.csv, latency_hist.csv,
/// posterior_trace.csv) under out_dir.
void emit_report(const ScenarioResult& result, const std::string& out_dir);

}  // namespace wbgsec
