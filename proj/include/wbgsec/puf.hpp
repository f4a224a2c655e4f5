#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wbgsec/noise_synth.hpp"
#include "wbgsec/spectral.hpp"

namespace wbgsec {

struct CalibrationStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // sample stddev, N-1 divisor
    std::size_t n_samples = 0;
};

struct PufConfig {
    double theta = 0.0;           // quantization sensitivity
    double auth_threshold = 0.10; // max fractional Hamming distance accepted

    void validate() const;
};

struct Challenge {
    int challenge_id = 0;
    OperatingCondition condition;
};

struct PufResponse {
    std::vector<std::uint8_t> bits;  // values 0/1

    std::size_t size() const { return bits.size(); }
    std::size_t popcount() const;
    std::string to_hex() const;  // MSB-first nibbles, zero-padded
    static PufResponse from_hex(const std::string& hex, std::size_t n_bits);
};

struct CrpRecord {
    int device_id = 0;
    Challenge challenge;
    CalibrationStats calibration;
    PufResponse reference;
};

struct CrpDatabase {
    std::map<std::pair<int, int>, CrpRecord> records;  // (device_id, challenge_id)
    std::string version = "1";
    std::string created_at;  // deterministic by default so re-enrollment is byte-identical

    void insert(CrpRecord record);
    const CrpRecord* find(int device_id, int challenge_id) const;

    std::string to_json_string() const;
    static CrpDatabase from_json_string(const std::string& text);
    void save(const std::string& path) const;
    static CrpDatabase load(const std::string& path);
};

enum class AuthDecision { accept, reject, unknown_identity };
const char* to_string(AuthDecision d);

/// Element-wise sample mean and stddev over >= 2 equal-length vectors.
CalibrationStats calibrate(const std::vector<FeatureVector>& features);

/// bit_i = 1 exactly when f_i > mean_i + theta * stddev_i (strict).
PufResponse quantize(const FeatureVector& f, const CalibrationStats& cal, const PufConfig& cfg);

double fractional_hamming(const PufResponse& a, const PufResponse& b);

/// accept iff fractional Hamming distance to the stored reference <= auth_threshold;
/// unknown_identity when no record exists. Length mismatch throws (distinct from reject).
AuthDecision authenticate(int claimed_device_id, const Challenge& challenge,
                          const PufResponse& response, const CrpDatabase& db,
                          const PufConfig& cfg);

/// Empirical bit-frequency entropy in [0, 1] bits per bit.
double shannon_entropy(const PufResponse& r);

/// Mean pairwise fractional Hamming distance across devices, percent.
double uniqueness_percent(const std::map<int, PufResponse>& responses);

/// 100 * (1 - mean fractional Hamming distance of repeats to the reference).
double reliability_percent(const std::vector<PufResponse>& repeats, const PufResponse& reference);

double uniformity_percent(const PufResponse& r);

struct RandomnessTestResult {
    std::string name;
    double p_value = 0.0;
    bool pass = false;  // p >= 0.01
};

struct RandomnessReport {
    std::vector<RandomnessTestResult> tests;  // monobit, block_frequency, runs
    bool overall_pass = false;                // all three pass at alpha = 0.01

    const RandomnessTestResult& test(const std::string& name) const;
};

constexpr std::size_t kRandomnessMinBits = 128;
constexpr std::size_t kBlockFrequencyBlockLen = 16;

/// Monobit frequency, block-frequency (16-bit blocks) and runs tests on a
/// concatenated bitstream of 0/1 bytes.
RandomnessReport randomness_tests(const std::vector<std::uint8_t>& bitstream,
                                  std::size_t min_len = kRandomnessMinBits);

/// Everything the enrollment pipeline needs in one place.
struct PufPipelineConfig {
    SynthConfig synth;
    StftConfig stft;
    FeatureConfig features;
    PufConfig puf;
    std::size_t n_calib_traces = 8;
    std::size_t measure_samples = 16384;  // per calibration/authentication trace

    double measure_duration() const {
        return static_cast<double>(measure_samples) / synth.sample_rate;
    }
};

/// Synthesize one measurement trace and run it through the spectral front end.
FeatureVector measure_features(const DeviceProfile& profile, const OperatingCondition& cond,
                               std::uint64_t rng_seed, const PufPipelineConfig& cfg);

/// Fresh measurement quantized against stored calibration stats.
PufResponse measure_response(const DeviceProfile& profile, const OperatingCondition& cond,
                             std::uint64_t rng_seed, const PufPipelineConfig& cfg,
                             const CalibrationStats& cal);

/// Deterministic seed for calibration trace `index` of (device, challenge).
std::uint64_t calib_trace_seed(std::uint64_t device_seed, int challenge_id, std::size_t index);
/// Deterministic seed for post-enrollment probe `index` (repeats, auth attempts).
std::uint64_t probe_trace_seed(std::uint64_t device_seed, int challenge_id, std::size_t index);

/// Enrolls one device against per-challenge calibration statistics
/// (stats come from the fleet-level calibration pass; see enroll_fleet).
std::vector<CrpRecord> enroll_device(const DeviceProfile& profile,
                                     const std::vector<Challenge>& challenges,
                                     const std::vector<CalibrationStats>& stats_per_challenge,
                                     const PufPipelineConfig& cfg);

/// Full enrollment: per challenge, calibrates over the whole fleet's
/// calibration features, then derives each device's reference response from
/// its own mean feature vector. Requires n_calib_traces >= 8.
CrpDatabase enroll_fleet(const std::vector<DeviceProfile>& fleet,
                         const std::vector<Challenge>& challenges,
                         const PufPipelineConfig& cfg);

/// Enrollment from pre-measured calibration features, keyed by
/// (device_id, challenge_id). Used by the file-based CLI flow; enroll_fleet
/// delegates here after synthesizing its measurements.
CrpDatabase enroll_from_features(
    const std::map<std::pair<int, int>, std::vector<FeatureVector>>& calib_features,
    const std::map<int, OperatingCondition>& challenge_conditions, const PufConfig& cfg);

}  // namespace wbgsec
