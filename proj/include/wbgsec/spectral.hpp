#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wbgsec/noise_synth.hpp"

namespace wbgsec {

enum class WindowKind { hann, rect };

struct StftConfig {
    WindowKind window_kind = WindowKind::hann;
    std::size_t window_len = 4096;
    std::size_t hop = 2048;
    std::size_t fft_len = 4096;

    void validate() const;
};

struct Spectrogram {
    // magnitudes[frame][bin], one-sided (fft_len/2 + 1 bins), nonnegative.
    std::vector<std::vector<double>> magnitudes;
    double bin_hz = 0.0;
    std::vector<double> frame_times;  // window-center times, seconds
    std::string scaling;              // documented magnitude normalization

    std::size_t frames() const { return magnitudes.size(); }
    std::size_t bins() const { return magnitudes.empty() ? 0 : magnitudes[0].size(); }
    double max_freq() const { return bins() == 0 ? 0.0 : bin_hz * static_cast<double>(bins() - 1); }
};

/// Normalized harmonic-band amplitude distribution. values sum to 1 unless
/// total band energy is zero, in which case every element is 0.
struct FeatureVector {
    std::vector<double> values;
    std::vector<double> band_centers;  // Hz of the bin behind each element

    std::size_t size() const { return values.size(); }
};

struct FeatureConfig {
    std::vector<double> harmonics = {100e3, 200e3, 300e3, 400e3};
    double half_width = 5e3;
    std::size_t n_per_band = 16;
};

Spectrogram stft(const NoiseTrace& trace, const StftConfig& cfg);

/// Mean magnitude per bin across STFT frames.
std::vector<double> time_average(const Spectrogram& spec);

/// Time-averages the spectrogram, picks n_per_band bins per harmonic band
/// [h - half_width, h + half_width] (uniform decimation when the band holds
/// more bins), concatenates across bands and normalizes to sum 1.
FeatureVector extract_features(const Spectrogram& spec, const std::vector<double>& harmonics,
                               double half_width, std::size_t n_per_band);
FeatureVector extract_features(const Spectrogram& spec, const FeatureConfig& cfg);

/// Writes <path_base>.csv (frame-major magnitude grid) and <path_base>.json
/// (bin_hz, frame_times, scaling).
void write_spectrogram_csv(const Spectrogram& spec, const std::string& path_base);

}  // namespace wbgsec
