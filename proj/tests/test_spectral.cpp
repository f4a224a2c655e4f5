#include <cmath>
#include <filesystem>
#include <fstream>

#include "wbgsec/rng.hpp"
#include "wbgsec/spectral.hpp"

#include "oracles.hpp"
#include <doctest.h>

using namespace wbgsec;

namespace {

NoiseTrace tone_trace(double freq_hz, double amplitude, double sample_rate, std::size_t n,
                      double phase = 0.0) {
    NoiseTrace tr;
    tr.sample_rate = sample_rate;
    tr.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        tr.samples[i] = static_cast<float>(
            amplitude * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / sample_rate +
                                 phase));
    return tr;
}

}  // namespace

TEST_CASE("stft localizes a unit tone at 100 kHz on a 1 MHz grid") {
    NoiseTrace tr = tone_trace(100e3, 1.0, 1e6, 8192);
    StftConfig cfg;  // hann, 4096
    Spectrogram spec = stft(tr, cfg);
    CHECK(spec.bin_hz == doctest::Approx(1e6 / 4096));
    std::vector<double> avg = time_average(spec);
    std::size_t argmax = 0;
    for (std::size_t b = 1; b < avg.size(); ++b)
        if (avg[b] > avg[argmax]) argmax = b;
    CHECK(argmax == static_cast<std::size_t>(std::llround(100e3 / spec.bin_hz)));
}

TEST_CASE("stft of an all-zero trace is all zero") {
    NoiseTrace tr;
    tr.sample_rate = 2e6;
    tr.samples.assign(4096, 0.0f);
    Spectrogram spec = stft(tr, StftConfig{});
    for (const auto& row : spec.magnitudes)
        for (double v : row) CHECK(v == 0.0);
}

TEST_CASE("two equal tones produce equal dominant magnitudes within 1%") {
    // Bin-centered frequencies so window scalloping treats both identically.
    StftConfig cfg;
    const double fs = 1e6;
    const double bin = fs / static_cast<double>(cfg.fft_len);
    const double f1 = std::round(100e3 / bin) * bin;
    const double f2 = std::round(200e3 / bin) * bin;
    NoiseTrace tr = tone_trace(f1, 1.0, fs, 4096);
    NoiseTrace t2 = tone_trace(f2, 1.0, fs, 4096, 1.234);
    for (std::size_t i = 0; i < tr.samples.size(); ++i) tr.samples[i] += t2.samples[i];

    Spectrogram spec = stft(tr, cfg);
    const auto b1 = static_cast<std::size_t>(std::llround(f1 / bin));
    const auto b2 = static_cast<std::size_t>(std::llround(f2 / bin));
    CHECK(spec.magnitudes[0][b1] == doctest::Approx(spec.magnitudes[0][b2]).epsilon(0.01));

    // Cross-checked against the O(N^2) DFT oracle at both bins.
    std::vector<double> frame(tr.samples.begin(), tr.samples.end());
    std::vector<double> oracle = oracles::dft_frame_magnitudes(frame, true, cfg.fft_len);
    CHECK(spec.magnitudes[0][b1] == doctest::Approx(oracle[b1]).epsilon(1e-9));
    CHECK(spec.magnitudes[0][b2] == doctest::Approx(oracle[b2]).epsilon(1e-9));
}

TEST_CASE("stft rejects traces shorter than the window") {
    NoiseTrace tr;
    tr.sample_rate = 2e6;
    tr.samples.assign(1000, 0.0f);
    CHECK_THROWS_AS(stft(tr, StftConfig{}), std::invalid_argument);
}

TEST_CASE("stft config validation") {
    StftConfig bad;
    bad.fft_len = 3000;  // not a power of two
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    StftConfig bad2;
    bad2.hop = 8192;  // hop > window
    CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}

TEST_CASE("stft agrees with the naive DFT oracle on small frames") {
    Rng rng(404);
    for (bool hann : {true, false}) {
        NoiseTrace tr;
        tr.sample_rate = 1e6;
        tr.samples.resize(256);
        for (auto& s : tr.samples) s = static_cast<float>(rng.uniform(-1.0, 1.0));

        StftConfig cfg;
        cfg.window_kind = hann ? WindowKind::hann : WindowKind::rect;
        cfg.window_len = 256;
        cfg.hop = 256;
        cfg.fft_len = 256;
        Spectrogram spec = stft(tr, cfg);

        std::vector<double> frame(tr.samples.begin(), tr.samples.end());
        std::vector<double> oracle = oracles::dft_frame_magnitudes(frame, hann, 256);
        double max_mag = 0.0;
        for (double v : oracle) max_mag = std::max(max_mag, v);
        for (std::size_t b = 0; b < oracle.size(); ++b)
            CHECK(std::fabs(spec.magnitudes[0][b] - oracle[b]) < 1e-9 * max_mag);
    }
}

TEST_CASE("extract_features: single active band holds all the mass") {
    Spectrogram spec;
    spec.bin_hz = 488.28125;
    spec.magnitudes.assign(1, std::vector<double>(2049, 0.0));
    // Only bins inside [95k, 105k] are nonzero.
    for (std::size_t b = 195; b <= 215; ++b) spec.magnitudes[0][b] = 1.0;
    FeatureVector f = extract_features(spec, {100e3, 200e3}, 5e3, 16);
    REQUIRE(f.size() == 32);
    double first_band = 0.0, second_band = 0.0;
    for (std::size_t i = 0; i < 16; ++i) first_band += f.values[i];
    for (std::size_t i = 16; i < 32; ++i) second_band += f.values[i];
    CHECK(first_band == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(second_band == 0.0);
}

TEST_CASE("extract_features: all-zero spectrogram stays all zero") {
    Spectrogram spec;
    spec.bin_hz = 488.28125;
    spec.magnitudes.assign(2, std::vector<double>(2049, 0.0));
    FeatureVector f = extract_features(spec, {100e3}, 5e3, 16);
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("default feature config yields n = 64") {
    Spectrogram spec;
    spec.bin_hz = 488.28125;
    spec.magnitudes.assign(1, std::vector<double>(2049, 1.0));
    FeatureVector f = extract_features(spec, FeatureConfig{});
    CHECK(f.size() == 64);
    CHECK(f.band_centers.size() == 64);
    double total = 0.0;
    for (double v : f.values) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("extract_features rejects bands outside the spectrogram range") {
    Spectrogram spec;
    spec.bin_hz = 488.28125;
    spec.magnitudes.assign(1, std::vector<double>(2049, 1.0));
    try {
        extract_features(spec, {999e3}, 5e3, 16);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("999000") != std::string::npos);
    }
}

TEST_CASE("feature elements are insensitive to a one-hop circular shift") {
    StftConfig cfg;
    const double fs = 2e6;
    const std::size_t n = 16384;
    // Trace-periodic tones so the circular shift is a genuine time shift
    // (no seam discontinuity): frequencies on the fs/n grid near 100/200 kHz.
    const double grid = fs / static_cast<double>(n);
    NoiseTrace tr = tone_trace(std::round(100e3 / grid) * grid, 1.0, fs, n);
    NoiseTrace t2 = tone_trace(std::round(200e3 / grid) * grid, 0.5, fs, n, 0.7);
    for (std::size_t i = 0; i < n; ++i) tr.samples[i] += t2.samples[i];

    NoiseTrace shifted = tr;
    std::rotate(shifted.samples.begin(), shifted.samples.begin() + cfg.hop,
                shifted.samples.end());

    FeatureConfig fc;
    FeatureVector a = extract_features(stft(tr, cfg), fc);
    FeatureVector b = extract_features(stft(shifted, cfg), fc);
    double max_value = 0.0;
    for (double v : a.values) max_value = std::max(max_value, v);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.values[i] > 1e-4 * max_value)
            CHECK(std::fabs(a.values[i] - b.values[i]) / a.values[i] < 0.01);
    }
}

TEST_CASE("scaling samples leaves the normalized features unchanged") {
    Rng rng(7);
    NoiseTrace tr = tone_trace(100e3, 1.0, 2e6, 8192);
    for (auto& s : tr.samples) s += static_cast<float>(0.01 * rng.gaussian());
    NoiseTrace scaled = tr;
    for (auto& s : scaled.samples) s *= 4.0f;  // power of two: exact in float

    FeatureConfig fc;
    StftConfig cfg;
    FeatureVector a = extract_features(stft(tr, cfg), fc);
    FeatureVector b = extract_features(stft(scaled, cfg), fc);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-9));
}

TEST_CASE("spectrogram csv export writes grid and header") {
    namespace fs = std::filesystem;
    NoiseTrace tr = tone_trace(100e3, 1.0, 2e6, 8192);
    Spectrogram spec = stft(tr, StftConfig{});
    const std::string base = (fs::temp_directory_path() / "wbgsec_specgram").string();
    write_spectrogram_csv(spec, base);

    std::ifstream csv(base + ".csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == spec.frames());
    std::ifstream side(base + ".json");
    CHECK(side.good());
    fs::remove(base + ".csv");
    fs::remove(base + ".json");
}
