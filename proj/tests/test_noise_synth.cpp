#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wbgsec/noise_synth.hpp"
#include "wbgsec/rng.hpp"
#include "wbgsec/spectral.hpp"

#include <doctest.h>

using namespace wbgsec;

namespace {

bool profiles_equal(const DeviceProfile& a, const DeviceProfile& b) {
    return a.harmonic_gains == b.harmonic_gains &&
           a.harmonic_phase_offsets == b.harmonic_phase_offsets &&
           a.parasitic_jitter == b.parasitic_jitter && a.noise_floor_gain == b.noise_floor_gain &&
           a.sideband_gains == b.sideband_gains && a.sideband_phases == b.sideband_phases;
}

double band_power(const NoiseTrace& trace, double lo_hz, double hi_hz) {
    StftConfig cfg;
    Spectrogram spec = stft(trace, cfg);
    std::vector<double> avg = time_average(spec);
    double acc = 0.0;
    for (std::size_t b = 0; b < avg.size(); ++b) {
        double f = static_cast<double>(b) * spec.bin_hz;
        if (f >= lo_hz && f <= hi_hz) acc += avg[b] * avg[b];
    }
    return acc;
}

}  // namespace

TEST_CASE("make_device_profile is deterministic and seed-sensitive") {
    auto a = make_device_profile(7, 0.1);
    auto b = make_device_profile(7, 0.1);
    CHECK(profiles_equal(a, b));

    auto c = make_device_profile(8, 0.1);
    CHECK(a.harmonic_gains != c.harmonic_gains);

    for (double g : a.harmonic_gains) {
        CHECK(g > 0.0);
        CHECK(g >= 0.9);
        CHECK(g <= 1.1);
    }
    CHECK(std::fabs(a.parasitic_jitter) <= 1e-4);
}

TEST_CASE("make_device_profile rejects bad variability") {
    CHECK_THROWS_AS(make_device_profile(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_device_profile(1, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(make_device_profile(1, -0.1), std::invalid_argument);
}

TEST_CASE("fleet of 10 profiles pairwise distinct") {
    std::vector<DeviceProfile> fleet;
    for (int d = 0; d < 10; ++d) fleet.push_back(make_device_profile(Rng::derive(42, d), 0.1));
    for (std::size_t i = 0; i < fleet.size(); ++i)
        for (std::size_t j = i + 1; j < fleet.size(); ++j)
            CHECK_FALSE(profiles_equal(fleet[i], fleet[j]));
}

TEST_CASE("pure single tone peaks at the switching frequency bin") {
    SynthConfig cfg;
    cfg.n_harmonics = 1;
    cfg.gaussian_floor = 0.0;
    cfg.uniform_floor = 0.0;
    cfg.sideband_level = 0.0;
    cfg.jitter_max = 0.0;
    auto profile = make_device_profile(3, 0.1, cfg);
    OperatingCondition cond;
    NoiseTrace tr = synthesize_trace(profile, cond, 4096 / cfg.sample_rate, 1, cfg);

    StftConfig stft_cfg;
    Spectrogram spec = stft(tr, stft_cfg);
    std::vector<double> avg = time_average(spec);
    std::size_t argmax = 0;
    for (std::size_t b = 1; b < avg.size(); ++b)
        if (avg[b] > avg[argmax]) argmax = b;
    CHECK(argmax == static_cast<std::size_t>(std::llround(100e3 / spec.bin_hz)));
}

TEST_CASE("synthesize_trace is deterministic") {
    auto profile = make_device_profile(11, 0.1);
    OperatingCondition cond;
    NoiseTrace a = synthesize_trace(profile, cond, 0.01, 99);
    NoiseTrace b = synthesize_trace(profile, cond, 0.01, 99);
    CHECK(a.samples == b.samples);
    NoiseTrace c = synthesize_trace(profile, cond, 0.01, 100);
    CHECK(a.samples != c.samples);
}

TEST_CASE("load level scales fundamental-band power ~4x between 1.0 and 0.5") {
    auto profile = make_device_profile(5, 0.1);
    OperatingCondition full{100e3, 1.0, 25.0};
    OperatingCondition half{100e3, 0.5, 25.0};
    SynthConfig cfg;
    double duration = 16384 / cfg.sample_rate;
    double p_full = band_power(synthesize_trace(profile, full, duration, 7), 95e3, 105e3);
    double p_half = band_power(synthesize_trace(profile, half, duration, 7), 95e3, 105e3);
    // Amplitude doubles, power quadruples; sidebands and noise floor dilute
    // the ratio slightly (measured 3.8 with defaults).
    CHECK(p_full / p_half == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("too-short duration names the minimum") {
    auto profile = make_device_profile(2, 0.1);
    OperatingCondition cond;
    try {
        synthesize_trace(profile, cond, 100 / SynthConfig{}.sample_rate, 1);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("4096") != std::string::npos);
    }
}

TEST_CASE("Nyquist guard rejects configurations whose harmonics reach too high") {
    SynthConfig cfg;
    cfg.n_harmonics = 8;  // 800 kHz against a 2 MHz rate: below the 4x margin
    auto profile = make_device_profile(2, 0.1, cfg);
    OperatingCondition cond;
    CHECK_THROWS_AS(synthesize_trace(profile, cond, 0.01, 1, cfg), std::invalid_argument);
}

TEST_CASE("emi spoof: zero amplitude is identity apart from the label") {
    auto profile = make_device_profile(21, 0.1);
    NoiseTrace tr = synthesize_trace(profile, {}, 0.01, 5);
    AttackSpec spec{TraceLabel::emi_spoof, 0.0, 0.0, 0.0, std::nullopt};
    NoiseTrace out = inject_emi_spoof(tr, spec);
    CHECK(out.samples == tr.samples);
    CHECK(out.label == TraceLabel::emi_spoof);
}

TEST_CASE("emi spoof at the fundamental raises fundamental-bin power") {
    // Phase alignment depends on the device; seed 21 is a constructive case.
    auto profile = make_device_profile(21, 0.1);
    NoiseTrace tr = synthesize_trace(profile, {}, 16384 / 2e6, 5);
    AttackSpec spec{TraceLabel::emi_spoof, 0.5, 0.0, 0.0, std::nullopt};
    NoiseTrace out = inject_emi_spoof(tr, spec);

    StftConfig cfg;
    std::vector<double> before = time_average(stft(tr, cfg));
    std::vector<double> after = time_average(stft(out, cfg));
    auto bin = static_cast<std::size_t>(std::llround(100e3 / (2e6 / 4096)));
    CHECK(after[bin] * after[bin] > before[bin] * before[bin]);
}

TEST_CASE("emi spoof with 2 kHz offset creates a new band peak at 102 kHz") {
    auto profile = make_device_profile(13, 0.1);
    NoiseTrace tr = synthesize_trace(profile, {}, 16384 / 2e6, 5);
    AttackSpec spec{TraceLabel::emi_spoof, 0.5, 2000.0, 0.0, std::nullopt};
    NoiseTrace out = inject_emi_spoof(tr, spec);

    // The injected tone is the peak of the attack-minus-benign spectrum in
    // the 95-105 kHz band (the benign fundamental still tops the raw band).
    StftConfig cfg;
    std::vector<double> before = time_average(stft(tr, cfg));
    Spectrogram spec_out = stft(out, cfg);
    std::vector<double> after = time_average(spec_out);
    const auto lo = static_cast<std::size_t>(std::ceil(95e3 / spec_out.bin_hz));
    const auto hi = static_cast<std::size_t>(std::floor(105e3 / spec_out.bin_hz));
    std::size_t argmax = lo;
    for (std::size_t b = lo; b <= hi; ++b)
        if (after[b] - before[b] > after[argmax] - before[argmax]) argmax = b;
    const double peak_hz = static_cast<double>(argmax) * spec_out.bin_hz;
    CHECK(peak_hz == doctest::Approx(102e3).epsilon(0.005));
    CHECK(out.label == TraceLabel::emi_spoof);

    // At low load the injected tone dominates the band outright.
    OperatingCondition low_load{100e3, 0.2, 25.0};
    NoiseTrace weak = synthesize_trace(profile, low_load, 16384 / 2e6, 5);
    std::vector<double> raw = time_average(stft(inject_emi_spoof(weak, spec), cfg));
    std::size_t raw_argmax = lo;
    for (std::size_t b = lo; b <= hi; ++b)
        if (raw[b] > raw[raw_argmax]) raw_argmax = b;
    CHECK(static_cast<double>(raw_argmax) * spec_out.bin_hz ==
          doctest::Approx(102e3).epsilon(0.005));
}

TEST_CASE("emi spoof rejects wrong attack kind") {
    auto profile = make_device_profile(1, 0.1);
    NoiseTrace tr = synthesize_trace(profile, {}, 0.01, 5);
    AttackSpec spec{TraceLabel::tamper, 0.5, 0.0, 0.0, std::nullopt};
    CHECK_THROWS_AS(inject_emi_spoof(tr, spec), std::invalid_argument);
}

TEST_CASE("tamper: sigma zero is identity on samples") {
    auto profile = make_device_profile(31, 0.1);
    NoiseTrace tr = synthesize_trace(profile, {}, 0.01, 5);
    AttackSpec spec{TraceLabel::tamper, 0.0, 0.0, 0.0, std::nullopt};
    NoiseTrace out = inject_tamper(tr, spec, 17);
    CHECK(out.samples == tr.samples);
    CHECK(out.label == TraceLabel::tamper);
}

TEST_CASE("tamper adds ~sigma^2 of sample variance and keeps the mean") {
    auto profile = make_device_profile(31, 0.1);
    NoiseTrace tr = synthesize_trace(profile, {}, 0.1, 5);  // 200k samples
    const double n = static_cast<double>(tr.samples.size());
    REQUIRE(tr.samples.size() >= 100000);

    const double sigma = 0.5;
    AttackSpec spec{TraceLabel::tamper, 0.0, 0.0, sigma, std::nullopt};
    NoiseTrace out = inject_tamper(tr, spec, 17);

    auto moments = [n](const NoiseTrace& t) {
        double m = 0.0, v = 0.0;
        for (float s : t.samples) m += s;
        m /= n;
        for (float s : t.samples) v += (s - m) * (s - m);
        return std::pair{m, v / n};
    };
    auto [m_before, v_before] = moments(tr);
    auto [m_after, v_after] = moments(out);
    CHECK(v_after - v_before == doctest::Approx(sigma * sigma).epsilon(0.10));
    CHECK(std::fabs(m_after - m_before) <= 3.0 * sigma / std::sqrt(n));
}

TEST_CASE("tamper rejects wrong attack kind and negative sigma") {
    auto profile = make_device_profile(1, 0.1);
    NoiseTrace tr = synthesize_trace(profile, {}, 0.01, 5);
    AttackSpec wrong{TraceLabel::emi_spoof, 0.0, 0.0, 0.1, std::nullopt};
    CHECK_THROWS_AS(inject_tamper(tr, wrong, 1), std::invalid_argument);
    AttackSpec neg{TraceLabel::tamper, 0.0, 0.0, -0.1, std::nullopt};
    CHECK_THROWS_AS(inject_tamper(tr, neg, 1), std::invalid_argument);
}

TEST_CASE("noiseless fingerprints of distinct devices differ in the fundamental band") {
    SynthConfig cfg;
    cfg.gaussian_floor = 0.0;
    cfg.uniform_floor = 0.0;
    auto a = make_device_profile(100, 0.1, cfg);
    auto b = make_device_profile(200, 0.1, cfg);
    FeatureConfig fc;
    fc.harmonics = {100e3};
    StftConfig sc;
    auto features = [&](const DeviceProfile& p) {
        NoiseTrace tr = synthesize_trace(p, {}, 16384 / cfg.sample_rate, 1, cfg);
        return extract_features(stft(tr, sc), fc);
    };
    FeatureVector fa = features(a), fb = features(b);
    double mad = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) mad += std::fabs(fa.values[i] - fb.values[i]);
    mad /= static_cast<double>(fa.size());
    CHECK(mad > 0.0);
}

TEST_CASE("condition validation") {
    OperatingCondition bad_freq{0.0, 1.0, 25.0};
    CHECK_THROWS_AS(bad_freq.validate(), std::invalid_argument);
    OperatingCondition bad_load{100e3, 1.5, 25.0};
    CHECK_THROWS_AS(bad_load.validate(), std::invalid_argument);
}

TEST_CASE("trace file round trip") {
    namespace fs = std::filesystem;
    auto profile = make_device_profile(77, 0.1);
    profile.device_id = 4;
    OperatingCondition cond{100e3, 0.8, 40.0};
    NoiseTrace tr = synthesize_trace(profile, cond, 0.01, 123);
    tr.label = TraceLabel::tamper;

    const std::string base = (fs::temp_directory_path() / "wbgsec_trace_rt").string();
    write_trace(tr, base);
    NoiseTrace rt = read_trace(base);
    CHECK(rt.samples == tr.samples);
    CHECK(rt.device_id == 4);
    CHECK(rt.sample_rate == tr.sample_rate);
    CHECK(rt.condition.load_level == cond.load_level);
    CHECK(rt.condition.temperature_c == cond.temperature_c);
    CHECK(rt.label == TraceLabel::tamper);
    CHECK(rt.seed == 123);

    write_trace_csv(tr, base + ".csv");
    std::ifstream csv(base + ".csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == tr.samples.size() + 1);  // header + one row per sample
    fs::remove(base + ".f32");
    fs::remove(base + ".json");
    fs::remove(base + ".csv");
}

TEST_CASE("temperature scales harmonic tones monotonically") {
    SynthConfig cfg;
    cfg.gaussian_floor = 0.0;
    cfg.uniform_floor = 0.0;
    cfg.sideband_level = 0.0;
    auto profile = make_device_profile(9, 0.1, cfg);
    OperatingCondition cold{100e3, 1.0, 25.0};
    OperatingCondition hot{100e3, 1.0, 125.0};
    double duration = 16384 / cfg.sample_rate;
    double p_cold = band_power(synthesize_trace(profile, cold, duration, 3, cfg), 95e3, 105e3);
    double p_hot = band_power(synthesize_trace(profile, hot, duration, 3, cfg), 95e3, 105e3);
    // (1 + 0.001 * 100)^2 = 1.21 power ratio on the tone
    CHECK(p_hot / p_cold == doctest::Approx(1.21).epsilon(0.02));
}
