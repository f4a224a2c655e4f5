#include "wbgsec/noise_synth.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wbgsec/rng.hpp"
#include <nlohmann/json.hpp>

namespace wbgsec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Adds a * sin(2*pi*f*t + phase) for t = i/fs via phasor recurrence.
void add_sinusoid(std::vector<double>& buf, double a, double freq, double phase, double fs) {
    const std::complex<double> rot = std::polar(1.0, kTwoPi * freq / fs);
    std::complex<double> cur = std::polar(a, phase);
    for (double& s : buf) {
        s += cur.imag();
        cur *= rot;
    }
}

}  // namespace

void OperatingCondition::validate() const {
    if (!(switching_freq > 0.0))
        throw std::invalid_argument("OperatingCondition: switching_freq must be > 0");
    if (!(load_level >= 0.0 && load_level <= 1.0))
        throw std::invalid_argument("OperatingCondition: load_level must be in [0,1]");
    if (!std::isfinite(temperature_c))
        throw std::invalid_argument("OperatingCondition: temperature must be finite");
}

void SynthConfig::validate() const {
    if (!(sample_rate > 0.0)) throw std::invalid_argument("SynthConfig: sample_rate must be > 0");
    if (n_harmonics < 1) throw std::invalid_argument("SynthConfig: n_harmonics must be >= 1");
    if (gaussian_floor < 0.0 || uniform_floor < 0.0)
        throw std::invalid_argument("SynthConfig: noise floors must be >= 0");
    if (!(sideband_grid_hz > 0.0))
        throw std::invalid_argument("SynthConfig: sideband_grid_hz must be > 0");
    if (sideband_level < 0.0)
        throw std::invalid_argument("SynthConfig: sideband_level must be >= 0");
    if (min_samples < 1) throw std::invalid_argument("SynthConfig: min_samples must be >= 1");
}

const char* to_string(TraceLabel label) {
    switch (label) {
        case TraceLabel::benign: return "benign";
        case TraceLabel::emi_spoof: return "emi_spoof";
        case TraceLabel::tamper: return "tamper";
        case TraceLabel::impersonation: return "impersonation";
    }
    return "benign";
}

TraceLabel trace_label_from_string(const std::string& s) {
    if (s == "benign") return TraceLabel::benign;
    if (s == "emi_spoof") return TraceLabel::emi_spoof;
    if (s == "tamper") return TraceLabel::tamper;
    if (s == "impersonation") return TraceLabel::impersonation;
    throw std::invalid_argument("unknown trace label: " + s);
}

DeviceProfile make_device_profile(std::uint64_t seed, double variability, const SynthConfig& cfg) {
    cfg.validate();
    if (!(variability > 0.0 && variability <= 0.5))
        throw std::invalid_argument("make_device_profile: variability must be in (0, 0.5]");

    Rng rng(Rng::derive(seed, 0x0Fu));
    DeviceProfile p;
    p.seed = seed;
    p.harmonic_gains.resize(cfg.n_harmonics);
    p.harmonic_phase_offsets.resize(cfg.n_harmonics);
    for (std::size_t k = 0; k < cfg.n_harmonics; ++k)
        p.harmonic_gains[k] = rng.uniform(1.0 - variability, 1.0 + variability);
    for (std::size_t k = 0; k < cfg.n_harmonics; ++k)
        p.harmonic_phase_offsets[k] = rng.uniform(0.0, kTwoPi);
    p.parasitic_jitter = rng.uniform(-cfg.jitter_max, cfg.jitter_max);
    p.noise_floor_gain = rng.uniform(1.0 - variability, 1.0 + variability);

    const double spread = cfg.texture_spread_per_variability * variability;
    const std::size_t lines = cfg.n_harmonics * 2 * cfg.sideband_half_count;
    p.sideband_gains.resize(lines);
    p.sideband_phases.resize(lines);
    for (std::size_t i = 0; i < lines; ++i) {
        p.sideband_gains[i] = rng.uniform(1.0 - spread, 1.0 + spread);
        p.sideband_phases[i] = rng.uniform(0.0, kTwoPi);
    }
    return p;
}

NoiseTrace synthesize_trace(const DeviceProfile& profile, const OperatingCondition& cond,
                            double duration_s, std::uint64_t rng_seed, const SynthConfig& cfg) {
    cfg.validate();
    cond.validate();
    if (profile.harmonic_gains.size() < cfg.n_harmonics ||
        profile.harmonic_phase_offsets.size() < cfg.n_harmonics)
        throw std::invalid_argument("synthesize_trace: profile has fewer harmonics than config");
    for (double g : profile.harmonic_gains)
        if (!(g > 0.0)) throw std::invalid_argument("synthesize_trace: harmonic gains must be > 0");

    const double fs = cfg.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
    if (n < cfg.min_samples) {
        std::ostringstream msg;
        msg << "synthesize_trace: duration " << duration_s << " s gives " << n
            << " samples; minimum is " << cfg.min_samples << " samples ("
            << static_cast<double>(cfg.min_samples) / fs << " s) for one analysis window";
        throw std::invalid_argument(msg.str());
    }

    const double jitter = 1.0 + profile.parasitic_jitter;
    const double top_harmonic = static_cast<double>(cfg.n_harmonics) * cond.switching_freq;
    if (fs < 4.0 * top_harmonic) {
        std::ostringstream msg;
        msg << "synthesize_trace: sample_rate " << fs << " Hz is below 4 x highest harmonic ("
            << top_harmonic << " Hz)";
        throw std::invalid_argument(msg.str());
    }
    const double top_emitted =
        top_harmonic * jitter +
        static_cast<double>(2 * cfg.sideband_half_count) * cfg.sideband_grid_hz;
    if (top_emitted >= fs / 2.0)
        throw std::invalid_argument("synthesize_trace: modeled components reach Nyquist");

    std::vector<double> buf(n, 0.0);
    const double temp_scale = 1.0 + cfg.temperature_coeff * (cond.temperature_c - 25.0);

    const bool has_sidebands =
        cfg.sideband_level > 0.0 && cfg.sideband_half_count > 0 &&
        profile.sideband_gains.size() >= cfg.n_harmonics * 2 * cfg.sideband_half_count;

    for (std::size_t k = 1; k <= cfg.n_harmonics; ++k) {
        const double kd = static_cast<double>(k);
        const double gain = profile.harmonic_gains[k - 1];
        double amp = cfg.base_amplitude / kd * gain * temp_scale;
        if (k == 1) amp *= cond.load_level;
        const double freq = kd * cond.switching_freq * jitter;
        add_sinusoid(buf, amp, freq, profile.harmonic_phase_offsets[k - 1], fs);

        if (!has_sidebands) continue;
        // Comb lines at even grid multiples around the harmonic, device-fixed
        // amplitude and phase per line. Line frequencies are anchored to the
        // grid so STFT frames at the default hop see identical values.
        const double center =
            std::round(freq / cfg.sideband_grid_hz) * cfg.sideband_grid_hz;
        const double line_base = cfg.sideband_level * cfg.base_amplitude / kd * gain;
        const std::size_t half = cfg.sideband_half_count;
        for (std::size_t j = 0; j < 2 * half; ++j) {
            const long m = (j < half) ? -static_cast<long>(half - j)
                                      : static_cast<long>(j - half + 1);
            const std::size_t idx = (k - 1) * 2 * half + j;
            const double f_line = center + 2.0 * static_cast<double>(m) * cfg.sideband_grid_hz;
            add_sinusoid(buf, line_base * profile.sideband_gains[idx], f_line,
                         profile.sideband_phases[idx], fs);
        }
    }

    if (profile.noise_floor_gain > 0.0 && (cfg.gaussian_floor > 0.0 || cfg.uniform_floor > 0.0)) {
        Rng rng(Rng::derive(rng_seed, 0x7ceu));
        const double sg = cfg.gaussian_floor * profile.noise_floor_gain;
        const double su = cfg.uniform_floor * profile.noise_floor_gain;
        for (double& s : buf) {
            if (sg > 0.0) s += sg * rng.gaussian();
            if (su > 0.0) s += rng.uniform(-su, su);
        }
    }

    NoiseTrace trace;
    trace.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) trace.samples[i] = static_cast<float>(buf[i]);
    trace.sample_rate = fs;
    trace.device_id = profile.device_id;
    trace.condition = cond;
    trace.label = TraceLabel::benign;
    trace.seed = rng_seed;
    return trace;
}

NoiseTrace inject_emi_spoof(const NoiseTrace& trace, const AttackSpec& spec) {
    if (spec.kind != TraceLabel::emi_spoof)
        throw std::invalid_argument("inject_emi_spoof: spec.kind must be emi_spoof");
    if (spec.amplitude < 0.0)
        throw std::invalid_argument("inject_emi_spoof: amplitude must be >= 0");

    NoiseTrace out = trace;
    out.label = TraceLabel::emi_spoof;
    if (spec.amplitude == 0.0) return out;

    const double a = spec.amplitude * rms(trace.samples);
    const double freq = trace.condition.switching_freq + spec.freq_offset;
    const std::complex<double> rot = std::polar(1.0, kTwoPi * freq / trace.sample_rate);
    std::complex<double> cur = std::polar(a, 0.0);
    for (float& s : out.samples) {
        s = static_cast<float>(static_cast<double>(s) + cur.imag());
        cur *= rot;
    }
    return out;
}

NoiseTrace inject_tamper(const NoiseTrace& trace, const AttackSpec& spec, std::uint64_t rng_seed) {
    if (spec.kind != TraceLabel::tamper)
        throw std::invalid_argument("inject_tamper: spec.kind must be tamper");
    if (spec.sigma < 0.0) throw std::invalid_argument("inject_tamper: sigma must be >= 0");

    NoiseTrace out = trace;
    out.label = TraceLabel::tamper;
    if (spec.sigma == 0.0) return out;

    Rng rng(Rng::derive(rng_seed, 0x7a3u));
    for (float& s : out.samples)
        s = static_cast<float>(static_cast<double>(s) + spec.sigma * rng.gaussian());
    return out;
}

double rms(std::span<const float> samples) {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (float s : samples) acc += static_cast<double>(s) * static_cast<double>(s);
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

static_assert(std::endian::native == std::endian::little,
              "trace files are little-endian; byte swapping not implemented");

void write_trace(const NoiseTrace& trace, const std::string& path_base) {
    const std::string bin_path = path_base + ".f32";
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("write_trace: cannot open " + bin_path);
    bin.write(reinterpret_cast<const char*>(trace.samples.data()),
              static_cast<std::streamsize>(trace.samples.size() * sizeof(float)));
    if (!bin) throw std::runtime_error("write_trace: write failed for " + bin_path);

    nlohmann::json j;
    j["sample_rate"] = trace.sample_rate;
    j["device_id"] = trace.device_id;
    j["condition"] = {{"switching_freq", trace.condition.switching_freq},
                      {"load_level", trace.condition.load_level},
                      {"temperature_c", trace.condition.temperature_c}};
    j["label"] = to_string(trace.label);
    j["seed"] = trace.seed;
    j["n_samples"] = trace.samples.size();

    const std::string json_path = path_base + ".json";
    std::ofstream side(json_path);
    if (!side) throw std::runtime_error("write_trace: cannot open " + json_path);
    side << j.dump(2) << "\n";
    if (!side) throw std::runtime_error("write_trace: write failed for " + json_path);
}

NoiseTrace read_trace(const std::string& path_base) {
    const std::string json_path = path_base + ".json";
    std::ifstream side(json_path);
    if (!side) throw std::runtime_error("read_trace: cannot open " + json_path);
    nlohmann::json j = nlohmann::json::parse(side);

    NoiseTrace trace;
    trace.sample_rate = j.at("sample_rate").get<double>();
    trace.device_id = j.at("device_id").get<int>();
    trace.condition.switching_freq = j.at("condition").at("switching_freq").get<double>();
    trace.condition.load_level = j.at("condition").at("load_level").get<double>();
    trace.condition.temperature_c = j.at("condition").at("temperature_c").get<double>();
    trace.label = trace_label_from_string(j.at("label").get<std::string>());
    trace.seed = j.at("seed").get<std::uint64_t>();
    const auto n = j.at("n_samples").get<std::size_t>();

    const std::string bin_path = path_base + ".f32";
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw std::runtime_error("read_trace: cannot open " + bin_path);
    trace.samples.resize(n);
    bin.read(reinterpret_cast<char*>(trace.samples.data()),
             static_cast<std::streamsize>(n * sizeof(float)));
    if (bin.gcount() != static_cast<std::streamsize>(n * sizeof(float)))
        throw std::runtime_error("read_trace: " + bin_path + " shorter than sidecar n_samples");
    return trace;
}

void write_trace_csv(const NoiseTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << "index,volts\n";
    for (std::size_t i = 0; i < trace.samples.size(); ++i)
        out << i << "," << trace.samples[i] << "\n";
}

}  // namespace wbgsec
