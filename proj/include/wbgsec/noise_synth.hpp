#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wbgsec {

struct OperatingCondition {
    double switching_freq = 100e3;  // Hz
    double load_level = 1.0;        // fraction of rated load, [0, 1]
    double temperature_c = 25.0;

    void validate() const;
};

enum class TraceLabel { benign, emi_spoof, tamper, impersonation };

const char* to_string(TraceLabel label);
TraceLabel trace_label_from_string(const std::string& s);

/// Hidden per-device parameters. Everything is a pure function of
/// (seed, variability): same inputs, same profile, bit for bit.
///
/// The sideband arrays model parasitic fine structure around each switching
/// harmonic (layout/process variation): one gain and one phase per comb line,
/// flattened harmonic-major. They are what makes a device's spectral
/// fingerprint rich enough to quantize into a full-length response.
struct DeviceProfile {
    int device_id = 0;
    std::uint64_t seed = 0;
    std::vector<double> harmonic_gains;          // one per harmonic, near 1.0
    std::vector<double> harmonic_phase_offsets;  // radians per harmonic
    double parasitic_jitter = 0.0;               // fractional frequency offset
    double noise_floor_gain = 1.0;
    std::vector<double> sideband_gains;   // near 1.0, [harmonic][comb line]
    std::vector<double> sideband_phases;  // radians, same layout
};

/// Generator defaults. sample_rate = 4 x (n_harmonics x 100 kHz) keeps every
/// modeled component under Nyquist with the required margin.
struct SynthConfig {
    double sample_rate = 2e6;
    std::size_t n_harmonics = 5;     // tones at k * switching_freq, A_k = A1/k
    double base_amplitude = 1.0;     // fundamental amplitude (volts) at load 1
    double gaussian_floor = 0.02;    // stddev of additive Gaussian noise
    double uniform_floor = 0.02;     // half-width of additive uniform noise
    double temperature_coeff = 0.001;  // per degC, applied to harmonic tones
    double jitter_max = 1e-4;          // |parasitic_jitter| upper bound

    // Parasitic sideband comb around each harmonic. Lines are anchored to
    // even multiples of sideband_grid_hz (2 bins of the default 4096-point
    // analysis grid), which makes their STFT measurements hop-synchronous.
    std::size_t sideband_half_count = 10;   // lines per side of each harmonic
    double sideband_grid_hz = 488.28125;    // 2 MHz / 4096
    double sideband_level = 0.04;           // amplitude relative to the tone
    double texture_spread_per_variability = 3.5;

    std::size_t min_samples = 4096;  // one analysis window

    void validate() const;
};

struct NoiseTrace {
    std::vector<float> samples;  // volts, normalized
    double sample_rate = 0.0;
    int device_id = 0;
    OperatingCondition condition;
    TraceLabel label = TraceLabel::benign;
    std::uint64_t seed = 0;  // rng seed the trace was synthesized with
};

struct AttackSpec {
    TraceLabel kind = TraceLabel::emi_spoof;
    double amplitude = 0.0;    // relative to benign RMS (emi_spoof)
    double freq_offset = 0.0;  // Hz (emi_spoof)
    double sigma = 0.0;        // volts (tamper)
    std::optional<DeviceProfile> rogue_profile;  // impersonation
};

/// Builds a device profile deterministically from (seed, variability).
/// variability must be in (0, 0.5]; harmonic gains are drawn uniformly in
/// [1-variability, 1+variability].
DeviceProfile make_device_profile(std::uint64_t seed, double variability,
                                  const SynthConfig& cfg = {});

/// Synthesizes one noise trace: harmonic tones + parasitic sidebands +
/// Gaussian and uniform noise. Pure function of its arguments.
/// load_level scales the fundamental tone linearly; temperature scales the
/// harmonic tones by (1 + temperature_coeff * (T - 25)).
NoiseTrace synthesize_trace(const DeviceProfile& profile, const OperatingCondition& cond,
                            double duration_s, std::uint64_t rng_seed,
                            const SynthConfig& cfg = {});

/// Adds amplitude * RMS(trace) * sin(2*pi*(f_sw + freq_offset)*t).
NoiseTrace inject_emi_spoof(const NoiseTrace& trace, const AttackSpec& spec);

/// Adds zero-mean Gaussian noise with stddev spec.sigma.
NoiseTrace inject_tamper(const NoiseTrace& trace, const AttackSpec& spec,
                         std::uint64_t rng_seed);

double rms(std::span<const float> samples);

/// Binary export: <path_base>.f32 (32-bit little-endian floats) plus a
/// <path_base>.json sidecar with sample_rate, device_id, condition, label, seed.
void write_trace(const NoiseTrace& trace, const std::string& path_base);
NoiseTrace read_trace(const std::string& path_base);

/// Optional CSV export for inspection (index,value).
void write_trace_csv(const NoiseTrace& trace, const std::string& path);

}  // namespace wbgsec
