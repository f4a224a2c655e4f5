#include "wbgsec/spectral.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fft.hpp"
#include <nlohmann/json.hpp>

namespace wbgsec {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<double> make_window(WindowKind kind, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (kind == WindowKind::hann) {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n)));
    }
    return w;
}

}  // namespace

void StftConfig::validate() const {
    if (hop == 0) throw std::invalid_argument("StftConfig: hop must be >= 1");
    if (!(hop <= window_len && window_len <= fft_len))
        throw std::invalid_argument("StftConfig: need hop <= window_len <= fft_len");
    if (fft_len == 0 || (fft_len & (fft_len - 1)) != 0)
        throw std::invalid_argument("StftConfig: fft_len must be a power of two");
}

Spectrogram stft(const NoiseTrace& trace, const StftConfig& cfg) {
    cfg.validate();
    const std::size_t n = trace.samples.size();
    if (n < cfg.window_len) {
        std::ostringstream msg;
        msg << "stft: trace has " << n << " samples, window needs " << cfg.window_len;
        throw std::invalid_argument(msg.str());
    }

    const std::vector<double> window = make_window(cfg.window_kind, cfg.window_len);
    double window_sum = 0.0;
    for (double w : window) window_sum += w;
    const double scale = 2.0 / window_sum;

    const std::size_t n_frames = 1 + (n - cfg.window_len) / cfg.hop;
    const std::size_t n_bins = cfg.fft_len / 2 + 1;

    Spectrogram spec;
    spec.bin_hz = trace.sample_rate / static_cast<double>(cfg.fft_len);
    spec.scaling = "amplitude: |X_k| * 2 / sum(window)";
    spec.magnitudes.assign(n_frames, std::vector<double>(n_bins, 0.0));
    spec.frame_times.resize(n_frames);

    std::vector<std::complex<double>> buf(cfg.fft_len);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const std::size_t start = f * cfg.hop;
        for (std::size_t i = 0; i < cfg.window_len; ++i)
            buf[i] = {static_cast<double>(trace.samples[start + i]) * window[i], 0.0};
        for (std::size_t i = cfg.window_len; i < cfg.fft_len; ++i) buf[i] = {0.0, 0.0};
        detail::fft_inplace(buf);
        auto& row = spec.magnitudes[f];
        for (std::size_t b = 0; b < n_bins; ++b) row[b] = std::abs(buf[b]) * scale;
        spec.frame_times[f] =
            (static_cast<double>(start) + static_cast<double>(cfg.window_len) / 2.0) /
            trace.sample_rate;
    }
    return spec;
}

std::vector<double> time_average(const Spectrogram& spec) {
    if (spec.frames() == 0) return {};
    std::vector<double> avg(spec.bins(), 0.0);
    for (const auto& row : spec.magnitudes)
        for (std::size_t b = 0; b < avg.size(); ++b) avg[b] += row[b];
    for (double& v : avg) v /= static_cast<double>(spec.frames());
    return avg;
}

FeatureVector extract_features(const Spectrogram& spec, const std::vector<double>& harmonics,
                               double half_width, std::size_t n_per_band) {
    if (harmonics.empty()) throw std::invalid_argument("extract_features: no harmonics given");
    if (n_per_band < 1) throw std::invalid_argument("extract_features: n_per_band must be >= 1");
    if (half_width < 0.0) throw std::invalid_argument("extract_features: half_width must be >= 0");
    if (spec.bins() == 0) throw std::invalid_argument("extract_features: empty spectrogram");

    const std::vector<double> avg = time_average(spec);
    FeatureVector fv;
    fv.values.reserve(n_per_band * harmonics.size());
    fv.band_centers.reserve(n_per_band * harmonics.size());

    for (double h : harmonics) {
        const double lo_hz = h - half_width;
        const double hi_hz = h + half_width;
        if (lo_hz < 0.0 || hi_hz > spec.max_freq() + 1e-9) {
            std::ostringstream msg;
            msg << "extract_features: band around " << h << " Hz exceeds the spectrogram range [0, "
                << spec.max_freq() << "] Hz";
            throw std::invalid_argument(msg.str());
        }
        const auto lo = static_cast<std::size_t>(std::ceil(lo_hz / spec.bin_hz - 1e-9));
        const auto hi = static_cast<std::size_t>(std::floor(hi_hz / spec.bin_hz + 1e-9));
        const std::size_t count = hi - lo + 1;
        if (count < n_per_band) {
            std::ostringstream msg;
            msg << "extract_features: band around " << h << " Hz holds " << count
                << " bins, need " << n_per_band;
            throw std::invalid_argument(msg.str());
        }
        for (std::size_t j = 0; j < n_per_band; ++j) {
            std::size_t idx = lo;
            if (n_per_band > 1)
                idx = lo + static_cast<std::size_t>(std::llround(
                               static_cast<double>(j) * static_cast<double>(count - 1) /
                               static_cast<double>(n_per_band - 1)));
            fv.values.push_back(avg[idx]);
            fv.band_centers.push_back(static_cast<double>(idx) * spec.bin_hz);
        }
    }

    double total = 0.0;
    for (double v : fv.values) total += v;
    if (total > 0.0)
        for (double& v : fv.values) v /= total;
    return fv;
}

FeatureVector extract_features(const Spectrogram& spec, const FeatureConfig& cfg) {
    return extract_features(spec, cfg.harmonics, cfg.half_width, cfg.n_per_band);
}

void write_spectrogram_csv(const Spectrogram& spec, const std::string& path_base) {
    const std::string csv_path = path_base + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("write_spectrogram_csv: cannot open " + csv_path);
    for (const auto& row : spec.magnitudes) {
        for (std::size_t b = 0; b < row.size(); ++b) {
            if (b) csv << ",";
            csv << row[b];
        }
        csv << "\n";
    }

    nlohmann::json j;
    j["bin_hz"] = spec.bin_hz;
    j["frame_times"] = spec.frame_times;
    j["scaling"] = spec.scaling;
    const std::string json_path = path_base + ".json";
    std::ofstream side(json_path);
    if (!side) throw std::runtime_error("write_spectrogram_csv: cannot open " + json_path);
    side << j.dump(2) << "\n";
}

}  // namespace wbgsec
