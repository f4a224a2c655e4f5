// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 1-5, 7 and 9 come from the default reference
// scenario (10 devices, 5 challenges, 2000 mixed frames, 1000+1000
// authentication attempts); criterion 6 from the latency benchmark;
// criterion 8 from the independent mathematical oracles.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "wbgsec/bayes.hpp"
#include "wbgsec/detector.hpp"
#include "wbgsec/harness.hpp"
#include "wbgsec/puf.hpp"
#include "wbgsec/rng.hpp"
#include "wbgsec/spectral.hpp"

#include "oracles.hpp"

using namespace wbgsec;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s -- %s\n", pass ? "PASS" : "FAIL", criterion, name,
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- criterion 8: mathematical-core oracles ---------------------------------

bool oracle_stft(std::string& detail) {
    Rng rng(1001);
    double worst = 0.0;
    for (bool hann : {true, false}) {
        NoiseTrace tr;
        tr.sample_rate = 1e6;
        tr.samples.resize(256);
        for (auto& s : tr.samples) s = static_cast<float>(rng.uniform(-1.0, 1.0));
        StftConfig cfg;
        cfg.window_kind = hann ? WindowKind::hann : WindowKind::rect;
        cfg.window_len = cfg.hop = cfg.fft_len = 256;
        Spectrogram spec = stft(tr, cfg);
        std::vector<double> frame(tr.samples.begin(), tr.samples.end());
        std::vector<double> oracle = oracles::dft_frame_magnitudes(frame, hann, 256);
        double max_mag = 0.0;
        for (double v : oracle) max_mag = std::max(max_mag, v);
        for (std::size_t b = 0; b < oracle.size(); ++b)
            worst = std::max(worst, std::fabs(spec.magnitudes[0][b] - oracle[b]) / max_mag);
    }
    detail = fmt("stft vs naive DFT, max rel err %.2e (tol 1e-9)", worst);
    return worst < 1e-9;
}

bool oracle_pca(std::string& detail) {
    Rng rng(2002);
    std::vector<std::vector<double>> rows(50, std::vector<double>(8));
    for (auto& row : rows)
        for (std::size_t j = 0; j < 8; ++j)
            row[j] = rng.gaussian() / static_cast<double>(j + 1);
    PcaModel model = fit_pca(rows, 8);
    auto evals = oracles::jacobi_eigenvalues(oracles::sample_covariance(rows));
    double worst = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        worst = std::max(worst, std::fabs(model.explained_variance[i] - evals[i]));
    detail = fmt("explained variance vs Jacobi eigensolver, max abs err %.2e (tol 1e-8)", worst);
    return worst < 1e-8;
}

bool oracle_auc(std::string& detail) {
    Rng rng(3003);
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < 300; ++i) {
            scores.push_back(std::floor(rng.uniform(0.0, 25.0)));  // heavy ties
            labels.push_back(rng.uniform() < 0.35 ? 1 : 0);
        }
        labels[0] = 0;
        labels[1] = 1;
        worst = std::max(worst, std::fabs(roc_curve(scores, labels).auc -
                                          oracles::pair_count_auc(scores, labels)));
    }
    detail = fmt("trapezoid AUC vs pair counting, max abs err %.2e (tol 1e-12)", worst);
    return worst < 1e-12;
}

bool oracle_quantize(std::string& detail) {
    Rng rng(4004);
    std::size_t mismatches = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 64;
        std::vector<FeatureVector> calib(8);
        for (auto& f : calib) {
            f.values.resize(n);
            for (auto& v : f.values) v = rng.uniform();
        }
        CalibrationStats cal = calibrate(calib);
        PufConfig cfg;
        cfg.theta = rng.uniform(-1.0, 1.0);
        FeatureVector f;
        f.values.resize(n);
        for (auto& v : f.values) v = rng.uniform();
        PufResponse r = quantize(f, cal, cfg);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint8_t expected =
                f.values[i] > cal.mean[i] + cfg.theta * cal.stddev[i] ? 1 : 0;
            if (r.bits[i] != expected) ++mismatches;
        }
    }
    detail = fmt("quantize vs element-wise re-evaluation, %zu mismatches (tol 0)", mismatches);
    return mismatches == 0;
}

bool oracle_bayes(std::string& detail) {
    Rng rng(5005);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        LikelihoodModel lm;
        lm.benign_log_mean = rng.uniform(-10.0, 0.0);
        lm.benign_log_sigma = rng.uniform(0.2, 2.0);
        lm.anomalous_log_mean = rng.uniform(-5.0, 5.0);
        lm.anomalous_log_sigma = rng.uniform(0.2, 2.0);
        PosteriorState s;
        s.p_anomalous = rng.uniform(0.001, 0.999);
        s.prior_at_reset = rng.uniform(0.001, 0.999);
        s.forgetting = rng.uniform(0.5, 1.0);
        const double score = std::exp(rng.uniform(-12.0, 4.0));

        PosteriorState next = update(s, score, lm);
        // closed-form single step
        const double prior =
            s.forgetting * s.p_anomalous + (1.0 - s.forgetting) * s.prior_at_reset;
        const double l1 = std::max(lognormal_pdf(score, lm.anomalous_log_mean,
                                                 lm.anomalous_log_sigma),
                                   lm.floor);
        const double l0 =
            std::max(lognormal_pdf(score, lm.benign_log_mean, lm.benign_log_sigma), lm.floor);
        const double expected = prior * l1 / (prior * l1 + (1.0 - prior) * l0);
        worst = std::max(worst, std::fabs(next.p_anomalous - expected));
    }
    detail = fmt("posterior vs closed-form single step, max abs err %.2e (tol 1e-12)", worst);
    return worst < 1e-12;
}

}  // namespace

int main() {
    const auto t_start = std::chrono::steady_clock::now();

    ScenarioConfig cfg;  // reference-scenario defaults
    cfg.n_auth_genuine = 1000;
    cfg.n_auth_rogue = 1000;

    std::printf("running reference scenario (fleet %zu, %zu challenges, %zu frames)...\n",
                cfg.fleet_size, cfg.n_challenges, cfg.frames);
    auto t0 = std::chrono::steady_clock::now();
    ScenarioResult result = run_scenario(cfg);
    std::printf("scenario completed in %.1f s\n", seconds_since(t0));

    // 1. uniqueness in [45, 55] %
    {
        const double u = result.puf.uniqueness_pooled_mean;
        bool pass = u >= 45.0 && u <= 55.0;
        std::string per_challenge;
        for (const auto& [ch, v] : result.puf.uniqueness_per_challenge)
            per_challenge += fmt(" ch%d=%.2f", ch, v);
        report(1, "PUF uniqueness", pass,
               fmt("pooled mean %.2f%% in [45, 55] (%s )", u, per_challenge.c_str()));
    }

    // 2. reliability >= 95% for every device
    {
        double worst = 100.0;
        int worst_dev = -1;
        for (const auto& [dev, rel] : result.puf.reliability_per_device)
            if (rel < worst) {
                worst = rel;
                worst_dev = dev;
            }
        report(2, "PUF reliability", worst >= 95.0,
               fmt("worst device %d at %.2f%% over %zu repeats x %zu challenges (gate 95%%)",
                   worst_dev, worst, cfg.n_reliability_repeats, cfg.n_challenges));
    }

    // 3. randomness: monobit and block-frequency on the 640-bit fleet stream
    {
        const auto& fr = result.puf.fleet_randomness;
        const auto& mono = fr.test("monobit");
        const auto& block = fr.test("block_frequency");
        const auto& runs = fr.test("runs");
        report(3, "randomness", mono.pass && block.pass,
               fmt("monobit p=%.4f, block-frequency p=%.4f (gated at 0.01); runs p=%.4f "
                   "(reported, not gated)",
                   mono.p_value, block.p_value, runs.p_value));
    }

    // 4. detection quality: AUC >= 0.93 and per-attack F1 >= 0.90
    {
        const double auc = result.roc ? result.roc->auc : 0.0;
        bool pass = auc >= 0.93;
        std::string f1s;
        for (const char* kind : {"emi_spoof", "tamper", "impersonation"}) {
            auto it = result.detection_per_attack.find(kind);
            const double f1 =
                it == result.detection_per_attack.end() ? 0.0 : it->second.f1.value_or(0.0);
            pass = pass && f1 >= 0.90;
            f1s += fmt(" %s=%.3f", kind, f1);
        }
        report(4, "detection quality", pass,
               fmt("AUC %.4f (gate 0.93); F1%s (gate 0.90)", auc, f1s.c_str()));
    }

    // 5. baseline superiority by >= 5 percentage points
    {
        const double acc = result.detection_overall.accuracy.value_or(0.0);
        const double base = result.baseline_overall.accuracy.value_or(0.0);
        report(5, "baseline superiority", acc - base >= 0.05,
               fmt("proposed %.4f vs static-threshold baseline %.4f (margin %.1f pp, gate 5)",
                   acc, base, 100.0 * (acc - base)));
    }

    // 6. latency: p90 < 800 us on this host
    {
        auto t6 = std::chrono::steady_clock::now();
        LatencyReport bench = latency_bench(cfg, 500);
        report(6, "latency", bench.p90_us < 800.0,
               fmt("bench p90 %.1f us over 480 timed frames (gate 800); stream p90 %.1f us; "
                   "measured in %.1f s",
                   bench.p90_us, result.latency.p90_us, seconds_since(t6)));
    }

    // 7. impersonation rejection and genuine acceptance at 1000 attempts each
    {
        const double rr = result.auth.rogue_reject_rate();
        const double ga = result.auth.genuine_accept_rate();
        report(7, "authentication", rr >= 0.99 && ga >= 0.99,
               fmt("rogue rejected %.1f%% (%llu/%llu), genuine accepted %.1f%% (%llu/%llu), "
                   "gates 99%%",
                   100.0 * rr, static_cast<unsigned long long>(result.auth.rogue_rejected),
                   static_cast<unsigned long long>(result.auth.rogue_attempts), 100.0 * ga,
                   static_cast<unsigned long long>(result.auth.genuine_accepted),
                   static_cast<unsigned long long>(result.auth.genuine_attempts)));
    }

    // 8. oracle suites
    {
        std::string d1, d2, d3, d4, d5;
        const bool s1 = oracle_stft(d1);
        const bool s2 = oracle_pca(d2);
        const bool s3 = oracle_auc(d3);
        const bool s4 = oracle_quantize(d4);
        const bool s5 = oracle_bayes(d5);
        report(8, "oracle suites", s1 && s2 && s3 && s4 && s5,
               d1 + "; " + d2 + "; " + d3 + "; " + d4 + "; " + d5);
    }

    // 9. determinism: rerun from the echoed config, byte-identical sans latency
    {
        auto t9 = std::chrono::steady_clock::now();
        ScenarioConfig echoed = scenario_config_from_json(scenario_config_to_json(result.config));
        ScenarioResult replay = run_scenario(echoed);
        const std::string a = result.to_json(false).dump();
        const std::string b = replay.to_json(false).dump();
        report(9, "determinism", a == b,
               fmt("replay from echoed config %s (%zu-byte canonical reports, latency excluded), "
                   "%.1f s",
                   a == b ? "byte-identical" : "DIVERGED", a.size(), seconds_since(t9)));
    }

    std::printf("%d of 9 criteria passed in %.1f s total\n", 9 - g_failures,
                seconds_since(t_start));
    return g_failures == 0 ? 0 : 1;
}
