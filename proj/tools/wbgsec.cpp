// Command-line surface: synthesize corpora, enroll devices, authenticate
// responses, run detection scenarios, benchmark latency, re-emit reports.
//
// Exit codes: 0 accept/pass, 1 reject/gate failure, 2 unknown identity,
// 3 operational error (bad config, I/O, ...).

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wbgsec/harness.hpp"
#include "wbgsec/mathstat.hpp"
#include "wbgsec/rng.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wbgsec;

namespace {

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitError = 3;

struct Gates {
    std::optional<double> auc_min;
    std::optional<double> per_attack_f1_min;
    std::optional<double> baseline_accuracy_margin;
    std::optional<double> uniqueness_min, uniqueness_max;
    std::optional<double> reliability_min;
    std::optional<double> genuine_accept_min, rogue_reject_min;
    std::optional<double> latency_p90_max_us;
    std::optional<bool> randomness_required;
};

struct RunConfig {
    ScenarioConfig scenario;
    std::string output_dir = "out";
    int verbosity = 1;
    Gates gates;
};

const std::map<std::string, std::string>& config_descriptions() {
    static const std::map<std::string, std::string> d = {
        {"scenario.fleet_size", "number of virtual devices (>= 2)"},
        {"scenario.n_challenges", "challenges per device (load/temperature ladder)"},
        {"scenario.n_calib_traces", "calibration traces per (device, challenge), >= 8"},
        {"scenario.measure_samples", "samples per enrollment/authentication trace"},
        {"scenario.frame_samples", "samples per detection frame (one STFT window)"},
        {"scenario.n_reliability_repeats", "repeat measurements per device per challenge"},
        {"scenario.n_train_frames", "benign frames per device for PCA training"},
        {"scenario.n_val_frames", "benign frames per device for score calibration"},
        {"scenario.n_attack_val_per_kind", "attack frames per device per kind for likelihood fit"},
        {"scenario.frames", "detection stream length"},
        {"scenario.rl_batch", "frames per RL reward batch"},
        {"scenario.episode_frames", "frames per benign/attack episode"},
        {"scenario.n_auth_genuine", "genuine authentication attempts"},
        {"scenario.n_auth_rogue", "rogue (impersonation) authentication attempts"},
        {"scenario.master_seed", "root seed; every other seed derives from it"},
        {"scenario.variability", "manufacturing variability fraction, (0, 0.5]"},
        {"scenario.detector_enabled", "run the PCA/RL/Bayes detection path"},
        {"scenario.bayes_enabled", "apply Bayesian consolidation (false: classifier only)"},
        {"scenario.attacks.emi_fraction", "fraction of stream frames under EMI spoofing"},
        {"scenario.attacks.tamper_fraction", "fraction of stream frames under tampering"},
        {"scenario.attacks.impersonation_fraction", "fraction of stream frames impersonated"},
        {"scenario.attacks.emi_amplitude", "EMI tone amplitude relative to benign RMS"},
        {"scenario.attacks.emi_freq_offset", "EMI tone offset from switching frequency, Hz"},
        {"scenario.attacks.tamper_sigma", "tamper Gaussian stddev, volts"},
        {"scenario.pipeline.synth.sample_rate", "simulator sample rate, Hz"},
        {"scenario.pipeline.synth.n_harmonics", "modeled switching harmonics"},
        {"scenario.pipeline.synth.base_amplitude", "fundamental amplitude at load 1, volts"},
        {"scenario.pipeline.synth.gaussian_floor", "Gaussian noise floor stddev, volts"},
        {"scenario.pipeline.synth.uniform_floor", "uniform noise half-width, volts"},
        {"scenario.pipeline.synth.temperature_coeff", "tone amplitude scaling per degC"},
        {"scenario.pipeline.synth.jitter_max", "max |fractional frequency offset| per device"},
        {"scenario.pipeline.synth.sideband_half_count", "parasitic sideband lines per side"},
        {"scenario.pipeline.synth.sideband_grid_hz", "sideband anchoring grid, Hz"},
        {"scenario.pipeline.synth.sideband_level", "sideband amplitude relative to its tone"},
        {"scenario.pipeline.synth.texture_spread_per_variability",
         "sideband gain spread = this * variability"},
        {"scenario.pipeline.synth.min_samples", "minimum trace length, samples"},
        {"scenario.pipeline.stft.window_kind", "hann or rect"},
        {"scenario.pipeline.stft.window_len", "STFT window length, samples"},
        {"scenario.pipeline.stft.hop", "STFT hop, samples"},
        {"scenario.pipeline.stft.fft_len", "FFT length (power of two)"},
        {"scenario.pipeline.features.harmonics", "band centers, Hz"},
        {"scenario.pipeline.features.half_width", "band half-width, Hz"},
        {"scenario.pipeline.features.n_per_band", "feature bins per band"},
        {"scenario.pipeline.puf.theta", "quantization sensitivity theta"},
        {"scenario.pipeline.puf.auth_threshold", "max fractional Hamming distance accepted"},
        {"scenario.pipeline.reward.alpha", "RL reward weight on true positives"},
        {"scenario.pipeline.reward.beta", "RL reward weight on false positives"},
        {"scenario.pipeline.bayes.decision_threshold", "posterior alert threshold"},
        {"scenario.pipeline.bayes.forgetting", "exponential forgetting factor lambda"},
        {"scenario.pipeline.bayes.initial_prior", "reset prior on anomaly"},
        {"scenario.pipeline.pca_k_max", "cap on retained principal components"},
        {"scenario.pipeline.pca_variance_target", "variance fraction the retained k must explain"},
        {"scenario.pipeline.rl_epsilon", "bandit exploration rate"},
        {"scenario.pipeline.rl_learning_rate", "bandit Q-value learning rate"},
        {"scenario.pipeline.rl_grid_points", "threshold grid size"},
        {"output_dir", "output directory (relative paths resolve under $WBGSEC_OUT)"},
        {"verbosity", "0 quiet, 1 normal"},
        {"gates.auc_min", "fail run when ROC AUC falls below this"},
        {"gates.per_attack_f1_min", "fail run when any attack F1 falls below this"},
        {"gates.baseline_accuracy_margin",
         "fail run when accuracy does not beat baseline by this"},
        {"gates.uniqueness_min", "fail run when pooled uniqueness % falls below this"},
        {"gates.uniqueness_max", "fail run when pooled uniqueness % exceeds this"},
        {"gates.reliability_min", "fail run when any device reliability % falls below this"},
        {"gates.genuine_accept_min", "fail run when genuine accept rate falls below this"},
        {"gates.rogue_reject_min", "fail run when rogue reject rate falls below this"},
        {"gates.latency_p90_max_us", "fail run when stream p90 latency exceeds this"},
        {"gates.randomness_required",
         "fail run unless fleet monobit and block-frequency tests pass"},
    };
    return d;
}

void flatten_keys(const json& j, const std::string& prefix, std::vector<std::string>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it.value().is_object())
            flatten_keys(it.value(), path, out);
        else
            out.push_back(path);
    }
}

std::string config_reference_text() {
    RunConfig def;
    json j;
    j["scenario"] = scenario_config_to_json(def.scenario);
    j["output_dir"] = def.output_dir;
    j["verbosity"] = def.verbosity;
    std::vector<std::string> paths;
    flatten_keys(j, "", paths);
    for (const auto& [key, _] : config_descriptions())
        if (key.rfind("gates.", 0) == 0) paths.push_back(key);

    std::string out = "Config file keys (JSON, // comments allowed; every key optional):\n";
    const auto& desc = config_descriptions();
    for (const auto& path : paths) {
        std::string def_str = "unset";
        if (path.rfind("gates.", 0) != 0) {
            const json* node = &j;
            std::string rest = path;
            bool ok = true;
            while (!rest.empty()) {
                auto dot = rest.find('.');
                std::string part = rest.substr(0, dot);
                rest = dot == std::string::npos ? "" : rest.substr(dot + 1);
                if (!node->contains(part)) {
                    ok = false;
                    break;
                }
                node = &node->at(part);
            }
            if (ok) def_str = node->dump();
        }
        auto d = desc.find(path);
        out += "  " + path + " = " + def_str + "\n      " +
               (d == desc.end() ? std::string("(undocumented)") : d->second) + "\n";
    }
    return out;
}

RunConfig load_run_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json j = json::parse(in, nullptr, true, /*ignore_comments=*/true);

    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key != "scenario" && key != "output_dir" && key != "verbosity" && key != "gates")
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (j.contains("scenario")) cfg.scenario = scenario_config_from_json(j["scenario"]);
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("verbosity")) cfg.verbosity = j["verbosity"].get<int>();
    if (j.contains("gates")) {
        const auto& g = j["gates"];
        for (auto it = g.begin(); it != g.end(); ++it)
            if (!config_descriptions().count("gates." + it.key()))
                throw std::invalid_argument("config: unknown key 'gates." + it.key() + "'");
        auto opt = [&](const char* key) -> std::optional<double> {
            if (!g.contains(key) || g.at(key).is_null()) return std::nullopt;
            return g.at(key).get<double>();
        };
        cfg.gates.auc_min = opt("auc_min");
        cfg.gates.per_attack_f1_min = opt("per_attack_f1_min");
        cfg.gates.baseline_accuracy_margin = opt("baseline_accuracy_margin");
        cfg.gates.uniqueness_min = opt("uniqueness_min");
        cfg.gates.uniqueness_max = opt("uniqueness_max");
        cfg.gates.reliability_min = opt("reliability_min");
        cfg.gates.genuine_accept_min = opt("genuine_accept_min");
        cfg.gates.rogue_reject_min = opt("rogue_reject_min");
        cfg.gates.latency_p90_max_us = opt("latency_p90_max_us");
        if (g.contains("randomness_required") && !g.at("randomness_required").is_null())
            cfg.gates.randomness_required = g.at("randomness_required").get<bool>();
    }
    return cfg;
}

std::string resolve_out(const std::string& path) {
    const char* root = std::getenv("WBGSEC_OUT");
    if (root != nullptr && *root != '\0' && !fs::path(path).is_absolute())
        return (fs::path(root) / path).string();
    return path;
}

std::vector<std::string> check_gates(const Gates& g, const ScenarioResult& r) {
    std::vector<std::string> failures;
    char buf[160];
    auto fail = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        failures.emplace_back(buf);
    };

    if (g.auc_min) {
        const double auc = r.roc ? r.roc->auc : 0.0;
        if (!(auc >= *g.auc_min)) fail("auc %.4f < %.4f", auc, *g.auc_min);
    }
    if (g.per_attack_f1_min) {
        for (const auto& [kind, m] : r.detection_per_attack) {
            const double f1 = m.f1.value_or(0.0);
            if (!(f1 >= *g.per_attack_f1_min))
                fail("%s f1 %.4f < %.4f", kind.c_str(), f1, *g.per_attack_f1_min);
        }
    }
    if (g.baseline_accuracy_margin) {
        const double acc = r.detection_overall.accuracy.value_or(0.0);
        const double base = r.baseline_overall.accuracy.value_or(0.0);
        if (!(acc - base >= *g.baseline_accuracy_margin))
            fail("accuracy %.4f does not beat baseline %.4f by %.4f", acc, base,
                 *g.baseline_accuracy_margin);
    }
    if (g.uniqueness_min && !(r.puf.uniqueness_pooled_mean >= *g.uniqueness_min))
        fail("uniqueness %.2f%% < %.2f%%", r.puf.uniqueness_pooled_mean, *g.uniqueness_min);
    if (g.uniqueness_max && !(r.puf.uniqueness_pooled_mean <= *g.uniqueness_max))
        fail("uniqueness %.2f%% > %.2f%%", r.puf.uniqueness_pooled_mean, *g.uniqueness_max);
    if (g.reliability_min) {
        for (const auto& [dev, rel] : r.puf.reliability_per_device)
            if (!(rel >= *g.reliability_min))
                fail("device %d reliability %.2f%% < %.2f%%", dev, rel, *g.reliability_min);
    }
    if (g.genuine_accept_min && !(r.auth.genuine_accept_rate() >= *g.genuine_accept_min))
        fail("genuine accept rate %.4f < %.4f", r.auth.genuine_accept_rate(),
             *g.genuine_accept_min);
    if (g.rogue_reject_min && !(r.auth.rogue_reject_rate() >= *g.rogue_reject_min))
        fail("rogue reject rate %.4f < %.4f", r.auth.rogue_reject_rate(), *g.rogue_reject_min);
    if (g.latency_p90_max_us && !(r.latency.p90_us < *g.latency_p90_max_us))
        fail("latency p90 %.1f us >= %.1f us", r.latency.p90_us, *g.latency_p90_max_us);
    if (g.randomness_required && *g.randomness_required) {
        const auto& fr = r.puf.fleet_randomness;
        if (!fr.test("monobit").pass || !fr.test("block_frequency").pass)
            failures.emplace_back("fleet randomness: monobit/block-frequency below alpha=0.01");
    }
    return failures;
}

void print_summary(const ScenarioResult& r) {
    std::printf("== PUF ==\n");
    std::printf("uniqueness (pooled mean): %.2f%%\n", r.puf.uniqueness_pooled_mean);
    if (!r.puf.reliability_per_device.empty()) {
        double worst = 100.0;
        for (const auto& [d, rel] : r.puf.reliability_per_device) worst = std::min(worst, rel);
        std::printf("reliability (worst device): %.2f%%\n", worst);
    }
    for (const auto& t : r.puf.fleet_randomness.tests)
        std::printf("fleet randomness %-16s p=%.4f %s\n", t.name.c_str(), t.p_value,
                    t.pass ? "pass" : "FAIL");
    std::printf("auth: genuine accept %.2f%% (%llu/%llu), rogue reject %.2f%% (%llu/%llu)\n",
                100.0 * r.auth.genuine_accept_rate(),
                static_cast<unsigned long long>(r.auth.genuine_accepted),
                static_cast<unsigned long long>(r.auth.genuine_attempts),
                100.0 * r.auth.rogue_reject_rate(),
                static_cast<unsigned long long>(r.auth.rogue_rejected),
                static_cast<unsigned long long>(r.auth.rogue_attempts));
    if (!r.detection_per_attack.empty()) std::printf("== Detection ==\n");
    auto num = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };
    for (const auto& [kind, m] : r.detection_per_attack)
        std::printf("%-14s precision=%.3f recall=%.3f f1=%.3f\n", kind.c_str(), num(m.precision),
                    num(m.recall), num(m.f1));
    if (r.detection_overall.counts.total() > 0)
        std::printf("proposed accuracy=%.4f fpr=%.4f | baseline accuracy=%.4f fpr=%.4f\n",
                    num(r.detection_overall.accuracy), num(r.detection_overall.fpr),
                    num(r.baseline_overall.accuracy), num(r.baseline_overall.fpr));
    if (r.roc) std::printf("roc auc=%.4f (%zu points)\n", r.roc->auc, r.roc->points.size());
    if (r.latency.n > 0)
        std::printf("latency: p50=%.1fus p90=%.1fus p99=%.1fus (n=%zu)\n", r.latency.p50_us,
                    r.latency.p90_us, r.latency.p99_us, r.latency.n);
}

// --- synth ------------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, const std::string& out_dir, bool csv, bool spectrogram) {
    const auto& sc = cfg.scenario;
    // A corpus can hold a single device; the >= 2 fleet floor only applies to
    // scenario runs (uniqueness needs pairs).
    sc.pipeline.synth.validate();
    sc.pipeline.stft.validate();
    if (sc.fleet_size < 1) throw std::invalid_argument("synth: fleet_size must be >= 1");
    if (sc.n_challenges < 1) throw std::invalid_argument("synth: n_challenges must be >= 1");
    std::vector<DeviceProfile> fleet = make_fleet(sc);
    std::vector<Challenge> challenges = make_challenges(sc.n_challenges);
    const double duration =
        static_cast<double>(sc.measure_samples) / sc.pipeline.synth.sample_rate;

    char name[64];
    for (const auto& dev : fleet) {
        std::size_t written = 0;
        for (const auto& ch : challenges) {
            std::snprintf(name, sizeof name, "device_%03d/challenge_%02d", dev.device_id,
                          ch.challenge_id);
            const fs::path dir = fs::path(out_dir) / name;
            fs::create_directories(dir);
            for (std::size_t t = 0; t < sc.n_calib_traces; ++t) {
                NoiseTrace tr = synthesize_trace(dev, ch.condition, duration,
                                                 calib_trace_seed(dev.seed, ch.challenge_id, t),
                                                 sc.pipeline.synth);
                std::snprintf(name, sizeof name, "calib_%03zu", t);
                write_trace(tr, (dir / name).string());
                if (csv) write_trace_csv(tr, (dir / (std::string(name) + ".csv")).string());
                ++written;
            }
            NoiseTrace probe = synthesize_trace(dev, ch.condition, duration,
                                                probe_trace_seed(dev.seed, ch.challenge_id, 0),
                                                sc.pipeline.synth);
            write_trace(probe, (dir / "probe_000").string());
            if (csv) write_trace_csv(probe, (dir / "probe_000.csv").string());
            ++written;
        }
        if (spectrogram) {
            NoiseTrace tr = synthesize_trace(dev, challenges[0].condition, duration,
                                             calib_trace_seed(dev.seed, 0, 0), sc.pipeline.synth);
            std::snprintf(name, sizeof name, "device_%03d/spectrogram", dev.device_id);
            write_spectrogram_csv(stft(tr, sc.pipeline.stft), (fs::path(out_dir) / name).string());
        }
        if (cfg.verbosity > 0) {
            NoiseTrace first = synthesize_trace(dev, challenges[0].condition, duration,
                                                calib_trace_seed(dev.seed, 0, 0),
                                                sc.pipeline.synth);
            std::printf("device %3d  seed=%llu  traces=%zu  rms=%.4f V\n", dev.device_id,
                        static_cast<unsigned long long>(dev.seed), written, rms(first.samples));
        }
    }
    if (cfg.verbosity > 0)
        std::printf("wrote corpus for %zu devices x %zu challenges under %s\n", fleet.size(),
                    challenges.size(), out_dir.c_str());
    return kExitAccept;
}

// --- enroll -----------------------------------------------------------------

int cmd_enroll(const RunConfig& cfg, const std::string& trace_dir, const std::string& out_db) {
    if (!fs::is_directory(trace_dir))
        throw std::runtime_error("trace directory not found: " + trace_dir);

    const auto& p = cfg.scenario.pipeline;
    std::map<std::pair<int, int>, std::vector<FeatureVector>> features;
    std::map<int, OperatingCondition> conditions;

    std::vector<fs::path> device_dirs;
    for (const auto& e : fs::directory_iterator(trace_dir))
        if (e.is_directory() && e.path().filename().string().rfind("device_", 0) == 0)
            device_dirs.push_back(e.path());
    std::sort(device_dirs.begin(), device_dirs.end());
    if (device_dirs.empty())
        throw std::runtime_error("no device_* directories under " + trace_dir);

    for (const auto& dev_dir : device_dirs) {
        std::vector<fs::path> challenge_dirs;
        for (const auto& e : fs::directory_iterator(dev_dir))
            if (e.is_directory() && e.path().filename().string().rfind("challenge_", 0) == 0)
                challenge_dirs.push_back(e.path());
        std::sort(challenge_dirs.begin(), challenge_dirs.end());
        for (const auto& ch_dir : challenge_dirs) {
            const int challenge_id = std::stoi(ch_dir.filename().string().substr(10));
            std::vector<fs::path> calibs;
            for (const auto& e : fs::directory_iterator(ch_dir)) {
                const std::string fn = e.path().filename().string();
                if (fn.rfind("calib_", 0) == 0 && e.path().extension() == ".json")
                    calibs.push_back(e.path());
            }
            std::sort(calibs.begin(), calibs.end());
            for (const auto& sidecar : calibs) {
                std::string base = sidecar.string();
                base.erase(base.size() - 5);  // drop ".json"
                NoiseTrace tr = read_trace(base);
                conditions.emplace(challenge_id, tr.condition);
                features[{tr.device_id, challenge_id}].push_back(
                    extract_features(stft(tr, p.stft), p.features));
            }
        }
    }

    CrpDatabase db = enroll_from_features(features, conditions, p.puf);
    db.save(out_db);
    if (cfg.verbosity > 0)
        std::printf("enrolled %zu records -> %s\n", db.records.size(), out_db.c_str());
    return kExitAccept;
}

// --- auth -------------------------------------------------------------------

int cmd_auth(const RunConfig& cfg, const std::string& db_path, int device_id, int challenge_id,
             std::string trace_path) {
    CrpDatabase db = CrpDatabase::load(db_path);
    for (const char* suffix : {".f32", ".json"}) {
        const std::size_t len = std::strlen(suffix);
        if (trace_path.size() > len && trace_path.rfind(suffix) == trace_path.size() - len)
            trace_path.erase(trace_path.size() - len);
    }
    NoiseTrace tr = read_trace(trace_path);

    const CrpRecord* rec = db.find(device_id, challenge_id);
    if (rec == nullptr) {
        std::printf("unknown_identity device=%d challenge=%d\n", device_id, challenge_id);
        return kExitUnknown;
    }
    FeatureVector f = extract_features(stft(tr, cfg.scenario.pipeline.stft),
                                       cfg.scenario.pipeline.features);
    PufResponse resp = quantize(f, rec->calibration, cfg.scenario.pipeline.puf);
    Challenge challenge{challenge_id, rec->challenge.condition};
    AuthDecision decision =
        authenticate(device_id, challenge, resp, db, cfg.scenario.pipeline.puf);
    std::printf("%s device=%d challenge=%d distance=%.4f threshold=%.4f\n", to_string(decision),
                device_id, challenge_id, fractional_hamming(resp, rec->reference),
                cfg.scenario.pipeline.puf.auth_threshold);
    switch (decision) {
        case AuthDecision::accept: return kExitAccept;
        case AuthDecision::reject: return kExitReject;
        case AuthDecision::unknown_identity: return kExitUnknown;
    }
    return kExitError;
}

// --- detect / bench / report --------------------------------------------------

int cmd_detect(RunConfig cfg, const std::string& out_dir, bool disable_bayes) {
    if (disable_bayes) cfg.scenario.bayes_enabled = false;
    ScenarioResult result = run_scenario(cfg.scenario);
    emit_report(result, out_dir);
    if (cfg.verbosity > 0) {
        print_summary(result);
        std::printf("report written to %s\n", out_dir.c_str());
    }
    const auto failures = check_gates(cfg.gates, result);
    for (const auto& f : failures) std::fprintf(stderr, "gate failed: %s\n", f.c_str());
    return failures.empty() ? kExitAccept : kExitReject;
}

int cmd_bench(const RunConfig& cfg, std::size_t frames, const std::string& out_file) {
    LatencyReport full = latency_bench(cfg.scenario, frames, false);
    LatencyReport empty = latency_bench(cfg.scenario, frames, true);
    const double overhead_pct = 100.0 * empty.p50_us / full.p50_us;
    std::printf("pipeline latency over %zu frames (warm-up excluded):\n", frames);
    std::printf("p50=%.1fus p90=%.1fus p99=%.1fus, harness overhead %.2f%% of median\n",
                full.p50_us, full.p90_us, full.p99_us, overhead_pct);
    if (!out_file.empty()) {
        json j;
        j["n_frames"] = frames;
        j["p50_us"] = full.p50_us;
        j["p90_us"] = full.p90_us;
        j["p99_us"] = full.p99_us;
        j["overhead_pct_of_median"] = overhead_pct;
        j["per_frame_us"] = full.per_frame_us;
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("cannot open " + out_file);
        out << j.dump(2) << "\n";
        std::printf("latency report written to %s\n", out_file.c_str());
    }
    return kExitAccept;
}

int cmd_report(const RunConfig& cfg, const std::string& in_file, const std::string& out_dir) {
    std::ifstream in(in_file);
    if (!in) throw std::runtime_error("cannot open " + in_file);
    ScenarioResult result = ScenarioResult::from_json(json::parse(in));
    emit_report(result, out_dir);
    if (cfg.verbosity > 0) {
        print_summary(result);
        std::printf("artifacts re-emitted to %s\n", out_dir.c_str());
    }
    return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WBG switching-noise PUF and anomaly-detection simulator"};
    app.require_subcommand(1);
    app.footer(config_reference_text());

    std::string config_path, out_path, traces_path, db_path, trace_file, in_file;
    bool csv = false, spectrogram = false, disable_bayes = false;
    int device_id = 0, challenge_id = 0;
    std::size_t frames = 500;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> fleet_override;

    auto* synth = app.add_subcommand("synth", "synthesize a fleet trace corpus");
    synth->add_option("--config,-c", config_path, "run config file (JSON)");
    synth->add_option("--out,-o", out_path, "output directory")->required();
    synth->add_option("--seed", seed_override, "override scenario.master_seed");
    synth->add_option("--fleet-size", fleet_override, "override scenario.fleet_size");
    synth->add_flag("--csv", csv, "also write CSV per trace");
    synth->add_flag("--spectrogram", spectrogram, "write per-device spectrogram CSV");

    auto* enroll = app.add_subcommand("enroll", "build a CRP database from a trace corpus");
    enroll->add_option("--config,-c", config_path, "run config file (JSON)");
    enroll->add_option("--traces,-t", traces_path, "trace corpus directory (from synth)")
        ->required();
    enroll->add_option("--out,-o", out_path, "output CRP database path")->required();

    auto* auth = app.add_subcommand("auth", "authenticate a trace against the CRP database");
    auth->add_option("--config,-c", config_path, "run config file (JSON)");
    auth->add_option("--db", db_path, "CRP database path")->required();
    auth->add_option("--device,-d", device_id, "claimed device id")->required();
    auth->add_option("--challenge", challenge_id, "challenge id")->required();
    auth->add_option("--trace", trace_file, "trace path (base or .f32/.json)")->required();

    auto* detect = app.add_subcommand("detect", "run the full detection scenario");
    detect->add_option("--config,-c", config_path, "run config file (JSON)");
    detect->add_option("--out,-o", out_path, "report output directory");
    detect->add_flag("--disable-bayes", disable_bayes, "classifier-only decisions");

    auto* bench = app.add_subcommand("bench", "benchmark per-frame pipeline latency");
    bench->add_option("--config,-c", config_path, "run config file (JSON)");
    bench->add_option("--frames,-n", frames, "frames to time (>= 100)");
    bench->add_option("--out,-o", out_path, "also write a latency JSON report");

    auto* report = app.add_subcommand("report", "re-emit CSV artifacts from a report.json");
    report->add_option("--config,-c", config_path, "run config file (JSON)");
    report->add_option("--in,-i", in_file, "existing report.json")->required();
    report->add_option("--out,-o", out_path, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_run_config(config_path);
        if (seed_override) cfg.scenario.master_seed = *seed_override;
        if (fleet_override) cfg.scenario.fleet_size = *fleet_override;

        if (synth->parsed()) return cmd_synth(cfg, resolve_out(out_path), csv, spectrogram);
        if (enroll->parsed()) return cmd_enroll(cfg, traces_path, resolve_out(out_path));
        if (auth->parsed()) return cmd_auth(cfg, db_path, device_id, challenge_id, trace_file);
        if (detect->parsed())
            return cmd_detect(cfg, resolve_out(out_path.empty() ? cfg.output_dir : out_path),
                              disable_bayes);
        if (bench->parsed())
            return cmd_bench(cfg, frames, out_path.empty() ? "" : resolve_out(out_path));
        if (report->parsed()) return cmd_report(cfg, in_file, resolve_out(out_path));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
