#include "wbgsec/puf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wbgsec/mathstat.hpp"
#include "wbgsec/rng.hpp"
#include <nlohmann/json.hpp>

namespace wbgsec {

void PufConfig::validate() const {
    if (!(auth_threshold >= 0.0 && auth_threshold < 0.5))
        throw std::invalid_argument("PufConfig: auth_threshold must be in [0, 0.5)");
    if (!std::isfinite(theta)) throw std::invalid_argument("PufConfig: theta must be finite");
}

std::size_t PufResponse::popcount() const {
    std::size_t c = 0;
    for (auto b : bits) c += (b != 0);
    return c;
}

std::string PufResponse::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned nibble = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            nibble <<= 1;
            if (i + j < bits.size() && bits[i + j]) nibble |= 1;
        }
        out.push_back(digits[nibble]);
    }
    return out;
}

PufResponse PufResponse::from_hex(const std::string& hex, std::size_t n_bits) {
    if (hex.size() * 4 < n_bits)
        throw std::invalid_argument("PufResponse::from_hex: hex string too short");
    PufResponse r;
    r.bits.resize(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) {
        char c = hex[i / 4];
        unsigned nibble;
        if (c >= '0' && c <= '9') nibble = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f') nibble = static_cast<unsigned>(c - 'a') + 10;
        else if (c >= 'A' && c <= 'F') nibble = static_cast<unsigned>(c - 'A') + 10;
        else throw std::invalid_argument("PufResponse::from_hex: invalid hex digit");
        r.bits[i] = static_cast<std::uint8_t>((nibble >> (3 - i % 4)) & 1u);
    }
    return r;
}

const char* to_string(AuthDecision d) {
    switch (d) {
        case AuthDecision::accept: return "accept";
        case AuthDecision::reject: return "reject";
        case AuthDecision::unknown_identity: return "unknown_identity";
    }
    return "reject";
}

CalibrationStats calibrate(const std::vector<FeatureVector>& features) {
    if (features.size() < 2)
        throw std::invalid_argument("calibrate: need at least 2 feature vectors");
    const std::size_t n = features[0].size();
    for (const auto& f : features)
        if (f.size() != n) throw std::invalid_argument("calibrate: feature length mismatch");

    CalibrationStats cal;
    cal.n_samples = features.size();
    cal.mean.assign(n, 0.0);
    cal.stddev.assign(n, 0.0);
    for (const auto& f : features)
        for (std::size_t i = 0; i < n; ++i) cal.mean[i] += f.values[i];
    for (double& m : cal.mean) m /= static_cast<double>(features.size());
    for (const auto& f : features)
        for (std::size_t i = 0; i < n; ++i) {
            double d = f.values[i] - cal.mean[i];
            cal.stddev[i] += d * d;
        }
    for (double& s : cal.stddev)
        s = std::sqrt(s / static_cast<double>(features.size() - 1));
    return cal;
}

PufResponse quantize(const FeatureVector& f, const CalibrationStats& cal, const PufConfig& cfg) {
    cfg.validate();
    if (f.size() != cal.mean.size() || cal.mean.size() != cal.stddev.size())
        throw std::invalid_argument("quantize: feature/calibration length mismatch");
    PufResponse r;
    r.bits.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        r.bits[i] = f.values[i] > cal.mean[i] + cfg.theta * cal.stddev[i] ? 1 : 0;
    return r;
}

double fractional_hamming(const PufResponse& a, const PufResponse& b) {
    if (a.size() != b.size() || a.size() == 0)
        throw std::invalid_argument("fractional_hamming: responses must be same nonzero length");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += (a.bits[i] != b.bits[i]);
    return static_cast<double>(diff) / static_cast<double>(a.size());
}

AuthDecision authenticate(int claimed_device_id, const Challenge& challenge,
                          const PufResponse& response, const CrpDatabase& db,
                          const PufConfig& cfg) {
    cfg.validate();
    const CrpRecord* record = db.find(claimed_device_id, challenge.challenge_id);
    if (record == nullptr) return AuthDecision::unknown_identity;
    if (response.size() != record->reference.size())
        throw std::invalid_argument("authenticate: response length does not match stored reference");
    return fractional_hamming(response, record->reference) <= cfg.auth_threshold
               ? AuthDecision::accept
               : AuthDecision::reject;
}

double shannon_entropy(const PufResponse& r) {
    if (r.size() == 0) throw std::invalid_argument("shannon_entropy: empty response");
    double p1 = static_cast<double>(r.popcount()) / static_cast<double>(r.size());
    double h = 0.0;
    if (p1 > 0.0) h -= p1 * std::log2(p1);
    if (p1 < 1.0) h -= (1.0 - p1) * std::log2(1.0 - p1);
    return h;
}

double uniqueness_percent(const std::map<int, PufResponse>& responses) {
    if (responses.size() < 2)
        throw std::invalid_argument("uniqueness_percent: need at least 2 devices");
    double acc = 0.0;
    std::size_t pairs = 0;
    for (auto a = responses.begin(); a != responses.end(); ++a)
        for (auto b = std::next(a); b != responses.end(); ++b) {
            acc += fractional_hamming(a->second, b->second);
            ++pairs;
        }
    return 100.0 * acc / static_cast<double>(pairs);
}

double reliability_percent(const std::vector<PufResponse>& repeats, const PufResponse& reference) {
    if (repeats.empty()) throw std::invalid_argument("reliability_percent: need >= 1 repeat");
    double acc = 0.0;
    for (const auto& r : repeats) acc += fractional_hamming(r, reference);
    return 100.0 * (1.0 - acc / static_cast<double>(repeats.size()));
}

double uniformity_percent(const PufResponse& r) {
    if (r.size() == 0) throw std::invalid_argument("uniformity_percent: empty response");
    return 100.0 * static_cast<double>(r.popcount()) / static_cast<double>(r.size());
}

const RandomnessTestResult& RandomnessReport::test(const std::string& name) const {
    for (const auto& t : tests)
        if (t.name == name) return t;
    throw std::out_of_range("RandomnessReport: no test named " + name);
}

namespace {

double monobit_p(const std::vector<std::uint8_t>& bits) {
    double s = 0.0;
    for (auto b : bits) s += b ? 1.0 : -1.0;
    double s_obs = std::fabs(s) / std::sqrt(static_cast<double>(bits.size()));
    return std::erfc(s_obs / std::sqrt(2.0));
}

double block_frequency_p(const std::vector<std::uint8_t>& bits, std::size_t block_len) {
    const std::size_t n_blocks = bits.size() / block_len;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n_blocks; ++i) {
        double ones = 0.0;
        for (std::size_t j = 0; j < block_len; ++j) ones += bits[i * block_len + j];
        double pi = ones / static_cast<double>(block_len);
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * static_cast<double>(block_len);
    return regularized_gamma_q(static_cast<double>(n_blocks) / 2.0, chi2 / 2.0);
}

double runs_p(const std::vector<std::uint8_t>& bits) {
    const auto n = static_cast<double>(bits.size());
    double ones = 0.0;
    for (auto b : bits) ones += (b != 0);
    const double pi = ones / n;
    // NIST prerequisite: the runs statistic is meaningless under heavy bias.
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(n)) return 0.0;
    double v_obs = 1.0;
    for (std::size_t i = 0; i + 1 < bits.size(); ++i) v_obs += (bits[i] != bits[i + 1]);
    const double prod = pi * (1.0 - pi);
    const double arg = std::fabs(v_obs - 2.0 * n * prod) / (2.0 * std::sqrt(2.0 * n) * prod);
    return std::erfc(arg);
}

}  // namespace

RandomnessReport randomness_tests(const std::vector<std::uint8_t>& bitstream,
                                  std::size_t min_len) {
    if (bitstream.size() < min_len) {
        std::ostringstream msg;
        msg << "randomness_tests: stream has " << bitstream.size() << " bits, minimum is "
            << min_len;
        throw std::invalid_argument(msg.str());
    }
    const double alpha = 0.01;
    RandomnessReport report;
    auto add = [&](const std::string& name, double p) {
        report.tests.push_back({name, p, p >= alpha});
    };
    add("monobit", monobit_p(bitstream));
    add("block_frequency", block_frequency_p(bitstream, kBlockFrequencyBlockLen));
    add("runs", runs_p(bitstream));
    report.overall_pass = true;
    for (const auto& t : report.tests) report.overall_pass = report.overall_pass && t.pass;
    return report;
}

void CrpDatabase::insert(CrpRecord record) {
    auto key = std::make_pair(record.device_id, record.challenge.challenge_id);
    if (records.count(key))
        throw std::invalid_argument("CrpDatabase: duplicate (device, challenge) key");
    records.emplace(key, std::move(record));
}

const CrpRecord* CrpDatabase::find(int device_id, int challenge_id) const {
    auto it = records.find({device_id, challenge_id});
    return it == records.end() ? nullptr : &it->second;
}

std::string CrpDatabase::to_json_string() const {
    nlohmann::json j;
    j["version"] = version;
    j["created_at"] = created_at;
    auto recs = nlohmann::json::array();
    for (const auto& [key, r] : records) {
        nlohmann::json rec;
        rec["device_id"] = r.device_id;
        rec["challenge"] = {{"challenge_id", r.challenge.challenge_id},
                            {"condition",
                             {{"switching_freq", r.challenge.condition.switching_freq},
                              {"load_level", r.challenge.condition.load_level},
                              {"temperature_c", r.challenge.condition.temperature_c}}}};
        rec["calibration"] = {{"mean", r.calibration.mean},
                              {"stddev", r.calibration.stddev},
                              {"n_samples", r.calibration.n_samples}};
        rec["reference_hex"] = r.reference.to_hex();
        rec["n_bits"] = r.reference.size();
        recs.push_back(std::move(rec));
    }
    j["records"] = std::move(recs);
    return j.dump(2) + "\n";
}

CrpDatabase CrpDatabase::from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    CrpDatabase db;
    db.version = j.at("version").get<std::string>();
    db.created_at = j.at("created_at").get<std::string>();
    for (const auto& rec : j.at("records")) {
        CrpRecord r;
        r.device_id = rec.at("device_id").get<int>();
        r.challenge.challenge_id = rec.at("challenge").at("challenge_id").get<int>();
        const auto& cond = rec.at("challenge").at("condition");
        r.challenge.condition.switching_freq = cond.at("switching_freq").get<double>();
        r.challenge.condition.load_level = cond.at("load_level").get<double>();
        r.challenge.condition.temperature_c = cond.at("temperature_c").get<double>();
        r.calibration.mean = rec.at("calibration").at("mean").get<std::vector<double>>();
        r.calibration.stddev = rec.at("calibration").at("stddev").get<std::vector<double>>();
        r.calibration.n_samples = rec.at("calibration").at("n_samples").get<std::size_t>();
        r.reference = PufResponse::from_hex(rec.at("reference_hex").get<std::string>(),
                                            rec.at("n_bits").get<std::size_t>());
        db.insert(std::move(r));
    }
    return db;
}

void CrpDatabase::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("CrpDatabase::save: cannot open " + path);
    out << to_json_string();
    if (!out) throw std::runtime_error("CrpDatabase::save: write failed for " + path);
}

CrpDatabase CrpDatabase::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("CrpDatabase::load: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

FeatureVector measure_features(const DeviceProfile& profile, const OperatingCondition& cond,
                               std::uint64_t rng_seed, const PufPipelineConfig& cfg) {
    NoiseTrace trace =
        synthesize_trace(profile, cond, cfg.measure_duration(), rng_seed, cfg.synth);
    return extract_features(stft(trace, cfg.stft), cfg.features);
}

PufResponse measure_response(const DeviceProfile& profile, const OperatingCondition& cond,
                             std::uint64_t rng_seed, const PufPipelineConfig& cfg,
                             const CalibrationStats& cal) {
    return quantize(measure_features(profile, cond, rng_seed, cfg), cal, cfg.puf);
}

std::uint64_t calib_trace_seed(std::uint64_t device_seed, int challenge_id, std::size_t index) {
    return Rng::derive(Rng::derive(device_seed, 0xCA000000ull + static_cast<std::uint64_t>(challenge_id)),
                       index);
}

std::uint64_t probe_trace_seed(std::uint64_t device_seed, int challenge_id, std::size_t index) {
    return Rng::derive(Rng::derive(device_seed, 0x9B000000ull + static_cast<std::uint64_t>(challenge_id)),
                       index);
}

namespace {

std::vector<FeatureVector> calib_features(const DeviceProfile& profile, const Challenge& challenge,
                                          const PufPipelineConfig& cfg) {
    std::vector<FeatureVector> feats;
    feats.reserve(cfg.n_calib_traces);
    for (std::size_t t = 0; t < cfg.n_calib_traces; ++t)
        feats.push_back(measure_features(profile, challenge.condition,
                                         calib_trace_seed(profile.seed, challenge.challenge_id, t),
                                         cfg));
    return feats;
}

FeatureVector mean_feature(const std::vector<FeatureVector>& feats) {
    FeatureVector m = feats.front();
    for (std::size_t i = 1; i < feats.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) m.values[j] += feats[i].values[j];
    for (double& v : m.values) v /= static_cast<double>(feats.size());
    return m;
}

void check_enroll_pre(const std::vector<Challenge>& challenges, const PufPipelineConfig& cfg) {
    if (cfg.n_calib_traces < 8)
        throw std::invalid_argument("enroll: n_calib_traces must be >= 8");
    if (challenges.empty()) throw std::invalid_argument("enroll: no challenges given");
    for (std::size_t i = 0; i < challenges.size(); ++i)
        for (std::size_t j = i + 1; j < challenges.size(); ++j)
            if (challenges[i].challenge_id == challenges[j].challenge_id)
                throw std::invalid_argument("enroll: duplicate challenge_id");
}

}  // namespace

std::vector<CrpRecord> enroll_device(const DeviceProfile& profile,
                                     const std::vector<Challenge>& challenges,
                                     const std::vector<CalibrationStats>& stats_per_challenge,
                                     const PufPipelineConfig& cfg) {
    check_enroll_pre(challenges, cfg);
    if (stats_per_challenge.size() != challenges.size())
        throw std::invalid_argument("enroll_device: one CalibrationStats required per challenge");

    std::vector<CrpRecord> records;
    records.reserve(challenges.size());
    for (std::size_t c = 0; c < challenges.size(); ++c) {
        auto feats = calib_features(profile, challenges[c], cfg);
        CrpRecord rec;
        rec.device_id = profile.device_id;
        rec.challenge = challenges[c];
        rec.calibration = stats_per_challenge[c];
        rec.reference = quantize(mean_feature(feats), stats_per_challenge[c], cfg.puf);
        records.push_back(std::move(rec));
    }
    return records;
}

CrpDatabase enroll_fleet(const std::vector<DeviceProfile>& fleet,
                         const std::vector<Challenge>& challenges,
                         const PufPipelineConfig& cfg) {
    check_enroll_pre(challenges, cfg);
    if (fleet.empty()) throw std::invalid_argument("enroll_fleet: empty fleet");

    std::map<std::pair<int, int>, std::vector<FeatureVector>> features;
    std::map<int, OperatingCondition> conditions;
    for (const auto& challenge : challenges) {
        conditions[challenge.challenge_id] = challenge.condition;
        for (const auto& profile : fleet)
            features[{profile.device_id, challenge.challenge_id}] =
                calib_features(profile, challenge, cfg);
    }
    return enroll_from_features(features, conditions, cfg.puf);
}

CrpDatabase enroll_from_features(
    const std::map<std::pair<int, int>, std::vector<FeatureVector>>& calib_features,
    const std::map<int, OperatingCondition>& challenge_conditions, const PufConfig& cfg) {
    if (calib_features.empty())
        throw std::invalid_argument("enroll_from_features: no calibration features");

    // Fleet-wide calibration stats per challenge, then per-device references.
    std::map<int, std::vector<FeatureVector>> pooled;
    for (const auto& [key, feats] : calib_features) {
        if (feats.size() < 2)
            throw std::invalid_argument(
                "enroll_from_features: need >= 2 calibration features per (device, challenge)");
        auto& dst = pooled[key.second];
        dst.insert(dst.end(), feats.begin(), feats.end());
    }
    std::map<int, CalibrationStats> stats;
    for (const auto& [challenge_id, feats] : pooled) stats[challenge_id] = calibrate(feats);

    CrpDatabase db;
    for (const auto& [key, feats] : calib_features) {
        const auto& [device_id, challenge_id] = key;
        auto cond = challenge_conditions.find(challenge_id);
        if (cond == challenge_conditions.end())
            throw std::invalid_argument("enroll_from_features: missing condition for challenge " +
                                        std::to_string(challenge_id));
        CrpRecord rec;
        rec.device_id = device_id;
        rec.challenge = Challenge{challenge_id, cond->second};
        rec.calibration = stats.at(challenge_id);
        rec.reference = quantize(mean_feature(feats), stats.at(challenge_id), cfg);
        db.insert(std::move(rec));
    }
    return db;
}

}  // namespace wbgsec
