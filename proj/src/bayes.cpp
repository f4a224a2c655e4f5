#include "wbgsec/bayes.hpp"

#include <cmath>
#include <stdexcept>

#include "wbgsec/mathstat.hpp"
#include <nlohmann/json.hpp>

namespace wbgsec {

namespace {
constexpr double kSqrtTwoPi = 2.506628274631000502415765284811;
}

double lognormal_pdf(double x, double log_mean, double log_sigma) {
    if (!(x > 0.0)) return 0.0;
    const double z = (std::log(x) - log_mean) / log_sigma;
    return std::exp(-0.5 * z * z) / (x * log_sigma * kSqrtTwoPi);
}

double LikelihoodModel::benign_likelihood(double score) const {
    return std::max(lognormal_pdf(score, benign_log_mean, benign_log_sigma), floor);
}

double LikelihoodModel::anomalous_likelihood(double score) const {
    return std::max(lognormal_pdf(score, anomalous_log_mean, anomalous_log_sigma), floor);
}

void BayesConfig::validate() const {
    auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_open_unit(decision_threshold))
        throw std::invalid_argument("BayesConfig: decision_threshold must be in (0,1)");
    if (!(forgetting > 0.0 && forgetting <= 1.0))
        throw std::invalid_argument("BayesConfig: forgetting must be in (0,1]");
    if (!in_open_unit(initial_prior))
        throw std::invalid_argument("BayesConfig: initial_prior must be in (0,1)");
}

PosteriorState make_posterior_state(const BayesConfig& cfg) {
    cfg.validate();
    PosteriorState s;
    s.p_anomalous = cfg.initial_prior;
    s.prior_at_reset = cfg.initial_prior;
    s.forgetting = cfg.forgetting;
    s.frames_seen = 0;
    return s;
}

PosteriorState update(const PosteriorState& state, double score, const LikelihoodModel& lm) {
    if (!std::isfinite(score)) throw std::invalid_argument("bayes update: score must be finite");

    PosteriorState next = state;
    const double prior =
        state.forgetting * state.p_anomalous + (1.0 - state.forgetting) * state.prior_at_reset;
    const double l1 = lm.anomalous_likelihood(score);
    const double l0 = lm.benign_likelihood(score);
    next.p_anomalous = prior * l1 / (prior * l1 + (1.0 - prior) * l0);
    next.frames_seen = state.frames_seen + 1;
    return next;
}

AlertDecision decide(const PosteriorState& state, const BayesConfig& cfg) {
    return state.p_anomalous >= cfg.decision_threshold ? AlertDecision::alert
                                                       : AlertDecision::no_alert;
}

LikelihoodModel fit_likelihoods(const std::vector<double>& benign_scores,
                                const std::vector<double>& attack_scores, double floor) {
    if (benign_scores.size() < 20 || attack_scores.size() < 20)
        throw std::invalid_argument("fit_likelihoods: need at least 20 scores per class");
    if (!(floor > 0.0)) throw std::invalid_argument("fit_likelihoods: floor must be > 0");

    auto log_moments = [](const std::vector<double>& scores, const char* what) {
        std::vector<double> logs;
        logs.reserve(scores.size());
        for (double s : scores) {
            if (!(s > 0.0))
                throw std::invalid_argument(
                    std::string("fit_likelihoods: ") + what +
                    " scores must be > 0 for a log-normal fit; add jitter to degenerate scores");
            logs.push_back(std::log(s));
        }
        double mu = mean(logs);
        double sigma = sample_stddev(logs);
        if (!(sigma > 0.0))
            throw std::invalid_argument(std::string("fit_likelihoods: ") + what +
                                        " scores have zero variance; add jitter");
        return std::pair<double, double>{mu, sigma};
    };

    auto [b_mu, b_sigma] = log_moments(benign_scores, "benign");
    auto [a_mu, a_sigma] = log_moments(attack_scores, "attack");

    LikelihoodModel lm;
    lm.benign_log_mean = b_mu;
    lm.benign_log_sigma = b_sigma;
    lm.anomalous_log_mean = a_mu;
    lm.anomalous_log_sigma = a_sigma;
    lm.floor = floor;
    return lm;
}

std::string LikelihoodModel::to_json_string() const {
    nlohmann::json j;
    j["benign_log_mean"] = benign_log_mean;
    j["benign_log_sigma"] = benign_log_sigma;
    j["anomalous_log_mean"] = anomalous_log_mean;
    j["anomalous_log_sigma"] = anomalous_log_sigma;
    j["floor"] = floor;
    return j.dump(2) + "\n";
}

LikelihoodModel LikelihoodModel::from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    LikelihoodModel lm;
    lm.benign_log_mean = j.at("benign_log_mean").get<double>();
    lm.benign_log_sigma = j.at("benign_log_sigma").get<double>();
    lm.anomalous_log_mean = j.at("anomalous_log_mean").get<double>();
    lm.anomalous_log_sigma = j.at("anomalous_log_sigma").get<double>();
    lm.floor = j.at("floor").get<double>();
    return lm;
}

}  // namespace wbgsec
