#include "wbgsec/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wbgsec/mathstat.hpp"
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace wbgsec {

void RewardConfig::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("RewardConfig: alpha and beta must be > 0");
}

void ThresholdPolicy::validate() const {
    if (grid.empty()) throw std::invalid_argument("ThresholdPolicy: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("ThresholdPolicy: grid must be strictly increasing");
    if (q_values.size() != grid.size())
        throw std::invalid_argument("ThresholdPolicy: q_values/grid size mismatch");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("ThresholdPolicy: epsilon must be in [0,1]");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("ThresholdPolicy: learning_rate must be > 0");
    if (current_index >= grid.size())
        throw std::invalid_argument("ThresholdPolicy: current_index out of range");
}

PcaModel fit_pca(const std::vector<std::vector<double>>& rows, std::size_t k) {
    const std::size_t m = rows.size();
    if (m < 2) throw std::invalid_argument("fit_pca: need at least 2 rows");
    const std::size_t n = rows[0].size();
    if (n == 0) throw std::invalid_argument("fit_pca: empty feature vectors");
    for (const auto& r : rows)
        if (r.size() != n) throw std::invalid_argument("fit_pca: row length mismatch");
    if (k < 1 || k > std::min(m, n))
        throw std::invalid_argument("fit_pca: k must satisfy 1 <= k <= min(m, n)");

    Eigen::MatrixXd x(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) x(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];

    Eigen::RowVectorXd mu = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mu;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::MatrixXd& v = svd.matrixV();          // n x min(m,n)
    const Eigen::VectorXd& sv = svd.singularValues();  // descending

    PcaModel model;
    model.n = n;
    model.k = k;
    model.mean.assign(mu.data(), mu.data() + n);
    model.components.resize(k);
    model.explained_variance.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        Eigen::VectorXd comp = v.col(static_cast<long>(c));
        // Sign convention: the largest-magnitude element is positive
        // (first such element when magnitudes tie).
        long arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp(arg) < 0.0) comp = -comp;
        model.components[c].assign(comp.data(), comp.data() + n);
        double s = sv(static_cast<long>(c));
        model.explained_variance[c] = s * s / static_cast<double>(m - 1);
    }
    return model;
}

PcaModel fit_pca(const std::vector<FeatureVector>& features, std::size_t k) {
    std::vector<std::vector<double>> rows;
    rows.reserve(features.size());
    for (const auto& f : features) rows.push_back(f.values);
    return fit_pca(rows, k);
}

double anomaly_score(const PcaModel& model, const std::vector<double>& f) {
    if (f.size() != model.n)
        throw std::invalid_argument("anomaly_score: feature length does not match model");
    std::vector<double> resid(model.n);
    for (std::size_t j = 0; j < model.n; ++j) resid[j] = f[j] - model.mean[j];
    for (const auto& comp : model.components) {
        double proj = 0.0;
        for (std::size_t j = 0; j < model.n; ++j) proj += comp[j] * resid[j];
        for (std::size_t j = 0; j < model.n; ++j) resid[j] -= proj * comp[j];
    }
    double score = 0.0;
    for (double r : resid) score += r * r;
    return score;
}

double anomaly_score(const PcaModel& model, const FeatureVector& f) {
    return anomaly_score(model, f.values);
}

std::size_t choose_k(const std::vector<double>& explained_variance, double target,
                     std::size_t k_max) {
    if (explained_variance.empty()) throw std::invalid_argument("choose_k: empty variance list");
    double total = 0.0;
    for (double v : explained_variance) total += v;
    if (total <= 0.0) return 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < explained_variance.size(); ++i) {
        acc += explained_variance[i];
        if (acc / total >= target) return std::min(i + 1, k_max);
    }
    return std::min(explained_variance.size(), k_max);
}

DetectorLabel classify(double score, const ThresholdPolicy& policy) {
    return score > policy.grid[policy.current_index] ? DetectorLabel::anomalous
                                                     : DetectorLabel::normal;
}

ThresholdPolicy rl_update(const ThresholdPolicy& policy, const ConfusionCounts& batch,
                          const RewardConfig& cfg, Rng& rng) {
    policy.validate();
    cfg.validate();

    ThresholdPolicy next = policy;
    const double reward = cfg.alpha * static_cast<double>(batch.tp) -
                          cfg.beta * static_cast<double>(batch.fp);
    double& q = next.q_values[next.current_index];
    q += next.learning_rate * (reward - q);

    if (rng.uniform() < next.epsilon) {
        next.current_index = rng.uniform_index(next.grid.size());
    } else {
        next.current_index = static_cast<std::size_t>(
            std::max_element(next.q_values.begin(), next.q_values.end()) -
            next.q_values.begin());
    }
    return next;
}

ThresholdPolicy make_threshold_policy(const std::vector<double>& benign_scores,
                                      std::size_t n_points, double epsilon,
                                      double learning_rate) {
    if (benign_scores.size() < 2)
        throw std::invalid_argument("make_threshold_policy: need at least 2 benign scores");
    if (n_points < 2) throw std::invalid_argument("make_threshold_policy: need >= 2 grid points");

    double lo = percentile(benign_scores, 50.0);
    double hi = percentile(benign_scores, 99.9);
    if (!(lo > 0.0))
        throw std::invalid_argument("make_threshold_policy: median benign score must be > 0");
    if (!(hi > lo)) hi = lo * 10.0;  // degenerate spread; keep the grid valid

    ThresholdPolicy policy;
    policy.epsilon = epsilon;
    policy.learning_rate = learning_rate;
    policy.grid.resize(n_points);
    const double ratio = hi / lo;
    for (std::size_t i = 0; i < n_points; ++i)
        policy.grid[i] =
            lo * std::pow(ratio, static_cast<double>(i) / static_cast<double>(n_points - 1));
    policy.q_values.assign(n_points, 0.0);
    policy.current_index = n_points - 1;  // start conservative
    policy.validate();
    return policy;
}

std::string PcaModel::to_json_string() const {
    nlohmann::json j;
    j["mean"] = mean;
    j["components"] = components;  // row-major
    j["explained_variance"] = explained_variance;
    j["k"] = k;
    j["n"] = n;
    return j.dump(2) + "\n";
}

PcaModel PcaModel::from_json_string(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PcaModel m;
    m.mean = j.at("mean").get<std::vector<double>>();
    m.components = j.at("components").get<std::vector<std::vector<double>>>();
    m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
    m.k = j.at("k").get<std::size_t>();
    m.n = j.at("n").get<std::size_t>();
    return m;
}

std::string ThresholdPolicy::to_json_string() const {
    nlohmann::json j;
    j["grid"] = grid;
    j["q_values"] = q_values;
    j["epsilon"] = epsilon;
    j["learning_rate"] = learning_rate;
    j["current_index"] = current_index;
    return j.dump(2) + "\n";
}

}  // namespace wbgsec
