#include "iclab/channel.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "iclab/rng.hpp"
#include "json.hpp"

namespace iclab {

ThetaPolicy ThetaPolicy::symmetric(double theta) {
    ThetaPolicy p;
    p.kind = ThetaKind::Symmetric;
    p.symmetric_theta = theta;
    return p;
}

ThetaPolicy ThetaPolicy::fixed_matrix(std::vector<std::vector<double>> radians) {
    ThetaPolicy p;
    p.kind = ThetaKind::Fixed;
    p.fixed = std::move(radians);
    return p;
}

ThetaPolicy ThetaPolicy::random() {
    ThetaPolicy p;
    p.kind = ThetaKind::Random;
    return p;
}

void ChannelConfig::set_uniform_alpha(double a) {
    alpha.assign(K, std::vector<double>(K, a));
    for (int i = 0; i < K; ++i) alpha[i][i] = 1.0;
}

void ChannelConfig::validate() const {
    if (K < 1) throw std::invalid_argument("channel: K must be >= 1");
    if (n < 1) throw std::invalid_argument("channel: n must be >= 1");
    if (!(snr_db > 0.0))
        throw std::invalid_argument("channel: snr_db must be > 0");
    if (alpha.size() != static_cast<size_t>(K))
        throw std::invalid_argument("channel: alpha must be K x K");
    for (const auto& row : alpha) {
        if (row.size() != static_cast<size_t>(K))
            throw std::invalid_argument("channel: alpha must be K x K");
        for (double a : row)
            if (!std::isfinite(a))
                throw std::invalid_argument("channel: alpha entries must be finite");
    }
    if (theta.kind == ThetaKind::Fixed) {
        if (theta.fixed.size() != static_cast<size_t>(K))
            throw std::invalid_argument("channel: fixed theta must be K x K");
        for (int i = 0; i < K; ++i) {
            if (theta.fixed[i].size() != static_cast<size_t>(K))
                throw std::invalid_argument("channel: fixed theta must be K x K");
            if (theta.fixed[i][i] != 0.0)
                throw std::invalid_argument(
                    "channel: fixed theta diagonal must be 0");
        }
    }
}

double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

double gain_from_alpha(double alpha, double snr_db) {
    if (!(snr_db > 0.0))
        throw std::invalid_argument("gain_from_alpha: snr_db must be > 0");
    return std::pow(10.0, snr_db * (alpha - 1.0) / 20.0);
}

Eigen::MatrixXd rotation_channel(double gain, double theta, int n) {
    if (n == 2) {
        Eigen::MatrixXd m(2, 2);
        const double c = std::cos(theta), s = std::sin(theta);
        m << gain * c, -gain * s, gain * s, gain * c;
        return m;
    }
    if (theta != 0.0)
        throw std::invalid_argument(
            "rotation_channel: nonzero theta requires n = 2");
    return gain * Eigen::MatrixXd::Identity(n, n);
}

ChannelSet build_channel_set(const ChannelConfig& cfg, uint64_t rng_seed) {
    cfg.validate();
    const int K = cfg.K, n = cfg.n;

    std::vector<std::vector<double>> theta(K, std::vector<double>(K, 0.0));
    switch (cfg.theta.kind) {
        case ThetaKind::Symmetric:
            for (int i = 0; i < K; ++i)
                for (int j = 0; j < K; ++j)
                    if (i != j) theta[i][j] = cfg.theta.symmetric_theta;
            break;
        case ThetaKind::Fixed:
            theta = cfg.theta.fixed;
            break;
        case ThetaKind::Random: {
            // Row-major draw order over off-diagonal entries keeps the
            // realization independent of how callers traverse H later.
            Rng rng(derive_seed(rng_seed, "channel_theta"));
            const double half_pi = 1.5707963267948966;
            for (int i = 0; i < K; ++i)
                for (int j = 0; j < K; ++j)
                    if (i != j) theta[i][j] = rng.uniform(-half_pi, half_pi);
            break;
        }
    }

    ChannelSet ch;
    ch.K = K;
    ch.n = n;
    ch.sigma2 = noise_variance(cfg.snr_db);
    ch.H.assign(K, std::vector<Eigen::MatrixXd>(K));
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            if (i == j) {
                ch.H[i][j] = Eigen::MatrixXd::Identity(n, n);
            } else {
                const double g = gain_from_alpha(cfg.alpha[i][j], cfg.snr_db);
                ch.H[i][j] = rotation_channel(g, theta[i][j], n);
            }
        }
    }
    return ch;
}

ChannelSet reciprocal(const ChannelSet& ch) {
    ChannelSet out;
    out.K = ch.K;
    out.n = ch.n;
    out.sigma2 = ch.sigma2;
    out.H.assign(ch.K, std::vector<Eigen::MatrixXd>(ch.K));
    for (int i = 0; i < ch.K; ++i)
        for (int j = 0; j < ch.K; ++j) out.H[j][i] = ch.H[i][j].transpose();
    return out;
}

namespace {

constexpr double kDegToRad = 0.017453292519943295;

}  // namespace

ChannelConfig load_channel_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel fixture: " + path);
    nlohmann::json j;
    in >> j;

    ChannelConfig cfg;
    cfg.K = j.at("K").get<int>();
    cfg.n = j.value("n", 2);
    cfg.snr_db = j.at("snr_db").get<double>();
    cfg.alpha = j.at("alpha").get<std::vector<std::vector<double>>>();
    auto deg = j.at("theta_deg").get<std::vector<std::vector<double>>>();
    for (auto& row : deg)
        for (double& v : row) v *= kDegToRad;
    cfg.theta = ThetaPolicy::fixed_matrix(std::move(deg));
    cfg.validate();
    return cfg;
}

void save_channel_fixture(const ChannelConfig& cfg, const std::string& path) {
    if (cfg.theta.kind != ThetaKind::Fixed)
        throw std::invalid_argument(
            "save_channel_fixture: only fixed-theta configs are serializable");
    nlohmann::json j;
    j["K"] = cfg.K;
    j["n"] = cfg.n;
    j["snr_db"] = cfg.snr_db;
    j["alpha"] = cfg.alpha;
    std::vector<std::vector<double>> deg = cfg.theta.fixed;
    for (auto& row : deg)
        for (double& v : row) v /= kDegToRad;
    j["theta_deg"] = deg;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write channel fixture: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace iclab
