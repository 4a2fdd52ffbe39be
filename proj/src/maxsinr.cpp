#include "iclab/maxsinr.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "iclab/rng.hpp"
#include "json.hpp"

namespace iclab {

void MaxSinrConfig::validate() const {
    if (num_runs < 1) throw std::invalid_argument("maxsinr: num_runs >= 1");
    if (max_iters < 1) throw std::invalid_argument("maxsinr: max_iters >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("maxsinr: tol > 0");
}

Eigen::MatrixXd interference_covariance(int i, const ChannelSet& ch,
                                        const BeamformerSet& bf) {
    Eigen::MatrixXd B =
        ch.sigma2 * Eigen::MatrixXd::Identity(ch.n, ch.n);
    for (int j = 0; j < ch.K; ++j) {
        if (j == i) continue;
        const Eigen::VectorXd hv = ch.H[i][j] * bf.V[j];
        B.noalias() += bf.P[j] * hv * hv.transpose();
    }
    return B;
}

Eigen::VectorXd max_sinr_combiner(int i, const ChannelSet& ch,
                                  const BeamformerSet& bf) {
    const Eigen::MatrixXd B = interference_covariance(i, ch, bf);
    const Eigen::VectorXd u = B.ldlt().solve(ch.H[i][i] * bf.V[i]);
    return u / u.norm();
}

double sinr(int i, const ChannelSet& ch, const BeamformerSet& bf) {
    const double sig = bf.U[i].dot(ch.H[i][i] * bf.V[i]);
    double leak = 0.0;
    for (int j = 0; j < ch.K; ++j) {
        if (j == i) continue;
        const double c = bf.U[i].dot(ch.H[i][j] * bf.V[j]);
        leak += bf.P[j] * c * c;
    }
    return bf.P[i] * sig * sig / (leak + ch.sigma2);
}

double gaussian_sumrate(const ChannelSet& ch, const BeamformerSet& bf) {
    double r = 0.0;
    for (int i = 0; i < ch.K; ++i) r += std::log2(1.0 + sinr(i, ch, bf));
    return r;
}

void maxsinr_iteration(const ChannelSet& ch, const ChannelSet& rch,
                       BeamformerSet& bf) {
    for (int i = 0; i < ch.K; ++i) bf.U[i] = max_sinr_combiner(i, ch, bf);
    // Reciprocal direction: the forward combiners transmit, and the
    // resulting reverse combiners become the next forward precoders.
    BeamformerSet rbf{bf.U, bf.U, bf.P};
    for (int i = 0; i < ch.K; ++i) rbf.U[i] = max_sinr_combiner(i, rch, rbf);
    bf.V = rbf.U;
}

namespace {

BeamformerSet random_start(const ChannelSet& ch, uint64_t seed) {
    Rng rng(seed);
    BeamformerSet bf;
    bf.V.resize(ch.K);
    bf.U.resize(ch.K);
    bf.P.assign(ch.K, 1.0);
    for (int i = 0; i < ch.K; ++i) {
        Eigen::VectorXd v(ch.n);
        for (int d = 0; d < ch.n; ++d) v[d] = rng.normal();
        bf.V[i] = v / v.norm();
        bf.U[i] = bf.V[i];
    }
    return bf;
}

}  // namespace

BeamformerSet run_maxsinr(const ChannelSet& ch, const MaxSinrConfig& cfg) {
    cfg.validate();
    const ChannelSet rch = reciprocal(ch);
    const uint64_t base = derive_seed(cfg.rng_seed, "maxsinr_run");

    BeamformerSet best;
    double best_rate = -std::numeric_limits<double>::infinity();
    for (int run = 0; run < cfg.num_runs; ++run) {
        BeamformerSet bf =
            random_start(ch, derive_seed(base, static_cast<uint64_t>(run)));
        double prev = -std::numeric_limits<double>::infinity();
        for (int it = 0; it < cfg.max_iters; ++it) {
            for (int i = 0; i < ch.K; ++i)
                bf.U[i] = max_sinr_combiner(i, ch, bf);
            const double rate = gaussian_sumrate(ch, bf);
            if (std::abs(rate - prev) <= cfg.tol * std::max(1.0, std::abs(prev)))
                break;
            prev = rate;
            BeamformerSet rbf{bf.U, bf.U, bf.P};
            for (int i = 0; i < ch.K; ++i)
                rbf.U[i] = max_sinr_combiner(i, rch, rbf);
            bf.V = rbf.U;
        }
        // The loop may exit with V freshly reassigned; recomputing the
        // combiners is a no-op when it exited converged.
        for (int i = 0; i < ch.K; ++i) bf.U[i] = max_sinr_combiner(i, ch, bf);
        const double rate = gaussian_sumrate(ch, bf);
        if (rate > best_rate) {
            best_rate = rate;
            best = bf;
        }
    }
    return best;
}

void save_beamformers(const BeamformerSet& bf, const std::string& path) {
    nlohmann::json j;
    auto pack = [](const std::vector<Eigen::VectorXd>& vs) {
        std::vector<std::vector<double>> out;
        for (const auto& v : vs)
            out.emplace_back(v.data(), v.data() + v.size());
        return out;
    };
    j["V"] = pack(bf.V);
    j["U"] = pack(bf.U);
    j["P"] = bf.P;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write beamformers: " + path);
    out << j.dump(2) << "\n";
}

BeamformerSet load_beamformers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open beamformers: " + path);
    nlohmann::json j;
    in >> j;
    BeamformerSet bf;
    auto unpack = [](const nlohmann::json& arr) {
        std::vector<Eigen::VectorXd> out;
        for (const auto& row : arr) {
            auto v = row.get<std::vector<double>>();
            out.emplace_back(
                Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
        }
        return out;
    };
    bf.V = unpack(j.at("V"));
    bf.U = unpack(j.at("U"));
    bf.P = j.at("P").get<std::vector<double>>();
    return bf;
}

}  // namespace iclab
