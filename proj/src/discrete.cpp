#include "iclab/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "iclab/rng.hpp"

namespace iclab {

void Constellation::validate() const {
    const int M = size();
    if (M < 2) throw std::invalid_argument("constellation: need M >= 2");
    double mean = 0.0, power = 0.0;
    for (double x : points) {
        mean += x;
        power += x * x;
    }
    mean /= M;
    power /= M;
    if (std::abs(mean) > 1e-9)
        throw std::invalid_argument("constellation: not zero-mean");
    if (std::abs(power - 1.0) > 1e-9)
        throw std::invalid_argument("constellation: not unit power");
    for (int k = 0; k < M; ++k)
        if (std::abs(points[M - 1 - k] + points[k]) > 1e-9)
            throw std::invalid_argument("constellation: not antisymmetric");
}

Constellation pam_constellation(int M) {
    if (M < 2 || (M & (M - 1)) != 0)
        throw std::invalid_argument("pam_constellation: M must be a power of two >= 2");
    // Mean square of {±1, ±3, ..., ±(M-1)} is (M^2 - 1)/3.
    const double scale = std::sqrt((static_cast<double>(M) * M - 1.0) / 3.0);
    Constellation c;
    c.points.resize(M);
    for (int k = 0; k < M; ++k)
        c.points[k] = (2.0 * k - (M - 1)) / scale;
    return c;
}

Eigen::VectorXd encode_symbol(const UserEncoder& u, int w) {
    if (w < 0 || w >= u.c.size())
        throw std::out_of_range("encode_symbol: message index out of range");
    return std::sqrt(u.p) * u.c.points[w] * u.v;
}

int SystemEncoders::M() const {
    if (users.empty()) throw std::logic_error("encoders: no users");
    return users.front().c.size();
}

void SystemEncoders::validate() const {
    const int m = M();
    for (const auto& u : users) {
        if (u.c.size() != m)
            throw std::invalid_argument("encoders: alphabet sizes differ");
        u.c.validate();
        if (std::abs(u.v.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("encoders: precoder not unit norm");
        if (u.p < 0.0 || u.p > 1.0)
            throw std::invalid_argument("encoders: power outside [0, 1]");
    }
}

int Codebook::tuple_digit(long long t, int pos) const {
    const int q = static_cast<int>(interferers.size());
    long long stride = 1;
    for (int s = pos + 1; s < q; ++s) stride *= M;
    return static_cast<int>((t / stride) % M);
}

Codebook build_codebook(int i, const SystemEncoders& enc, const ChannelSet& ch,
                        long long tuple_cap) {
    if (i < 0 || i >= ch.K) throw std::out_of_range("build_codebook: receiver index");
    if (enc.K() != ch.K)
        throw std::invalid_argument("build_codebook: encoder/channel K mismatch");
    const int M = enc.M();
    const int n = ch.n;

    Codebook cb;
    cb.receiver = i;
    cb.M = M;
    cb.n = n;
    for (int j = 0; j < ch.K; ++j)
        if (j != i) cb.interferers.push_back(j);

    long long T = 1;
    for (size_t q = 0; q < cb.interferers.size(); ++q) {
        T *= M;
        if (T > tuple_cap)
            throw std::runtime_error(
                "build_codebook: tuple count exceeds cap, exact decoding infeasible");
    }
    cb.T = T;

    // Direct terms per own message and interference sums per tuple; the
    // codebook is their Cartesian sum.
    std::vector<Eigen::VectorXd> direct(M);
    for (int w = 0; w < M; ++w)
        direct[w] = ch.H[i][i] * encode_symbol(enc.users[i], w);

    std::vector<std::vector<Eigen::VectorXd>> cross(cb.interferers.size());
    for (size_t q = 0; q < cb.interferers.size(); ++q) {
        const int j = cb.interferers[q];
        cross[q].resize(M);
        for (int w = 0; w < M; ++w)
            cross[q][w] = ch.H[i][j] * encode_symbol(enc.users[j], w);
    }

    std::vector<Eigen::VectorXd> interference(
        T, Eigen::VectorXd::Zero(n));
    for (long long t = 0; t < T; ++t) {
        long long rem = t;
        for (int q = static_cast<int>(cb.interferers.size()) - 1; q >= 0; --q) {
            interference[t] += cross[q][rem % M];
            rem /= M;
        }
    }

    cb.data.resize(static_cast<size_t>(M) * T * n);
    for (int w = 0; w < M; ++w)
        for (long long t = 0; t < T; ++t) {
            double* out = cb.data.data() + (static_cast<long long>(w) * T + t) * n;
            for (int d = 0; d < n; ++d)
                out[d] = direct[w][d] + interference[t][d];
        }
    return cb;
}

namespace detail {

double stable_cluster_sums(const double* y, const Codebook& cb, double sigma2,
                           double* S) {
    thread_local std::vector<double> dist;
    const long long total = static_cast<long long>(cb.M) * cb.T;
    dist.resize(total);

    const double* p = cb.data.data();
    double d0 = std::numeric_limits<double>::infinity();
    if (cb.n == 2) {
        const double y0 = y[0], y1 = y[1];
        for (long long k = 0; k < total; ++k, p += 2) {
            const double dx = y0 - p[0], dy = y1 - p[1];
            const double d = dx * dx + dy * dy;
            dist[k] = d;
            if (d < d0) d0 = d;
        }
    } else {
        for (long long k = 0; k < total; ++k, p += cb.n) {
            double d = 0.0;
            for (int c = 0; c < cb.n; ++c) {
                const double dd = y[c] - p[c];
                d += dd * dd;
            }
            dist[k] = d;
            if (d < d0) d0 = d;
        }
    }

    const double inv = 1.0 / (2.0 * sigma2);
    for (int w = 0; w < cb.M; ++w) {
        double s = 0.0;
        const double* dw = dist.data() + static_cast<long long>(w) * cb.T;
        for (long long t = 0; t < cb.T; ++t) s += std::exp((d0 - dw[t]) * inv);
        S[w] = s;
    }
    return d0;
}

}  // namespace detail

using detail::stable_cluster_sums;

std::vector<double> likelihoods(const Eigen::VectorXd& y, const Codebook& cb,
                                double sigma2) {
    std::vector<double> L(cb.M);
    const double d0 = stable_cluster_sums(y.data(), cb, sigma2, L.data());
    const double factor = std::exp(-d0 / (2.0 * sigma2));
    for (double& v : L) v *= factor;
    return L;
}

std::vector<double> posterior(const Eigen::VectorXd& y, const Codebook& cb,
                              double sigma2) {
    std::vector<double> S(cb.M);
    stable_cluster_sums(y.data(), cb, sigma2, S.data());
    double sum = 0.0;
    for (double s : S) sum += s;
    for (double& s : S) s /= sum;
    return S;
}

int ml_decode(const Eigen::VectorXd& y, const Codebook& cb, double sigma2) {
    std::vector<double> S(cb.M);
    stable_cluster_sums(y.data(), cb, sigma2, S.data());
    int best = 0;
    for (int w = 1; w < cb.M; ++w)
        if (S[w] > S[best]) best = w;
    return best;
}

std::vector<double> soft_posterior(const Eigen::VectorXd& y, const Codebook& cb,
                                   double sigma2, double beta) {
    if (beta < 0.0)
        throw std::invalid_argument("soft_posterior: beta must be >= 0");
    std::vector<double> p = posterior(y, cb, sigma2);
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : p) hi = std::max(hi, beta * v);
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(beta * v - hi);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

namespace {

struct SharedDraws {
    std::vector<long long> tuple;
    std::vector<double> noise;  // N x n, unscaled standard normals
};

SharedDraws make_draws(const Codebook& cb, int N, uint64_t seed) {
    SharedDraws d;
    d.tuple.resize(N);
    d.noise.resize(static_cast<size_t>(N) * cb.n);
    Rng rng(seed);
    for (int k = 0; k < N; ++k) {
        d.tuple[k] = static_cast<long long>(
            rng.uniform_int(static_cast<uint64_t>(cb.T)));
        for (int c = 0; c < cb.n; ++c)
            d.noise[static_cast<size_t>(k) * cb.n + c] = rng.normal();
    }
    return d;
}

}  // namespace

TransitionMatrix transition_matrix_mc(const Codebook& cb, double sigma2,
                                      int samples_per_message, DecodeMode mode,
                                      double beta, uint64_t seed) {
    if (samples_per_message < 1)
        throw std::invalid_argument("transition_matrix_mc: need N >= 1");
    const int M = cb.M, N = samples_per_message;
    const double sigma = std::sqrt(sigma2);
    const SharedDraws draws = make_draws(cb, N, seed);

    TransitionMatrix tm;
    tm.joint = Eigen::MatrixXd::Zero(M, M);
    Eigen::VectorXd y(cb.n);
    for (int w = 0; w < M; ++w) {
        for (int k = 0; k < N; ++k) {
            const double* c = cb.pt(w, draws.tuple[k]);
            for (int d = 0; d < cb.n; ++d)
                y[d] = c[d] +
                       sigma * draws.noise[static_cast<size_t>(k) * cb.n + d];
            if (mode == DecodeMode::Hard) {
                tm.joint(w, ml_decode(y, cb, sigma2)) += 1.0;
            } else {
                const std::vector<double> q = soft_posterior(y, cb, sigma2, beta);
                for (int l = 0; l < M; ++l) tm.joint(w, l) += q[l];
            }
        }
    }
    tm.joint /= static_cast<double>(M) * N;
    return tm;
}

TransitionMatrix transition_matrix_mc(const SystemEncoders& enc,
                                      const ChannelSet& ch, int i,
                                      int samples_per_message, DecodeMode mode,
                                      double beta, uint64_t seed) {
    const Codebook cb = build_codebook(i, enc, ch);
    return transition_matrix_mc(cb, ch.sigma2, samples_per_message, mode, beta,
                                seed);
}

TransitionMatrix transition_matrix_mc_projected(const Codebook& cb,
                                                const Eigen::VectorXd& u,
                                                const Eigen::VectorXd& ref,
                                                double sigma2,
                                                int samples_per_message,
                                                uint64_t seed) {
    if (samples_per_message < 1)
        throw std::invalid_argument("transition_matrix_mc_projected: need N >= 1");
    if (ref.size() != cb.M)
        throw std::invalid_argument(
            "transition_matrix_mc_projected: ref size must equal M");
    const int M = cb.M, N = samples_per_message;
    const double sigma = std::sqrt(sigma2);
    const SharedDraws draws = make_draws(cb, N, seed);

    // 1-D codebook of the transmit-side anchors. The decision boundaries
    // come from the agreed alphabet, not from the received constellation,
    // because the conventional receiver has no estimate of the effective
    // gain along u. The noise draw stays n-dim so samples coincide with
    // the full-ML evaluator before projection.
    Codebook proj;
    proj.receiver = cb.receiver;
    proj.M = M;
    proj.n = 1;
    proj.T = 1;
    proj.data.resize(static_cast<size_t>(M));
    for (int w = 0; w < M; ++w) proj.data[static_cast<size_t>(w)] = ref[w];

    TransitionMatrix tm;
    tm.joint = Eigen::MatrixXd::Zero(M, M);
    Eigen::VectorXd y(1);
    for (int w = 0; w < M; ++w) {
        for (int k = 0; k < N; ++k) {
            const double* c = cb.pt(w, draws.tuple[k]);
            double z = 0.0;
            for (int d = 0; d < cb.n; ++d)
                z += u[d] * (c[d] + sigma * draws.noise[static_cast<size_t>(k) *
                                                            cb.n +
                                                        d]);
            y[0] = z;
            tm.joint(w, ml_decode(y, proj, sigma2)) += 1.0;
        }
    }
    tm.joint /= static_cast<double>(M) * N;
    return tm;
}

double mutual_information(const TransitionMatrix& tm) {
    const Eigen::MatrixXd& J = tm.joint;
    const Eigen::VectorXd r = J.rowwise().sum();
    const Eigen::VectorXd c = J.colwise().sum();
    double bits = 0.0;
    for (int w = 0; w < J.rows(); ++w)
        for (int l = 0; l < J.cols(); ++l) {
            const double j = J(w, l);
            if (j > 0.0) bits += j * std::log2(j / (r[w] * c[l]));
        }
    return bits;
}

uint64_t eval_user_seed(uint64_t seed, int user) {
    return derive_seed(derive_seed(seed, "eval_user"),
                       static_cast<uint64_t>(user));
}

RateReport sumrate_eval(const SystemEncoders& enc, const ChannelSet& ch,
                        int samples_per_message, uint64_t seed) {
    enc.validate();
    RateReport r;
    r.per_user.resize(ch.K);
    for (int i = 0; i < ch.K; ++i) {
        const TransitionMatrix tm =
            transition_matrix_mc(enc, ch, i, samples_per_message,
                                 DecodeMode::Hard, 0.0, eval_user_seed(seed, i));
        r.per_user[i] = mutual_information(tm);
        r.total += r.per_user[i];
    }
    return r;
}

}  // namespace iclab
