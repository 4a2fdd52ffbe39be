#include "iclab/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "iclab/rng.hpp"
#include "json.hpp"

namespace iclab {

Constellation EncoderParams::full_constellation() const {
    const int h = static_cast<int>(m_free.size());
    Constellation c;
    c.points.resize(2 * h);
    for (int k = 0; k < h; ++k) {
        c.points[k] = m_free[k];
        c.points[2 * h - 1 - k] = -m_free[k];
    }
    return c;
}

UserEncoder EncoderParams::to_user_encoder() const {
    return UserEncoder{full_constellation(), v, p};
}

Eigen::VectorXd encode(int w, const EncoderParams& params) {
    const Constellation c = params.full_constellation();
    if (w < 0 || w >= c.size())
        throw std::out_of_range("encode: message index out of range");
    return std::sqrt(params.p) * c.points[w] * params.v;
}

void project_constraints(EncoderParams& params) {
    const int h = static_cast<int>(params.m_free.size());
    if (h < 1) throw std::invalid_argument("project: empty constellation");
    // Average power over the mirrored alphabet equals the mean square of
    // the free half.
    const double power = params.m_free.squaredNorm() / h;
    if (!(power > 0.0))
        throw std::invalid_argument("project: all-zero constellation");
    params.m_free /= std::sqrt(power);
    const double vn = params.v.norm();
    if (!(vn > 0.0)) throw std::invalid_argument("project: all-zero precoder");
    params.v /= vn;
    params.p = std::clamp(params.p, 0.0, 1.0);
    params.beta = std::max(params.beta, 0.0);
}

void project_constraints(std::vector<EncoderParams>& params) {
    for (auto& p : params) project_constraints(p);
}

int TrainConfig::samples_per_message() const {
    if (mc_samples_per_message > 0) return mc_samples_per_message;
    return std::max(1, batch_size / alphabet);
}

void TrainConfig::validate() const {
    if (alphabet < 2 || (alphabet & (alphabet - 1)) != 0)
        throw std::invalid_argument("train: alphabet must be a power of two >= 2");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size >= 1");
    if (epochs < 1) throw std::invalid_argument("train: epochs >= 1");
    if (learning_rate < 0.0) throw std::invalid_argument("train: lr >= 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
        !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0))
        throw std::invalid_argument("train: bad Adam constants");
    if (beta_init < 0.0) throw std::invalid_argument("train: beta_init >= 0");
    if (early_stop_window < 1) throw std::invalid_argument("train: window >= 1");
}

std::vector<EncoderParams> pretrain_init(const BeamformerSet& bf, int M,
                                         double beta_init) {
    const Constellation pam = pam_constellation(M);
    std::vector<EncoderParams> params(bf.V.size());
    for (size_t i = 0; i < bf.V.size(); ++i) {
        params[i].m_free =
            Eigen::Map<const Eigen::VectorXd>(pam.points.data(), M / 2);
        params[i].v = bf.V[i];
        params[i].p = 1.0;
        params[i].beta = beta_init;
    }
    return params;
}

std::vector<EncoderParams> random_init(int K, int M, int n, double beta_init,
                                       uint64_t seed) {
    Rng rng(seed);
    std::vector<EncoderParams> params(K);
    for (int i = 0; i < K; ++i) {
        params[i].m_free.resize(M / 2);
        for (int k = 0; k < M / 2; ++k) params[i].m_free[k] = rng.normal();
        params[i].v.resize(n);
        for (int d = 0; d < n; ++d) params[i].v[d] = rng.normal();
        params[i].p = 1.0;
        params[i].beta = beta_init;
        project_constraints(params[i]);
    }
    return params;
}

LossBatch make_loss_batch(int K, int M, int n, int samples_per_message,
                          uint64_t seed) {
    if (samples_per_message < 1)
        throw std::invalid_argument("loss batch: samples_per_message >= 1");
    LossBatch batch;
    batch.B = M * samples_per_message;
    batch.msgs.resize(K);
    batch.noise.resize(K);
    const uint64_t mseed = derive_seed(seed, "msgs");
    const uint64_t nseed = derive_seed(seed, "noise");
    for (int j = 0; j < K; ++j) {
        auto& stream = batch.msgs[j];
        stream.resize(batch.B);
        for (int s = 0; s < batch.B; ++s) stream[s] = s % M;
        Rng rng(derive_seed(mseed, static_cast<uint64_t>(j)));
        for (int s = batch.B - 1; s > 0; --s) {
            const int r = static_cast<int>(
                rng.uniform_int(static_cast<uint64_t>(s) + 1));
            std::swap(stream[s], stream[r]);
        }
    }
    for (int i = 0; i < K; ++i) {
        batch.noise[i].resize(static_cast<size_t>(batch.B) * n);
        Rng rng(derive_seed(nseed, static_cast<uint64_t>(i)));
        for (double& z : batch.noise[i]) z = rng.normal();
    }
    return batch;
}

SystemEncoders to_system_encoders(const std::vector<EncoderParams>& params) {
    SystemEncoders enc;
    enc.users.reserve(params.size());
    for (const auto& p : params) enc.users.push_back(p.to_user_encoder());
    return enc;
}

namespace {

long long tuple_of(const Codebook& cb, const LossBatch& batch, int s) {
    long long t = 0;
    for (int q = 0; q < static_cast<int>(cb.interferers.size()); ++q)
        t = t * cb.M + batch.msgs[cb.interferers[q]][s];
    return t;
}

void softmax_beta(double beta, const double* phat, int M, double* q) {
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < M; ++k) hi = std::max(hi, beta * phat[k]);
    double sum = 0.0;
    for (int k = 0; k < M; ++k) {
        q[k] = std::exp(beta * phat[k] - hi);
        sum += q[k];
    }
    for (int k = 0; k < M; ++k) q[k] /= sum;
}

struct ReceiverForward {
    Eigen::MatrixXd T;  // soft joint, rows carry the 1/M prior exactly
    double mi = 0.0;
    // Per-sample caches for the backward pass.
    std::vector<double> p_hat;  // B x M
    std::vector<double> s_sum;  // B
    std::vector<double> d0;     // B
};

ReceiverForward forward_receiver(int i, const Codebook& cb, double beta,
                                 double sigma2, const LossBatch& batch,
                                 bool keep_caches) {
    const int M = cb.M, n = cb.n, B = batch.B;
    const double sigma = std::sqrt(sigma2);

    ReceiverForward f;
    f.T = Eigen::MatrixXd::Zero(M, M);
    if (keep_caches) {
        f.p_hat.resize(static_cast<size_t>(B) * M);
        f.s_sum.resize(B);
        f.d0.resize(B);
    }

    std::vector<double> y(n), S(M), q(M);
    for (int s = 0; s < B; ++s) {
        const int own = batch.msgs[i][s];
        const double* c = cb.pt(own, tuple_of(cb, batch, s));
        for (int d = 0; d < n; ++d)
            y[d] = c[d] + sigma * batch.noise[i][static_cast<size_t>(s) * n + d];
        const double d0 =
            detail::stable_cluster_sums(y.data(), cb, sigma2, S.data());
        double ssum = 0.0;
        for (int w = 0; w < M; ++w) ssum += S[w];
        for (int w = 0; w < M; ++w) S[w] /= ssum;  // S now holds p_hat
        softmax_beta(beta, S.data(), M, q.data());
        for (int l = 0; l < M; ++l) f.T(own, l) += q[l];
        if (keep_caches) {
            std::copy(S.begin(), S.end(),
                      f.p_hat.begin() + static_cast<size_t>(s) * M);
            f.s_sum[s] = ssum;
            f.d0[s] = d0;
        }
    }
    f.T /= static_cast<double>(B);
    f.mi = mutual_information(TransitionMatrix{f.T});
    return f;
}

// Accumulates d(loss)/d(X_j(w)) into gx[j].col(w) and, when requested, the
// temperature derivative of this receiver into *g_beta.
void backward_receiver(int i, const Codebook& cb, double beta, double sigma2,
                       const LossBatch& batch, const ReceiverForward& f,
                       std::vector<Eigen::MatrixXd>& gx, double* g_beta,
                       const std::vector<Eigen::MatrixXd>& ht) {
    const int M = cb.M, n = cb.n, B = batch.B;
    const long long T = cb.T;
    const double sigma = std::sqrt(sigma2);
    const double inv2s = 1.0 / (2.0 * sigma2);
    const double ln2 = 0.6931471805599453;

    // d(loss)/dT for loss = -I(T). Entries with zero mass receive zero
    // weight downstream, so their coefficient is irrelevant.
    const Eigen::VectorXd r = f.T.rowwise().sum();
    const Eigen::VectorXd c = f.T.colwise().sum();
    Eigen::MatrixXd A(M, M);
    for (int w = 0; w < M; ++w)
        for (int l = 0; l < M; ++l)
            A(w, l) = f.T(w, l) > 0.0
                          ? -(std::log(f.T(w, l) / (r[w] * c[l])) - 1.0) / ln2
                          : 0.0;

    std::vector<double> gc(static_cast<size_t>(M) * T * n, 0.0);
    std::vector<double> y(n), q(M), u(M), gph(M), gl(M), gy(n);

    for (int s = 0; s < B; ++s) {
        const int own = batch.msgs[i][s];
        const long long ts = tuple_of(cb, batch, s);
        const double* cp = cb.pt(own, ts);
        for (int d = 0; d < n; ++d)
            y[d] = cp[d] + sigma * batch.noise[i][static_cast<size_t>(s) * n + d];

        const double* ph = f.p_hat.data() + static_cast<size_t>(s) * M;
        softmax_beta(beta, ph, M, q.data());

        double s1 = 0.0;
        for (int l = 0; l < M; ++l) {
            u[l] = A(own, l) / B;
            s1 += u[l] * q[l];
        }
        for (int k = 0; k < M; ++k) gph[k] = beta * q[k] * (u[k] - s1);
        if (g_beta) {
            double pbar = 0.0;
            for (int l = 0; l < M; ++l) pbar += q[l] * ph[l];
            double gb = 0.0;
            for (int l = 0; l < M; ++l) gb += u[l] * q[l] * (ph[l] - pbar);
            *g_beta += gb;
        }
        double s2 = 0.0;
        for (int k = 0; k < M; ++k) s2 += gph[k] * ph[k];
        for (int w = 0; w < M; ++w) gl[w] = (gph[w] - s2) / f.s_sum[s];

        std::fill(gy.begin(), gy.end(), 0.0);
        const double d0 = f.d0[s];
        for (int w = 0; w < M; ++w) {
            const double glw = gl[w] * (-inv2s);
            double* gcw = gc.data() + static_cast<size_t>(w) * T * n;
            const double* pw = cb.data.data() + static_cast<size_t>(w) * T * n;
            for (long long t = 0; t < T; ++t) {
                const double* pt = pw + t * n;
                double d = 0.0;
                for (int dd = 0; dd < n; ++dd) {
                    const double diff = y[dd] - pt[dd];
                    d += diff * diff;
                }
                const double coef = 2.0 * glw * std::exp((d0 - d) * inv2s);
                double* gct = gcw + t * n;
                for (int dd = 0; dd < n; ++dd) {
                    const double diff = y[dd] - pt[dd];
                    gy[dd] += coef * diff;
                    gct[dd] -= coef * diff;
                }
            }
        }
        // The received sample depends on every user's transmitted symbol.
        const Eigen::Map<const Eigen::VectorXd> gyv(gy.data(), n);
        for (int j = 0; j < static_cast<int>(gx.size()); ++j)
            gx[j].col(batch.msgs[j][s]) += ht[j] * gyv;
    }

    // Codebook anchors: every hypothesis point is a sum of one symbol per
    // user, so its gradient fans out along the tuple digits.
    const int Q = static_cast<int>(cb.interferers.size());
    for (int w = 0; w < M; ++w)
        for (long long t = 0; t < T; ++t) {
            const Eigen::Map<const Eigen::VectorXd> gcv(
                gc.data() + (static_cast<size_t>(w) * T + t) * n, n);
            gx[i].col(w) += ht[i] * gcv;
            long long rem = t;
            for (int qpos = Q - 1; qpos >= 0; --qpos) {
                const int digit = static_cast<int>(rem % M);
                rem /= M;
                gx[cb.interferers[qpos]].col(digit) +=
                    ht[cb.interferers[qpos]] * gcv;
            }
        }
}

}  // namespace

double soft_loss(const std::vector<EncoderParams>& params, const ChannelSet& ch,
                 const LossBatch& batch) {
    const SystemEncoders enc = to_system_encoders(params);
    double loss = 0.0;
    for (int i = 0; i < ch.K; ++i) {
        const Codebook cb = build_codebook(i, enc, ch);
        loss -= forward_receiver(i, cb, params[i].beta, ch.sigma2, batch, false)
                    .mi;
    }
    return loss;
}

SoftLossResult soft_loss_grad(const std::vector<EncoderParams>& params,
                              const ChannelSet& ch, const LossBatch& batch,
                              bool beta_trainable) {
    const int K = ch.K, n = ch.n;
    const int M = params.front().M();
    const SystemEncoders enc = to_system_encoders(params);

    SoftLossResult res;
    res.mi_per_user.resize(K);
    res.grads.m_free.assign(K, Eigen::VectorXd::Zero(M / 2));
    res.grads.v.assign(K, Eigen::VectorXd::Zero(n));
    res.grads.p.assign(K, 0.0);
    res.grads.beta.assign(K, 0.0);

    // d(loss)/d(X_j(w)), accumulated over every receiver.
    std::vector<Eigen::MatrixXd> gx(K, Eigen::MatrixXd::Zero(n, M));

    for (int i = 0; i < K; ++i) {
        const Codebook cb = build_codebook(i, enc, ch);
        std::vector<Eigen::MatrixXd> ht(K);
        for (int j = 0; j < K; ++j) ht[j] = ch.H[i][j].transpose();
        const ReceiverForward f =
            forward_receiver(i, cb, params[i].beta, ch.sigma2, batch, true);
        res.mi_per_user[i] = f.mi;
        res.loss -= f.mi;
        backward_receiver(i, cb, params[i].beta, ch.sigma2, batch, f, gx,
                          beta_trainable ? &res.grads.beta[i] : nullptr, ht);
    }

    // Pull symbol gradients back to the encoder parameters:
    // X_j(w) = sqrt(p_j) * c_j[w] * v_j.
    for (int j = 0; j < K; ++j) {
        const Constellation c = params[j].full_constellation();
        const double sqp = std::sqrt(params[j].p);
        Eigen::VectorXd gfull = Eigen::VectorXd::Zero(M);
        for (int w = 0; w < M; ++w) {
            const Eigen::VectorXd gxw = gx[j].col(w);
            const double a = params[j].v.dot(gxw);
            res.grads.v[j] += sqp * c.points[w] * gxw;
            gfull[w] = sqp * a;
            if (sqp > 0.0)
                res.grads.p[j] += c.points[w] * a / (2.0 * sqp);
        }
        for (int k = 0; k < M / 2; ++k)
            res.grads.m_free[j][k] = gfull[k] - gfull[M - 1 - k];
    }
    return res;
}

Eigen::VectorXd pack_params(const std::vector<EncoderParams>& params) {
    int dim = 0;
    for (const auto& p : params)
        dim += static_cast<int>(p.m_free.size() + p.v.size()) + 2;
    Eigen::VectorXd x(dim);
    int at = 0;
    for (const auto& p : params) {
        x.segment(at, p.m_free.size()) = p.m_free;
        at += static_cast<int>(p.m_free.size());
        x.segment(at, p.v.size()) = p.v;
        at += static_cast<int>(p.v.size());
        x[at++] = p.p;
        x[at++] = p.beta;
    }
    return x;
}

void unpack_params(const Eigen::VectorXd& x, std::vector<EncoderParams>& params) {
    int at = 0;
    for (auto& p : params) {
        p.m_free = x.segment(at, p.m_free.size());
        at += static_cast<int>(p.m_free.size());
        p.v = x.segment(at, p.v.size());
        at += static_cast<int>(p.v.size());
        p.p = x[at++];
        p.beta = x[at++];
    }
}

Eigen::VectorXd pack_grads(const EncoderGrads& g) {
    int dim = 0;
    for (size_t j = 0; j < g.m_free.size(); ++j)
        dim += static_cast<int>(g.m_free[j].size() + g.v[j].size()) + 2;
    Eigen::VectorXd x(dim);
    int at = 0;
    for (size_t j = 0; j < g.m_free.size(); ++j) {
        x.segment(at, g.m_free[j].size()) = g.m_free[j];
        at += static_cast<int>(g.m_free[j].size());
        x.segment(at, g.v[j].size()) = g.v[j];
        at += static_cast<int>(g.v[j].size());
        x[at++] = g.p[j];
        x[at++] = g.beta[j];
    }
    return x;
}

void adam_step(AdamState& state, std::vector<EncoderParams>& params,
               const EncoderGrads& grads, const TrainConfig& cfg) {
    Eigen::VectorXd x = pack_params(params);
    const Eigen::VectorXd g = pack_grads(grads);
    if (state.m.size() != x.size()) {
        state.m = Eigen::VectorXd::Zero(x.size());
        state.v = Eigen::VectorXd::Zero(x.size());
        state.t = 0;
    }
    state.t += 1;
    state.m = cfg.adam_beta1 * state.m + (1.0 - cfg.adam_beta1) * g;
    state.v = cfg.adam_beta2 * state.v +
              (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
    const Eigen::VectorXd mhat = state.m / bc1;
    const Eigen::VectorXd vhat = state.v / bc2;
    x -= cfg.learning_rate *
         (mhat.array() / (vhat.array().sqrt() + cfg.adam_eps)).matrix();
    unpack_params(x, params);
    project_constraints(params);
}

TrainResult train(const ChannelSet& ch, const TrainConfig& cfg,
                  std::vector<EncoderParams> initial) {
    cfg.validate();
    project_constraints(initial);
    const int S = cfg.samples_per_message();
    const uint64_t epoch_base = derive_seed(cfg.rng_seed, "train_epoch");
    const bool beta_trainable = cfg.beta_policy == BetaPolicy::Trainable;

    AdamState state;
    TrainResult out;
    out.params = std::move(initial);
    std::vector<double> losses;
    losses.reserve(cfg.epochs);

    for (int e = 0; e < cfg.epochs; ++e) {
        const LossBatch batch =
            make_loss_batch(ch.K, cfg.alphabet, ch.n, S,
                            derive_seed(epoch_base, static_cast<uint64_t>(e)));
        SoftLossResult res = soft_loss_grad(out.params, ch, batch, beta_trainable);
        if (!beta_trainable)
            std::fill(res.grads.beta.begin(), res.grads.beta.end(), 0.0);
        const double grad_norm = pack_grads(res.grads).norm();
        if (!std::isfinite(res.loss) || !std::isfinite(grad_norm))
            throw TrainingDiverged(e);

        EpochRecord rec;
        rec.epoch = e;
        rec.loss = res.loss;
        rec.mi_per_user = res.mi_per_user;
        rec.grad_norm = grad_norm;
        out.history.epochs.push_back(std::move(rec));
        losses.push_back(res.loss);

        adam_step(state, out.params, res.grads, cfg);

        const int w = cfg.early_stop_window;
        if (cfg.early_stop && static_cast<int>(losses.size()) >= 2 * w) {
            const auto tail = losses.end();
            const double recent =
                std::accumulate(tail - w, tail, 0.0) / w;
            const double prior =
                std::accumulate(tail - 2 * w, tail - w, 0.0) / w;
            if (prior - recent < cfg.early_stop_tol) break;
        }
    }
    return out;
}

TrainResult train(const ChannelSet& ch, const TrainConfig& cfg) {
    cfg.validate();
    std::vector<EncoderParams> initial;
    if (cfg.init == InitPolicy::Pretrained) {
        const BeamformerSet bf = run_maxsinr(ch, cfg.maxsinr);
        initial = pretrain_init(bf, cfg.alphabet, cfg.beta_init);
    } else {
        initial = random_init(ch.K, cfg.alphabet, ch.n, cfg.beta_init,
                              derive_seed(cfg.rng_seed, "random_init"));
    }
    return train(ch, cfg, std::move(initial));
}

void save_checkpoint(const std::vector<EncoderParams>& params,
                     const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : params) {
        const Constellation c = p.full_constellation();
        nlohmann::json u;
        u["constellation"] = c.points;
        u["v"] = std::vector<double>(p.v.data(), p.v.data() + p.v.size());
        u["p"] = p.p;
        u["beta"] = p.beta;
        j.push_back(u);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

std::vector<EncoderParams> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    std::vector<EncoderParams> params;
    for (const auto& u : j) {
        const auto pts = u.at("constellation").get<std::vector<double>>();
        const int M = static_cast<int>(pts.size());
        if (M < 2 || M % 2 != 0)
            throw std::runtime_error("checkpoint: bad constellation size");
        for (int k = 0; k < M; ++k)
            if (std::abs(pts[M - 1 - k] + pts[k]) > 1e-9)
                throw std::runtime_error("checkpoint: constellation not antisymmetric");
        EncoderParams p;
        p.m_free = Eigen::Map<const Eigen::VectorXd>(pts.data(), M / 2);
        const auto v = u.at("v").get<std::vector<double>>();
        p.v = Eigen::Map<const Eigen::VectorXd>(
            v.data(), static_cast<Eigen::Index>(v.size()));
        p.p = u.at("p").get<double>();
        p.beta = u.at("beta").get<double>();
        params.push_back(std::move(p));
    }
    return params;
}

void save_history_csv(const TrainHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history: " + path);
    const int K = h.epochs.empty()
                      ? 0
                      : static_cast<int>(h.epochs.front().mi_per_user.size());
    out << "epoch,loss";
    for (int i = 1; i <= K; ++i) out << ",mi_user_" << i;
    out << ",grad_norm\n";
    char buf[64];
    for (const auto& e : h.epochs) {
        out << e.epoch;
        std::snprintf(buf, sizeof(buf), ",%.12g", e.loss);
        out << buf;
        for (double mi : e.mi_per_user) {
            std::snprintf(buf, sizeof(buf), ",%.12g", mi);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.12g", e.grad_norm);
        out << buf << "\n";
    }
}

}  // namespace iclab
