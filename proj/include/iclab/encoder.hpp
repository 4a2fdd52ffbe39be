#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "iclab/channel.hpp"
#include "iclab/discrete.hpp"
#include "iclab/maxsinr.hpp"

namespace iclab {

// Trainable per-user encoder: free modulation values (the full alphabet is
// m_free followed by its reversed negation, so the constellation stays
// antisymmetric by construction), a transmit direction, a power, and the
// soft-decoder temperature of this user's receiver.
struct EncoderParams {
    Eigen::VectorXd m_free;  // M/2 values
    Eigen::VectorXd v;
    double p = 1.0;
    double beta = 20.0;

    int M() const { return 2 * static_cast<int>(m_free.size()); }
    Constellation full_constellation() const;
    UserEncoder to_user_encoder() const;
};

// X = sqrt(p) * v * c[w].
Eigen::VectorXd encode(int w, const EncoderParams& params);

// Rescales the constellation to unit average power, renormalizes v, clamps
// p to [0,1] and beta to >= 0. Idempotent; rejects all-zero m_free or v.
void project_constraints(EncoderParams& params);
void project_constraints(std::vector<EncoderParams>& params);

enum class BetaPolicy { Fixed, Trainable };
enum class InitPolicy { Pretrained, Random };

struct TrainConfig {
    int alphabet = 8;
    int batch_size = 10000;
    int epochs = 500;
    double learning_rate = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    BetaPolicy beta_policy = BetaPolicy::Fixed;
    double beta_init = 20.0;
    InitPolicy init = InitPolicy::Pretrained;
    // Samples per message per epoch; 0 derives it as batch_size / alphabet.
    int mc_samples_per_message = 0;
    uint64_t rng_seed = 0;
    bool early_stop = true;
    int early_stop_window = 50;
    double early_stop_tol = 1e-4;
    MaxSinrConfig maxsinr;  // used by the pretraining initializer

    int samples_per_message() const;
    void validate() const;
};

// PAM alphabet, MaxSINR directions, unit power, beta from the policy.
// Evaluating these encoders reproduces the hard-decoder baseline exactly.
std::vector<EncoderParams> pretrain_init(const BeamformerSet& bf, int M,
                                         double beta_init);

// Modulation values i.i.d. standard normal then projected, v uniform on the
// sphere, p = 1.
std::vector<EncoderParams> random_init(int K, int M, int n, double beta_init,
                                       uint64_t seed);

// One epoch's worth of simulation randomness, fixed so the loss is a
// deterministic smooth function of the parameters. Every user's message
// stream is a balanced permutation: each message appears exactly
// samples_per_message times across the B = M * samples_per_message slots.
struct LossBatch {
    int B = 0;
    std::vector<std::vector<int>> msgs;      // per user, B entries
    std::vector<std::vector<double>> noise;  // per receiver, B * n normals
};

LossBatch make_loss_batch(int K, int M, int n, int samples_per_message,
                          uint64_t seed);

// Negative soft-decoder sumrate: rebuilds codebooks from params, forms the
// soft transition matrix of every receiver over the batch, and returns
// -sum_i I(W_i; What_i). Bounded in [-K log2 M, 0].
double soft_loss(const std::vector<EncoderParams>& params, const ChannelSet& ch,
                 const LossBatch& batch);

struct EncoderGrads {
    std::vector<Eigen::VectorXd> m_free;
    std::vector<Eigen::VectorXd> v;
    std::vector<double> p;
    std::vector<double> beta;
};

struct SoftLossResult {
    double loss = 0.0;
    std::vector<double> mi_per_user;
    EncoderGrads grads;
};

// Loss plus its exact reverse-mode derivative with respect to every free
// parameter, holding the batch draws fixed. Matches central finite
// differences of soft_loss on the same batch.
SoftLossResult soft_loss_grad(const std::vector<EncoderParams>& params,
                              const ChannelSet& ch, const LossBatch& batch,
                              bool beta_trainable);

// Flat parameter layout per user: m_free, v, p, beta.
Eigen::VectorXd pack_params(const std::vector<EncoderParams>& params);
void unpack_params(const Eigen::VectorXd& x, std::vector<EncoderParams>& params);
Eigen::VectorXd pack_grads(const EncoderGrads& g);

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long long t = 0;
};

// Bias-corrected Adam update on the packed parameters, followed by
// projection back onto the constraint set.
void adam_step(AdamState& state, std::vector<EncoderParams>& params,
               const EncoderGrads& grads, const TrainConfig& cfg);

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    std::vector<double> mi_per_user;
    double grad_norm = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainingDiverged : std::runtime_error {
    int epoch;
    explicit TrainingDiverged(int e)
        : std::runtime_error("training diverged: non-finite loss at epoch " +
                             std::to_string(e)),
          epoch(e) {}
};

struct TrainResult {
    std::vector<EncoderParams> params;
    TrainHistory history;
};

// Projected-Adam training of all users' encoders against the soft-decoder
// sumrate. Each epoch refreshes the decoder's noise-free reference
// codebooks from the current parameters, then takes one batch gradient
// step. Deterministic per (ch, cfg). Throws TrainingDiverged on a
// non-finite loss.
TrainResult train(const ChannelSet& ch, const TrainConfig& cfg);

// Overload starting from caller-supplied initial parameters (the init
// policy in cfg is ignored).
TrainResult train(const ChannelSet& ch, const TrainConfig& cfg,
                  std::vector<EncoderParams> initial);

// Checkpoint JSON: list of per-user {constellation, v, p, beta}; the
// constellation field stores all M values.
void save_checkpoint(const std::vector<EncoderParams>& params,
                     const std::string& path);
std::vector<EncoderParams> load_checkpoint(const std::string& path);

void save_history_csv(const TrainHistory& h, const std::string& path);

SystemEncoders to_system_encoders(const std::vector<EncoderParams>& params);

}  // namespace iclab
