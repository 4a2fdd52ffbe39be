#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "iclab/channel.hpp"

namespace iclab {

// Real message alphabet. Invariants after construction/projection:
// zero mean, unit average power, points[M-1-k] = -points[k].
struct Constellation {
    std::vector<double> points;

    int size() const { return static_cast<int>(points.size()); }
    void validate() const;
};

// {±1, ±3, ..., ±(M-1)} scaled to unit average power, ascending order.
Constellation pam_constellation(int M);

struct UserEncoder {
    Constellation c;
    Eigen::VectorXd v;  // unit-norm transmit direction
    double p = 1.0;     // power in [0, 1]
};

// X_j(w) = sqrt(p_j) * c_j[w] * v_j.
Eigen::VectorXd encode_symbol(const UserEncoder& u, int w);

struct SystemEncoders {
    std::vector<UserEncoder> users;

    int K() const { return static_cast<int>(users.size()); }
    int M() const;  // common alphabet size
    void validate() const;
};

// Noise-free receive hypotheses at one receiver: for each own message w,
// the M^(K-1) points H_ii X_i(w) + sum_j H_ij X_j(w_j) over all interferer
// tuples. Tuples enumerate lexicographically over interferers in ascending
// user order, first interferer most significant.
struct Codebook {
    int receiver = 0;
    int M = 0;
    int n = 0;
    long long T = 0;                // tuples per hypothesis, M^(K-1)
    std::vector<int> interferers;   // ascending user indices != receiver
    std::vector<double> data;       // (M*T) x n, row-major

    const double* pt(int w, long long t) const {
        return data.data() + (static_cast<long long>(w) * T + t) * n;
    }
    // Message index of interferers[pos] inside tuple t.
    int tuple_digit(long long t, int pos) const;
};

// Throws when M^(K-1) exceeds tuple_cap (exact decoding infeasible).
Codebook build_codebook(int i, const SystemEncoders& enc, const ChannelSet& ch,
                        long long tuple_cap = 1000000);

// L[w] = sum_t exp(-||y - pt(w,t)||^2 / (2 sigma2)), absolute scale.
// Computed via the factored-minimum reduction, so intermediate underflow
// cannot zero a cluster that has any point within range.
std::vector<double> likelihoods(const Eigen::VectorXd& y, const Codebook& cb,
                                double sigma2);

// Normalized posterior p_hat = L / sum(L) under uniform priors; the common
// exp factor cancels, so this stays finite even where absolute likelihoods
// underflow.
std::vector<double> posterior(const Eigen::VectorXd& y, const Codebook& cb,
                              double sigma2);

// argmax_w L[w]; ties go to the lowest message index.
int ml_decode(const Eigen::VectorXd& y, const Codebook& cb, double sigma2);

// softmax(beta * p_hat). beta = 0 is uniform; beta -> inf concentrates on
// the ML argmax. Rejects negative beta.
std::vector<double> soft_posterior(const Eigen::VectorXd& y, const Codebook& cb,
                                   double sigma2, double beta);

struct TransitionMatrix {
    Eigen::MatrixXd joint;  // M x M, joint[w][l] = P(W=w, What=l)
};

enum class DecodeMode { Hard, Soft };

// Monte-Carlo transition matrix: samples_per_message draws of (interferer
// tuple, noise), shared across all rows w so that own-message relabelings
// permute the table exactly. Rows carry the uniform prior 1/M.
TransitionMatrix transition_matrix_mc(const Codebook& cb, double sigma2,
                                      int samples_per_message, DecodeMode mode,
                                      double beta, uint64_t seed);

TransitionMatrix transition_matrix_mc(const SystemEncoders& enc,
                                      const ChannelSet& ch, int i,
                                      int samples_per_message, DecodeMode mode,
                                      double beta, uint64_t seed);

// Linear-receiver variant: the same (tuple, noise) draws as the full-ML
// evaluator at equal seeds, but the decision statistic is the combiner
// output z = u'y demapped against ref, the transmit-side symbol values
// (one per message). The conventional chain models neither the effective
// gain u'H_ii v nor the residual interference, so its thresholds sit at
// the agreed alphabet rather than at the received points. Hard decisions
// only; ref must have exactly M entries.
TransitionMatrix transition_matrix_mc_projected(const Codebook& cb,
                                                const Eigen::VectorXd& u,
                                                const Eigen::VectorXd& ref,
                                                double sigma2,
                                                int samples_per_message,
                                                uint64_t seed);

// I(W; What) in bits from the joint table; 0 log 0 counts as 0.
double mutual_information(const TransitionMatrix& tm);

struct RateReport {
    std::vector<double> per_user;  // bits
    double total = 0.0;
};

// Hard-decision Monte-Carlo rate of every user under full-ML receivers.
RateReport sumrate_eval(const SystemEncoders& enc, const ChannelSet& ch,
                        int samples_per_message, uint64_t seed);

// Per-user seed used by both full-ML and projected evaluators so their
// noise draws coincide.
uint64_t eval_user_seed(uint64_t seed, int user);

namespace detail {

// Fills S[w] = sum_t exp((d0 - d(w,t)) / (2 sigma2)) where d0 is the
// smallest squared distance over the whole codebook; returns d0. The
// factored form keeps every cluster sum in range regardless of scale.
double stable_cluster_sums(const double* y, const Codebook& cb, double sigma2,
                           double* S);

}  // namespace detail

}  // namespace iclab
