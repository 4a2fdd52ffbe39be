#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "iclab/channel.hpp"

namespace iclab {

struct BeamformerSet {
    std::vector<Eigen::VectorXd> V;  // unit-norm precoders
    std::vector<Eigen::VectorXd> U;  // unit-norm combiners
    std::vector<double> P;           // per-user powers in [0, 1]
};

struct MaxSinrConfig {
    int num_runs = 10;
    int max_iters = 200;
    double tol = 1e-8;
    uint64_t rng_seed = 0;

    void validate() const;
};

// B_i = sum_{j != i} P_j (H_ij V_j)(H_ij V_j)^T + sigma2 I.
// Symmetric positive definite for sigma2 > 0.
Eigen::MatrixXd interference_covariance(int i, const ChannelSet& ch,
                                        const BeamformerSet& bf);

// normalize(B_i^{-1} H_ii V_i); the SINR-optimal unit combiner.
Eigen::VectorXd max_sinr_combiner(int i, const ChannelSet& ch,
                                  const BeamformerSet& bf);

// P_i (U_i^T H_ii V_i)^2 / (interference leakage + sigma2).
double sinr(int i, const ChannelSet& ch, const BeamformerSet& bf);

// sum_i log2(1 + SINR_i).
double gaussian_sumrate(const ChannelSet& ch, const BeamformerSet& bf);

// One alternation sweep: forward combiner update, reciprocal combiner
// update, forward precoder reassignment. Exposed for the reciprocity test.
void maxsinr_iteration(const ChannelSet& ch, const ChannelSet& rch,
                       BeamformerSet& bf);

// Alternating-reciprocity beamformer search over num_runs random starts;
// returns the run with the best Gaussian sumrate (ties to the lowest run
// index). All P_i = 1: power control is left to downstream encoders.
BeamformerSet run_maxsinr(const ChannelSet& ch, const MaxSinrConfig& cfg);

// JSON round-trip, schema {V: [[...]], U: [[...]], P: [...]}.
void save_beamformers(const BeamformerSet& bf, const std::string& path);
BeamformerSet load_beamformers(const std::string& path);

}  // namespace iclab
