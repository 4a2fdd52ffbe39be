#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iclab/channel.hpp"
#include "iclab/discrete.hpp"
#include "iclab/encoder.hpp"
#include "iclab/maxsinr.hpp"

namespace iclab {

enum class Algorithm {
    MaxSinrLinear,
    DiscMaxSinr,
    DiscMaxSinrPlus,
    PlusU,
    PlusD,
};

// Stable output tokens; also the accepted config spellings.
const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct ExperimentConfig {
    ChannelConfig channel;
    int alphabet = 8;
    std::vector<Algorithm> algorithms = {Algorithm::MaxSinrLinear,
                                         Algorithm::DiscMaxSinr,
                                         Algorithm::DiscMaxSinrPlus};
    MaxSinrConfig maxsinr;
    TrainConfig train;
    int eval_samples = 10000;
    int num_channels = 10;
    uint64_t seed = 0;
    std::vector<double> theta_grid;  // defaults to pi/12 .. pi/2 in six steps
    double uniformize_epsilon = 0.05;

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct ResultRow {
    std::string experiment;
    uint64_t channel_seed = 0;
    Algorithm algorithm = Algorithm::DiscMaxSinr;
    std::vector<double> rates;  // bits per user
    double sumrate = 0.0;
    double wall_time_s = 0.0;  // diagnostic only; never written to outputs
};

// PAM messages through the MaxSINR precoders, decoded by the conventional
// chain carried over from the Gaussian design: the receive vector is
// projected onto U_i and the scalar is demapped against the transmit PAM
// levels. No gain equalization, and residual interference is treated as
// noise. Shares draws with the full-ML evaluator at equal seeds.
ResultRow eval_maxsinr_linear(const ChannelSet& ch, const BeamformerSet& bf,
                              int M, int samples_per_message, uint64_t seed);

// Full-ML hard-decision evaluation of arbitrary encoders.
ResultRow eval_hard_ml(const ChannelSet& ch, const SystemEncoders& enc,
                       Algorithm label, int samples_per_message, uint64_t seed);

// One channel realization, all requested algorithms. Training happens once
// and feeds the plus/plus_U/plus_D variants.
struct ChannelRun {
    std::vector<ResultRow> rows;
    BeamformerSet bf;
    std::vector<EncoderParams> trained;  // empty when no trained variant ran
};

ChannelRun run_channel_algorithms(const ExperimentConfig& cfg,
                                  const ChannelSet& ch, uint64_t run_seed,
                                  uint64_t channel_seed_label);

struct SweepPoint {
    double theta = 0.0;
    Algorithm algorithm = Algorithm::DiscMaxSinr;
    double sumrate = 0.0;
};

// Symmetric-phase sweep: one channel per grid angle, all requested
// algorithms, trained variants retrained per angle.
std::vector<SweepPoint> sweep_symmetric(const ExperimentConfig& cfg,
                                        const std::vector<double>& theta_grid);

struct CdfRow {
    Algorithm algorithm = Algorithm::DiscMaxSinr;
    double sumrate = 0.0;
    double cum_prob = 0.0;
};

struct CdfResult {
    std::vector<CdfRow> cdf;
    std::vector<ResultRow> rows;  // per (channel, algorithm)
};

// num_channels independent random-phase channels; empirical sumrate CDF
// per algorithm.
CdfResult run_asymmetric_cdf(const ExperimentConfig& cfg);

// Variant U: snap each learned constellation to a uniform antisymmetric
// grid over its distinct levels (single-linkage clustering with gap
// epsilon), keeping v and p. A single-level collapse turns the user off
// (p = 0, reference PAM alphabet).
std::vector<EncoderParams> ablation_uniformize(
    const std::vector<EncoderParams>& trained, double epsilon);

// Variant D: reference PAM alphabet with the learned v and p retained.
std::vector<EncoderParams> ablation_fixed_pam(
    const std::vector<EncoderParams>& trained);

struct PretrainPair {
    int channel = 0;
    double pretrained = 0.0;
    double random = 0.0;
};

// Trains twice per channel (warm start vs random init) with equal budgets
// and equal batch seeds; early stopping is disabled so both arms see the
// same number of epochs.
std::vector<PretrainPair> pretrain_ablation(const ExperimentConfig& cfg);

// Noise-free receive-side scatter: per receiver i and user j, the M points
// H_ij X_j(w), labeled by message. JSON schema:
// [{receiver, user, message, y: [..]}] with 0-based indices.
void export_constellation(const SystemEncoders& enc, const ChannelSet& ch,
                          const std::string& path);

// One SVG scatter per receiver, written to dir/receiver_<i>.svg.
void export_constellation_svg(const SystemEncoders& enc, const ChannelSet& ch,
                              const std::string& dir);

// CSV writers. Headers are part of the output contract.
void write_eval_csv(const ResultRow& row, const std::string& path);
void write_sweep_csv(const std::vector<SweepPoint>& rows,
                     const std::string& path);
void write_cdf_csv(const std::vector<CdfRow>& rows, const std::string& path);
void write_pretrain_csv(const std::vector<PretrainPair>& rows,
                        const std::string& path);

}  // namespace iclab
