#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace iclab {

// Cross-link phase selection for build_channel_set.
enum class ThetaKind { Symmetric, Fixed, Random };

struct ThetaPolicy {
    ThetaKind kind = ThetaKind::Random;
    double symmetric_theta = 0.0;                 // Symmetric: shared angle, radians
    std::vector<std::vector<double>> fixed;       // Fixed: K x K angles, radians

    static ThetaPolicy symmetric(double theta);
    static ThetaPolicy fixed_matrix(std::vector<std::vector<double>> radians);
    static ThetaPolicy random();
};

struct ChannelConfig {
    int K = 3;
    int n = 2;
    double snr_db = 18.0;
    // Cross-link strength exponents; diagonal entries are ignored.
    std::vector<std::vector<double>> alpha;
    ThetaPolicy theta;

    // Fills alpha with a single off-diagonal value (diagonal set to 1).
    void set_uniform_alpha(double a);
    void validate() const;
};

struct ChannelSet {
    int K = 0;
    int n = 0;
    double sigma2 = 0.0;
    // H[i][j] is the n x n matrix from transmitter j to receiver i.
    std::vector<std::vector<Eigen::MatrixXd>> H;
};

double noise_variance(double snr_db);

// gain = SNR_lin^((alpha-1)/2), the inversion of alpha = log INR / log SNR.
double gain_from_alpha(double alpha, double snr_db);

// gain * planar rotation by theta for n = 2; gain * identity otherwise
// (theta must be 0 when n != 2).
Eigen::MatrixXd rotation_channel(double gain, double theta, int n);

// Direct links are identity; cross links get gain_from_alpha and a phase
// drawn per policy. Deterministic for a fixed seed.
ChannelSet build_channel_set(const ChannelConfig& cfg, uint64_t rng_seed);

// Reverse-direction view: out.H[j][i] = H[i][j]^T. Involution.
ChannelSet reciprocal(const ChannelSet& ch);

// Fixture I/O. Schema: {K, n, snr_db, alpha: [[...]], theta_deg: [[...]]}.
ChannelConfig load_channel_fixture(const std::string& path);
void save_channel_fixture(const ChannelConfig& cfg, const std::string& path);

}  // namespace iclab
