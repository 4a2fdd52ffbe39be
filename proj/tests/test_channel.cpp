#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "iclab/channel.hpp"

using namespace iclab;

namespace {

const double kPi = 3.14159265358979323846;

ChannelConfig symmetric_config(int K, double snr_db, double alpha, double theta) {
    ChannelConfig cfg;
    cfg.K = K;
    cfg.n = 2;
    cfg.snr_db = snr_db;
    cfg.set_uniform_alpha(alpha);
    cfg.theta = ThetaPolicy::symmetric(theta);
    return cfg;
}

}  // namespace

TEST_CASE("noise variance follows the dB definition") {
    CHECK(noise_variance(18.0) == doctest::Approx(0.015848931924611134).epsilon(1e-12));
    CHECK(noise_variance(12.0) == doctest::Approx(0.06309573444801933).epsilon(1e-12));
    CHECK(noise_variance(0.0) == doctest::Approx(1.0));
}

TEST_CASE("gain_from_alpha matches hand-computed values") {
    CHECK(gain_from_alpha(1.0, 18.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gain_from_alpha(0.9, 18.0) == doctest::Approx(0.8128305161640993).epsilon(1e-12));
    CHECK(gain_from_alpha(0.0, 18.0) == doctest::Approx(0.12589254117941673).epsilon(1e-12));
    CHECK(gain_from_alpha(0.9, 12.0) == doctest::Approx(0.8709635899560807).epsilon(1e-12));
    CHECK_THROWS(gain_from_alpha(0.5, 0.0));
    CHECK_THROWS(gain_from_alpha(0.5, -3.0));
}

TEST_CASE("gain_from_alpha is monotone in alpha and solves its defining ratio") {
    for (double snr : {6.0, 12.0, 18.0}) {
        const double s2 = noise_variance(snr);
        double prev = 0.0;
        for (double a = 0.0; a <= 1.2 + 1e-12; a += 0.1) {
            const double g = gain_from_alpha(a, snr);
            CHECK(g > prev);
            prev = g;
            // alpha = log INR / log SNR with INR = g^2 / sigma^2.
            const double lhs = std::log(g * g / s2) / std::log(1.0 / s2);
            CHECK(lhs == doctest::Approx(a).epsilon(1e-9));
        }
    }
}

TEST_CASE("rotation_channel produces scaled planar rotations") {
    const Eigen::MatrixXd id = rotation_channel(1.0, 0.0, 2);
    CHECK(id.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));

    const Eigen::MatrixXd quarter = rotation_channel(1.0, kPi / 2, 2);
    CHECK(quarter(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(quarter(0, 1) == doctest::Approx(-1.0));
    CHECK(quarter(1, 0) == doctest::Approx(1.0));
    CHECK(quarter(1, 1) == doctest::Approx(0.0).epsilon(1e-15));

    // Entry from the fixed three-user channel: gain 0.8129 at -49.81 degrees.
    const double theta = -49.81 * kPi / 180.0;
    CHECK(theta == doctest::Approx(-0.8693485004183756).epsilon(1e-12));
    const Eigen::MatrixXd m = rotation_channel(0.8129, theta, 2);
    CHECK(m(0, 0) == doctest::Approx(0.8129 * std::cos(theta)).epsilon(1e-12));
    CHECK(m(1, 0) == doctest::Approx(0.8129 * std::sin(theta)).epsilon(1e-12));

    CHECK_THROWS(rotation_channel(1.0, 0.3, 3));
    const Eigen::MatrixXd m3 = rotation_channel(0.5, 0.0, 3);
    CHECK(m3.isApprox(0.5 * Eigen::MatrixXd::Identity(3, 3), 1e-15));
}

TEST_CASE("build_channel_set: identity direct links and symmetric cross links") {
    const ChannelConfig cfg = symmetric_config(3, 12.0, 0.9, kPi / 2);
    const ChannelSet ch = build_channel_set(cfg, 7);
    CHECK(ch.sigma2 == doctest::Approx(noise_variance(12.0)));
    const double g = 0.8709635899560807;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) {
                CHECK(ch.H[i][j].isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-15));
            } else {
                CHECK(ch.H[i][j](0, 0) == doctest::Approx(0.0).epsilon(1e-12));
                CHECK(ch.H[i][j](1, 0) == doctest::Approx(g).epsilon(1e-9));
            }
        }
}

TEST_CASE("build_channel_set: Frobenius norms reproduce the per-link gain") {
    ChannelConfig cfg = symmetric_config(4, 18.0, 0.7, 0.0);
    cfg.theta = ThetaPolicy::random();
    const ChannelSet ch = build_channel_set(cfg, 99);
    for (int i = 0; i < cfg.K; ++i)
        for (int j = 0; j < cfg.K; ++j) {
            const double expected =
                i == j ? 1.0 : gain_from_alpha(cfg.alpha[i][j], cfg.snr_db);
            CHECK(ch.H[i][j].norm() / std::sqrt(2.0) ==
                  doctest::Approx(expected).epsilon(1e-9));
        }
}

TEST_CASE("build_channel_set: random policy is deterministic per seed") {
    ChannelConfig cfg = symmetric_config(3, 18.0, 0.9, 0.0);
    cfg.theta = ThetaPolicy::random();
    const ChannelSet a = build_channel_set(cfg, 1234);
    const ChannelSet b = build_channel_set(cfg, 1234);
    const ChannelSet c = build_channel_set(cfg, 1235);
    bool same = true, diff = false;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            same = same && (a.H[i][j] == b.H[i][j]);
            diff = diff || (a.H[i][j] != c.H[i][j]);
        }
    CHECK(same);
    CHECK(diff);
}

TEST_CASE("random phases stay inside [-pi/2, pi/2]") {
    ChannelConfig cfg = symmetric_config(5, 18.0, 0.9, 0.0);
    cfg.theta = ThetaPolicy::random();
    const ChannelSet ch = build_channel_set(cfg, 77);
    for (int i = 0; i < cfg.K; ++i)
        for (int j = 0; j < cfg.K; ++j) {
            if (i == j) continue;
            const double theta = std::atan2(ch.H[i][j](1, 0), ch.H[i][j](0, 0));
            CHECK(theta >= -kPi / 2);
            CHECK(theta <= kPi / 2);
        }
}

TEST_CASE("reciprocal transposes links and is an involution") {
    ChannelConfig cfg = symmetric_config(3, 18.0, 0.9, kPi / 4);
    const ChannelSet ch = build_channel_set(cfg, 5);
    const ChannelSet r = reciprocal(ch);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(r.H[j][i].isApprox(ch.H[i][j].transpose(), 1e-15));

    // Cross-link rotation angles flip sign under the reversal.
    CHECK(r.H[2][1].isApprox(rotation_channel(gain_from_alpha(0.9, 18.0), -kPi / 4, 2), 1e-12));

    const ChannelSet rr = reciprocal(r);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(rr.H[i][j] == ch.H[i][j]);
}

TEST_CASE("channel fixture round-trips through JSON") {
    const ChannelConfig cfg = load_channel_fixture("fixtures/median_channel.json");
    CHECK(cfg.K == 3);
    CHECK(cfg.n == 2);
    CHECK(cfg.snr_db == doctest::Approx(18.0));
    CHECK(cfg.alpha[0][1] == doctest::Approx(0.9));
    REQUIRE(cfg.theta.kind == ThetaKind::Fixed);
    CHECK(cfg.theta.fixed[0][1] == doctest::Approx(-0.8693485004183756).epsilon(1e-12));
    CHECK(cfg.theta.fixed[1][2] == doctest::Approx(-81.79 * kPi / 180.0).epsilon(1e-12));
    CHECK(cfg.theta.fixed[2][0] == doctest::Approx(-25.07 * kPi / 180.0).epsilon(1e-12));

    const ChannelSet ch = build_channel_set(cfg, 0);
    CHECK(ch.H[0][1].norm() / std::sqrt(2.0) ==
          doctest::Approx(0.8128305161640993).epsilon(1e-9));

    save_channel_fixture(cfg, "build_test_fixture.json");
    const ChannelConfig back = load_channel_fixture("build_test_fixture.json");
    CHECK(back.theta.fixed[1][0] == doctest::Approx(cfg.theta.fixed[1][0]).epsilon(1e-12));
    std::remove("build_test_fixture.json");
}

TEST_CASE("config validation rejects malformed inputs") {
    ChannelConfig cfg = symmetric_config(3, 18.0, 0.9, 0.1);
    cfg.alpha.pop_back();
    CHECK_THROWS(cfg.validate());

    ChannelConfig bad_snr = symmetric_config(2, -1.0, 0.9, 0.1);
    CHECK_THROWS(bad_snr.validate());

    ChannelConfig bad_diag = symmetric_config(2, 18.0, 0.9, 0.1);
    bad_diag.theta = ThetaPolicy::fixed_matrix({{0.0, 0.1}, {0.2, 0.3}});
    CHECK_THROWS(bad_diag.validate());
}
