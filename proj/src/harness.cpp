#include "iclab/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "iclab/rng.hpp"
#include "json.hpp"

namespace iclab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = 0.017453292519943295;

constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::MaxSinrLinear, Algorithm::DiscMaxSinr,
    Algorithm::DiscMaxSinrPlus, Algorithm::PlusU, Algorithm::PlusD};

std::string fmt_g(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.12g", v);
    return b;
}

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::MaxSinrLinear: return "maxsinr_linear";
        case Algorithm::DiscMaxSinr: return "disc_maxsinr";
        case Algorithm::DiscMaxSinrPlus: return "disc_maxsinr_plus";
        case Algorithm::PlusU: return "plus_U";
        case Algorithm::PlusD: return "plus_D";
    }
    throw std::logic_error("algorithm_name: bad enum");
}

Algorithm algorithm_from_name(const std::string& name) {
    for (Algorithm a : kAllAlgorithms)
        if (name == algorithm_name(a)) return a;
    throw std::invalid_argument("unknown algorithm: " + name);
}

void ExperimentConfig::validate() const {
    channel.validate();
    maxsinr.validate();
    if (alphabet < 2 || (alphabet & (alphabet - 1)) != 0)
        throw std::invalid_argument("config: alphabet must be a power of two >= 2");
    if (eval_samples < 1)
        throw std::invalid_argument("config: eval_samples >= 1");
    if (num_channels < 1)
        throw std::invalid_argument("config: num_channels >= 1");
    if (algorithms.empty())
        throw std::invalid_argument("config: empty algorithm set");
    if (!(uniformize_epsilon > 0.0))
        throw std::invalid_argument("config: uniformize_epsilon > 0");
    TrainConfig t = train;
    t.alphabet = alphabet;
    t.validate();
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j;
    in >> j;

    ExperimentConfig cfg;
    if (j.contains("channel_file")) {
        cfg.channel = load_channel_fixture(j.at("channel_file").get<std::string>());
    } else if (j.contains("channel")) {
        const auto& c = j.at("channel");
        cfg.channel.K = c.at("K").get<int>();
        cfg.channel.n = c.value("n", 2);
        cfg.channel.snr_db = c.at("snr_db").get<double>();
        if (c.contains("alpha")) {
            if (c.at("alpha").is_number())
                cfg.channel.set_uniform_alpha(c.at("alpha").get<double>());
            else
                cfg.channel.alpha =
                    c.at("alpha").get<std::vector<std::vector<double>>>();
        } else {
            cfg.channel.set_uniform_alpha(0.9);
        }
        if (c.contains("theta")) {
            const auto& t = c.at("theta");
            const std::string policy = t.at("policy").get<std::string>();
            if (policy == "symmetric") {
                cfg.channel.theta =
                    ThetaPolicy::symmetric(t.at("radians").get<double>());
            } else if (policy == "fixed") {
                std::vector<std::vector<double>> m;
                if (t.contains("degrees")) {
                    m = t.at("degrees").get<std::vector<std::vector<double>>>();
                    for (auto& row : m)
                        for (double& v : row) v *= kDegToRad;
                } else {
                    m = t.at("radians").get<std::vector<std::vector<double>>>();
                }
                cfg.channel.theta = ThetaPolicy::fixed_matrix(std::move(m));
            } else if (policy == "random") {
                cfg.channel.theta = ThetaPolicy::random();
            } else {
                throw std::invalid_argument("config: unknown theta policy " +
                                            policy);
            }
        } else {
            cfg.channel.theta = ThetaPolicy::random();
        }
    } else {
        throw std::invalid_argument("config: need channel or channel_file");
    }

    cfg.alphabet = j.value("alphabet", 8);
    if (j.contains("algorithms")) {
        cfg.algorithms.clear();
        for (const auto& s : j.at("algorithms"))
            cfg.algorithms.push_back(algorithm_from_name(s.get<std::string>()));
    }
    if (j.contains("maxsinr")) {
        const auto& m = j.at("maxsinr");
        cfg.maxsinr.num_runs = m.value("num_runs", cfg.maxsinr.num_runs);
        cfg.maxsinr.max_iters = m.value("max_iters", cfg.maxsinr.max_iters);
        cfg.maxsinr.tol = m.value("tol", cfg.maxsinr.tol);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.learning_rate =
            t.value("learning_rate", cfg.train.learning_rate);
        if (t.contains("beta_policy")) {
            const std::string bp = t.at("beta_policy").get<std::string>();
            if (bp == "fixed")
                cfg.train.beta_policy = BetaPolicy::Fixed;
            else if (bp == "trainable")
                cfg.train.beta_policy = BetaPolicy::Trainable;
            else
                throw std::invalid_argument("config: unknown beta_policy " + bp);
        }
        cfg.train.beta_init = t.value("beta_init", cfg.train.beta_init);
        if (t.contains("init")) {
            const std::string it = t.at("init").get<std::string>();
            if (it == "pretrained")
                cfg.train.init = InitPolicy::Pretrained;
            else if (it == "random")
                cfg.train.init = InitPolicy::Random;
            else
                throw std::invalid_argument("config: unknown init " + it);
        }
        cfg.train.mc_samples_per_message =
            t.value("mc_samples_per_message", cfg.train.mc_samples_per_message);
        cfg.train.early_stop = t.value("early_stop", cfg.train.early_stop);
        cfg.train.early_stop_window =
            t.value("early_stop_window", cfg.train.early_stop_window);
        cfg.train.early_stop_tol =
            t.value("early_stop_tol", cfg.train.early_stop_tol);
    }
    cfg.eval_samples = j.value("eval_samples", 10000);
    cfg.num_channels = j.value("num_channels", 10);
    cfg.seed = j.value("seed", static_cast<uint64_t>(0));
    if (j.contains("theta_grid"))
        cfg.theta_grid = j.at("theta_grid").get<std::vector<double>>();
    cfg.uniformize_epsilon = j.value("uniformize_epsilon", 0.05);

    cfg.train.alphabet = cfg.alphabet;
    cfg.validate();
    return cfg;
}

ResultRow eval_maxsinr_linear(const ChannelSet& ch, const BeamformerSet& bf,
                              int M, int samples_per_message, uint64_t seed) {
    const double t0 = now_s();
    const SystemEncoders enc =
        to_system_encoders(pretrain_init(bf, M, 0.0));
    ResultRow row;
    row.algorithm = Algorithm::MaxSinrLinear;
    row.rates.resize(ch.K);
    for (int i = 0; i < ch.K; ++i) {
        const Codebook cb = build_codebook(i, enc, ch);
        const UserEncoder& own = enc.users[static_cast<size_t>(i)];
        Eigen::VectorXd ref(M);
        for (int w = 0; w < M; ++w)
            ref[w] = std::sqrt(own.p) * own.c.points[static_cast<size_t>(w)];
        const TransitionMatrix tm = transition_matrix_mc_projected(
            cb, bf.U[i], ref, ch.sigma2, samples_per_message,
            eval_user_seed(seed, i));
        row.rates[i] = mutual_information(tm);
        row.sumrate += row.rates[i];
    }
    row.wall_time_s = now_s() - t0;
    return row;
}

ResultRow eval_hard_ml(const ChannelSet& ch, const SystemEncoders& enc,
                       Algorithm label, int samples_per_message,
                       uint64_t seed) {
    const double t0 = now_s();
    const RateReport rep = sumrate_eval(enc, ch, samples_per_message, seed);
    ResultRow row;
    row.algorithm = label;
    row.rates = rep.per_user;
    row.sumrate = rep.total;
    row.wall_time_s = now_s() - t0;
    return row;
}

ChannelRun run_channel_algorithms(const ExperimentConfig& cfg,
                                  const ChannelSet& ch, uint64_t run_seed,
                                  uint64_t channel_seed_label) {
    const auto requested = [&](Algorithm a) {
        return std::find(cfg.algorithms.begin(), cfg.algorithms.end(), a) !=
               cfg.algorithms.end();
    };

    ChannelRun out;
    MaxSinrConfig mcfg = cfg.maxsinr;
    mcfg.rng_seed = derive_seed(run_seed, "maxsinr");
    out.bf = run_maxsinr(ch, mcfg);

    const uint64_t eval_seed = derive_seed(run_seed, "eval");
    const bool need_training = requested(Algorithm::DiscMaxSinrPlus) ||
                               requested(Algorithm::PlusU) ||
                               requested(Algorithm::PlusD);
    if (need_training) {
        TrainConfig tcfg = cfg.train;
        tcfg.alphabet = cfg.alphabet;
        tcfg.rng_seed = derive_seed(run_seed, "train");
        std::vector<EncoderParams> init =
            tcfg.init == InitPolicy::Pretrained
                ? pretrain_init(out.bf, cfg.alphabet, tcfg.beta_init)
                : random_init(ch.K, cfg.alphabet, ch.n, tcfg.beta_init,
                              derive_seed(tcfg.rng_seed, "random_init"));
        out.trained = train(ch, tcfg, std::move(init)).params;
    }

    for (Algorithm a : kAllAlgorithms) {
        if (!requested(a)) continue;
        ResultRow row;
        switch (a) {
            case Algorithm::MaxSinrLinear:
                row = eval_maxsinr_linear(ch, out.bf, cfg.alphabet,
                                          cfg.eval_samples, eval_seed);
                break;
            case Algorithm::DiscMaxSinr:
                row = eval_hard_ml(
                    ch,
                    to_system_encoders(
                        pretrain_init(out.bf, cfg.alphabet, cfg.train.beta_init)),
                    a, cfg.eval_samples, eval_seed);
                break;
            case Algorithm::DiscMaxSinrPlus:
                row = eval_hard_ml(ch, to_system_encoders(out.trained), a,
                                   cfg.eval_samples, eval_seed);
                break;
            case Algorithm::PlusU:
                row = eval_hard_ml(
                    ch,
                    to_system_encoders(
                        ablation_uniformize(out.trained, cfg.uniformize_epsilon)),
                    a, cfg.eval_samples, eval_seed);
                break;
            case Algorithm::PlusD:
                row = eval_hard_ml(ch,
                                   to_system_encoders(ablation_fixed_pam(out.trained)),
                                   a, cfg.eval_samples, eval_seed);
                break;
        }
        row.channel_seed = channel_seed_label;
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<SweepPoint> sweep_symmetric(const ExperimentConfig& cfg,
                                        const std::vector<double>& theta_grid) {
    std::vector<double> grid = theta_grid;
    if (grid.empty())
        grid = {kPi / 12, kPi / 6, kPi / 4, kPi / 3, 5 * kPi / 12, kPi / 2};
    for (double t : grid)
        if (!(t > 0.0 && t <= kPi / 2 + 1e-12))
            throw std::invalid_argument("sweep: theta grid must lie in (0, pi/2]");

    const uint64_t base = derive_seed(cfg.seed, "sweep");
    std::vector<SweepPoint> points;
    for (size_t gi = 0; gi < grid.size(); ++gi) {
        ChannelConfig ccfg = cfg.channel;
        ccfg.theta = ThetaPolicy::symmetric(grid[gi]);
        const ChannelSet ch = build_channel_set(ccfg, 0);
        std::cerr << "[sweep] theta " << gi + 1 << "/" << grid.size() << " ("
                  << grid[gi] << " rad)\n";
        const ChannelRun run = run_channel_algorithms(
            cfg, ch, derive_seed(base, static_cast<uint64_t>(gi)), gi);
        for (const auto& row : run.rows)
            points.push_back({grid[gi], row.algorithm, row.sumrate});
    }
    return points;
}

CdfResult run_asymmetric_cdf(const ExperimentConfig& cfg) {
    const uint64_t chan_base = derive_seed(cfg.seed, "cdf_channel");
    const uint64_t run_base = derive_seed(cfg.seed, "cdf_run");

    CdfResult res;
    for (int c = 0; c < cfg.num_channels; ++c) {
        ChannelConfig ccfg = cfg.channel;
        ccfg.theta = ThetaPolicy::random();
        const uint64_t chseed = derive_seed(chan_base, static_cast<uint64_t>(c));
        const ChannelSet ch = build_channel_set(ccfg, chseed);
        std::cerr << "[cdf] channel " << c + 1 << "/" << cfg.num_channels
                  << "\n";
        ChannelRun run = run_channel_algorithms(
            cfg, ch, derive_seed(run_base, static_cast<uint64_t>(c)), chseed);
        for (auto& row : run.rows) res.rows.push_back(std::move(row));
    }

    for (Algorithm a : kAllAlgorithms) {
        std::vector<double> rates;
        for (const auto& row : res.rows)
            if (row.algorithm == a) rates.push_back(row.sumrate);
        if (rates.empty()) continue;
        std::sort(rates.begin(), rates.end());
        for (size_t k = 0; k < rates.size(); ++k)
            res.cdf.push_back(
                {a, rates[k], static_cast<double>(k + 1) / rates.size()});
    }
    return res;
}

std::vector<EncoderParams> ablation_uniformize(
    const std::vector<EncoderParams>& trained, double epsilon) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("uniformize: epsilon > 0");
    std::vector<EncoderParams> out = trained;
    for (auto& params : out) {
        const int M = params.M();
        const Constellation c = params.full_constellation();

        std::vector<int> order(M);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return c.points[a] < c.points[b];
        });

        // Single-linkage on the line: a gap wider than epsilon starts a new
        // level cluster.
        std::vector<int> cluster(M, 0);
        int d = 0;
        cluster[order[0]] = 0;
        for (int k = 1; k < M; ++k) {
            if (c.points[order[k]] - c.points[order[k - 1]] > epsilon) ++d;
            cluster[order[k]] = d;
        }
        ++d;  // cluster count

        if (d == 1) {
            // Everything collapsed to one level; the only consistent
            // zero-mean reading is a silent user.
            const Constellation pam = pam_constellation(M);
            params.m_free =
                Eigen::Map<const Eigen::VectorXd>(pam.points.data(), M / 2);
            params.p = 0.0;
            continue;
        }

        // Uniform antisymmetric grid over d levels, unit message-weighted
        // power. Antisymmetry of the input guarantees mirrored clusters.
        std::vector<double> snapped(M);
        double power = 0.0;
        for (int w = 0; w < M; ++w) {
            snapped[w] = 2.0 * cluster[w] - (d - 1);
            power += snapped[w] * snapped[w];
        }
        power /= M;
        const double scale = std::sqrt(power);
        for (int w = 0; w < M; ++w) snapped[w] /= scale;
        for (int k = 0; k < M; ++k)
            if (std::abs(snapped[M - 1 - k] + snapped[k]) > 1e-9)
                throw std::logic_error(
                    "uniformize: clustering broke antisymmetry");
        params.m_free = Eigen::Map<const Eigen::VectorXd>(snapped.data(), M / 2);
    }
    return out;
}

std::vector<EncoderParams> ablation_fixed_pam(
    const std::vector<EncoderParams>& trained) {
    std::vector<EncoderParams> out = trained;
    for (auto& params : out) {
        const Constellation pam = pam_constellation(params.M());
        params.m_free = Eigen::Map<const Eigen::VectorXd>(pam.points.data(),
                                                          params.M() / 2);
    }
    return out;
}

std::vector<PretrainPair> pretrain_ablation(const ExperimentConfig& cfg) {
    const uint64_t chan_base = derive_seed(cfg.seed, "pretrain_channel");
    const uint64_t run_base = derive_seed(cfg.seed, "pretrain_run");

    std::vector<PretrainPair> pairs;
    for (int c = 0; c < cfg.num_channels; ++c) {
        ChannelConfig ccfg = cfg.channel;
        ccfg.theta = ThetaPolicy::random();
        const ChannelSet ch = build_channel_set(
            ccfg, derive_seed(chan_base, static_cast<uint64_t>(c)));
        const uint64_t run_seed = derive_seed(run_base, static_cast<uint64_t>(c));
        std::cerr << "[pretrain] channel " << c + 1 << "/" << cfg.num_channels
                  << "\n";

        MaxSinrConfig mcfg = cfg.maxsinr;
        mcfg.rng_seed = derive_seed(run_seed, "maxsinr");
        const BeamformerSet bf = run_maxsinr(ch, mcfg);

        TrainConfig tcfg = cfg.train;
        tcfg.alphabet = cfg.alphabet;
        tcfg.rng_seed = derive_seed(run_seed, "train");
        tcfg.early_stop = false;  // both arms must see the full budget

        const TrainResult warm =
            train(ch, tcfg, pretrain_init(bf, cfg.alphabet, tcfg.beta_init));
        const TrainResult cold = train(
            ch, tcfg,
            random_init(ch.K, cfg.alphabet, ch.n, tcfg.beta_init,
                        derive_seed(run_seed, "random_init")));

        const uint64_t eval_seed = derive_seed(run_seed, "eval");
        PretrainPair pair;
        pair.channel = c;
        pair.pretrained = sumrate_eval(to_system_encoders(warm.params), ch,
                                       cfg.eval_samples, eval_seed)
                              .total;
        pair.random = sumrate_eval(to_system_encoders(cold.params), ch,
                                   cfg.eval_samples, eval_seed)
                          .total;
        pairs.push_back(pair);
    }
    return pairs;
}

void export_constellation(const SystemEncoders& enc, const ChannelSet& ch,
                          const std::string& path) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < ch.K; ++i)
        for (int jj = 0; jj < ch.K; ++jj)
            for (int w = 0; w < enc.M(); ++w) {
                const Eigen::VectorXd y =
                    ch.H[i][jj] * encode_symbol(enc.users[jj], w);
                nlohmann::json entry;
                entry["receiver"] = i;
                entry["user"] = jj;
                entry["message"] = w;
                entry["y"] = std::vector<double>(y.data(), y.data() + y.size());
                j.push_back(entry);
            }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write constellation: " + path);
    out << j.dump(2) << "\n";
}

void export_constellation_svg(const SystemEncoders& enc, const ChannelSet& ch,
                              const std::string& dir) {
    if (ch.n != 2)
        throw std::invalid_argument("svg export: only 2-D signal spaces");
    std::filesystem::create_directories(dir);
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    for (int i = 0; i < ch.K; ++i) {
        double extent = 1e-9;
        std::vector<std::array<double, 2>> pts;
        std::vector<int> owner;
        for (int j = 0; j < ch.K; ++j)
            for (int w = 0; w < enc.M(); ++w) {
                const Eigen::VectorXd y =
                    ch.H[i][j] * encode_symbol(enc.users[j], w);
                pts.push_back({y[0], y[1]});
                owner.push_back(j);
                extent = std::max({extent, std::abs(y[0]), std::abs(y[1])});
            }
        extent *= 1.15;
        const double half = 220.0;
        auto sx = [&](double v) { return 250.0 + half * v / extent; };
        auto sy = [&](double v) { return 250.0 - half * v / extent; };

        std::ofstream out(dir + "/receiver_" + std::to_string(i) + ".svg");
        if (!out) throw std::runtime_error("svg export: cannot write file");
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" "
               "height=\"500\" viewBox=\"0 0 500 500\">\n"
            << "<rect width=\"500\" height=\"500\" fill=\"white\"/>\n"
            << "<line x1=\"250\" y1=\"10\" x2=\"250\" y2=\"490\" "
               "stroke=\"#cccccc\"/>\n"
            << "<line x1=\"10\" y1=\"250\" x2=\"490\" y2=\"250\" "
               "stroke=\"#cccccc\"/>\n";
        for (size_t k = 0; k < pts.size(); ++k)
            out << "<circle cx=\"" << fmt_g(sx(pts[k][0])) << "\" cy=\""
                << fmt_g(sy(pts[k][1])) << "\" r=\"5\" fill=\""
                << palette[owner[k] % 6] << "\" fill-opacity=\"0.8\"/>\n";
        for (int j = 0; j < ch.K; ++j)
            out << "<text x=\"20\" y=\"" << 30 + 20 * j << "\" fill=\""
                << palette[j % 6] << "\" font-size=\"14\">user " << j
                << "</text>\n";
        out << "</svg>\n";
    }
}

void write_eval_csv(const ResultRow& row, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "user,rate_bits\n";
    for (size_t i = 0; i < row.rates.size(); ++i)
        out << i + 1 << "," << fmt_g(row.rates[i]) << "\n";
}

void write_sweep_csv(const std::vector<SweepPoint>& rows,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "theta_rad,algorithm,sumrate_bits\n";
    for (const auto& r : rows)
        out << fmt_g(r.theta) << "," << algorithm_name(r.algorithm) << ","
            << fmt_g(r.sumrate) << "\n";
}

void write_cdf_csv(const std::vector<CdfRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "sumrate_bits,cum_prob,algorithm\n";
    for (const auto& r : rows)
        out << fmt_g(r.sumrate) << "," << fmt_g(r.cum_prob) << ","
            << algorithm_name(r.algorithm) << "\n";
}

void write_pretrain_csv(const std::vector<PretrainPair>& rows,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "channel,sumrate_pretrained,sumrate_random,pretrained_wins\n";
    for (const auto& r : rows)
        out << r.channel << "," << fmt_g(r.pretrained) << ","
            << fmt_g(r.random) << "," << (r.pretrained > r.random ? 1 : 0)
            << "\n";
}

}  // namespace iclab
