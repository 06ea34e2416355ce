#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "propsurro/common.hpp"
#include "propsurro/dataset.hpp"
#include "propsurro/mlp.hpp"
#include "propsurro/optim.hpp"
#include "propsurro/rng.hpp"

namespace propsurro {

// ------------------------------- Configuration -------------------------------

struct ArchSpec {
    int gen_hidden_layers = 4;
    int gen_width = 100;
    int enc_hidden_layers = 4;
    int enc_width = 100;
    int disc_hidden_layers = 2;
    int disc_width = 100;
    int latent_dim = 1;
};

struct TrainConfig {
    long steps = 50000;            // total updates, discriminator and generator combined
    double learning_rate = 1e-4;
    int batch_size = 128;          // full batch when the dataset is smaller
    int disc_updates = 2;          // update ratio disc_updates : gen_updates
    int gen_updates = 1;
    double lambda = 1.5;           // weight of the latent reconstruction in the generator loss
    double beta = 0.5;             // weight of the encoder's own reconstruction objective
    std::uint64_t seed = 0;
};

inline void validate_train_config(const TrainConfig& c) {
    if (c.steps < 0) throw ConfigError("train: steps must be >= 0");
    if (!(c.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (c.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (c.disc_updates < 1 || c.gen_updates < 1)
        throw ConfigError("train: update ratio parts must be >= 1");
    if (c.lambda < 0.0) throw ConfigError("train: lambda must be >= 0");
    if (c.beta < 0.0) throw ConfigError("train: beta must be >= 0");
}

// ------------------------------- Model -------------------------------

// gamma = generator(x, z) with z ~ N(0, I_latent); the encoder recovers z
// from (x, gamma) and the discriminator scores (x, gamma) pairs with a logit.
struct GenerativeModel {
    FeatureList features;   // empty for matrix-level models
    Standardizer x_std;
    Standardizer y_std;
    Vec x_lo, x_hi;         // training-domain box per input, raw units
    MlpNetwork generator;
    MlpNetwork encoder;
    MlpNetwork discriminator;
    int latent_dim = 1;

    Eigen::Index dim() const { return generator.input_width() - latent_dim; }
};

namespace gen_detail {

inline double softplus(double t) {
    // log(1 + e^t) without overflow
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// columns drawn i.i.d. standard normal
inline Mat normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Mat z(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = rng.normal();
    return z;
}

struct Batch {
    Mat x;  // d x m, standardized
    Mat y;  // 1 x m, standardized
};

// X_std: n x d (rows = samples) -> batch matrices with columns = samples
inline Batch draw_batch(const Mat& X_std, const Vec& y_std, int batch_size, Rng& rng) {
    const Eigen::Index n = X_std.rows();
    Batch b;
    if (n <= batch_size) {
        b.x = X_std.transpose();
        b.y = y_std.transpose();
        return b;
    }
    b.x = Mat(X_std.cols(), batch_size);
    b.y = Mat(1, batch_size);
    for (int j = 0; j < batch_size; ++j) {
        const Eigen::Index i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
        b.x.col(j) = X_std.row(i).transpose();
        b.y(0, j) = y_std(i);
    }
    return b;
}

inline std::vector<int> hidden_widths(int input, int layers, int width, int output) {
    std::vector<int> w;
    w.push_back(input);
    for (int i = 0; i < layers; ++i) w.push_back(width);
    w.push_back(output);
    return w;
}

}  // namespace gen_detail

// ------------------------------- Training -------------------------------

// Matrix-level trainer on raw inputs/targets; standardization happens inside.
// Alternating scheme per block of (disc_updates + gen_updates) steps:
// discriminator first, then generator(+encoder); `steps` counts every update.
//
// Losses: discriminator = logistic loss separating (x, y) from (x, G(x,z));
// generator = softplus(-D(x, G)) + lambda * mean((E(x, G) - z)^2); encoder
// minimizes beta * the same reconstruction term.
inline GenerativeModel train_generative_matrix(const Mat& X_raw, const Vec& y_raw,
                                               const ArchSpec& arch, const TrainConfig& cfg) {
    validate_train_config(cfg);
    const Eigen::Index n = X_raw.rows(), d = X_raw.cols();
    if (n < 1) throw EmptyDataset("train: no training rows");

    GenerativeModel m;
    m.latent_dim = arch.latent_dim;
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < d; ++j) names.push_back("input " + std::to_string(j));
    m.x_std = fit_standardizer_matrix(X_raw, names, /*allow_constant=*/true);
    Mat ym(n, 1);
    ym.col(0) = y_raw;
    m.y_std = fit_standardizer_matrix(ym, {"target"});
    m.x_lo = X_raw.colwise().minCoeff();
    m.x_hi = X_raw.colwise().maxCoeff();
    Mat X = m.x_std.transform(X_raw);
    Vec y = (y_raw.array() - m.y_std.mean(0)) / m.y_std.sd(0);

    Rng rng(cfg.seed);
    const int din = static_cast<int>(d);
    m.generator = make_mlp(
        gen_detail::hidden_widths(din + arch.latent_dim, arch.gen_hidden_layers, arch.gen_width, 1),
        rng);
    m.encoder = make_mlp(
        gen_detail::hidden_widths(din + 1, arch.enc_hidden_layers, arch.enc_width, arch.latent_dim),
        rng);
    m.discriminator = make_mlp(
        gen_detail::hidden_widths(din + 1, arch.disc_hidden_layers, arch.disc_width, 1), rng);

    AdamState gen_adam(m.generator.parameter_count(), cfg.learning_rate);
    AdamState enc_adam(m.encoder.parameter_count(), cfg.learning_rate);
    AdamState disc_adam(m.discriminator.parameter_count(), cfg.learning_rate);
    Vec gen_params = mlp_pack(m.generator);
    Vec enc_params = mlp_pack(m.encoder);
    Vec disc_params = mlp_pack(m.discriminator);

    const int block = cfg.disc_updates + cfg.gen_updates;
    for (long step = 0; step < cfg.steps; ++step) {
        const bool disc_turn = (step % block) < cfg.disc_updates;
        gen_detail::Batch b = gen_detail::draw_batch(X, y, cfg.batch_size, rng);
        const Eigen::Index mb = b.x.cols();
        Mat z = gen_detail::normal_matrix(arch.latent_dim, mb, rng);

        Mat gen_in(din + arch.latent_dim, mb);
        gen_in.topRows(din) = b.x;
        gen_in.bottomRows(arch.latent_dim) = z;

        if (disc_turn) {
            Mat gamma = mlp_forward_batch(m.generator, gen_in);
            // one pass over [real | fake] columns
            Mat disc_in(din + 1, 2 * mb);
            disc_in.topRows(din).leftCols(mb) = b.x;
            disc_in.topRows(din).rightCols(mb) = b.x;
            disc_in.bottomRows(1).leftCols(mb) = b.y;
            disc_in.bottomRows(1).rightCols(mb) = gamma;
            ForwardTrace trace;
            Mat t = mlp_forward_batch(m.discriminator, disc_in, &trace);
            double loss = 0.0;
            Mat dout(1, 2 * mb);
            for (Eigen::Index j = 0; j < mb; ++j) {
                loss += gen_detail::softplus(-t(0, j)) + gen_detail::softplus(t(0, mb + j));
                dout(0, j) = -gen_detail::logistic(-t(0, j)) / static_cast<double>(mb);
                dout(0, mb + j) = gen_detail::logistic(t(0, mb + j)) / static_cast<double>(mb);
            }
            loss /= static_cast<double>(mb);
            if (!std::isfinite(loss)) throw NonFiniteLoss(step, loss);
            MlpGradients g = mlp_backward(m.discriminator, trace, dout);
            adam_step(disc_adam, disc_params, mlp_pack_gradients(m.discriminator, g));
            mlp_unpack(m.discriminator, disc_params);
        } else {
            ForwardTrace gen_trace;
            Mat gamma = mlp_forward_batch(m.generator, gen_in, &gen_trace);

            Mat disc_in(din + 1, mb);
            disc_in.topRows(din) = b.x;
            disc_in.bottomRows(1) = gamma;
            ForwardTrace disc_trace;
            Mat t = mlp_forward_batch(m.discriminator, disc_in, &disc_trace);

            double adv = 0.0;
            Mat d_t(1, mb);
            for (Eigen::Index j = 0; j < mb; ++j) {
                adv += gen_detail::softplus(-t(0, j));
                d_t(0, j) = -gen_detail::logistic(-t(0, j)) / static_cast<double>(mb);
            }
            adv /= static_cast<double>(mb);
            MlpGradients disc_g = mlp_backward(m.discriminator, disc_trace, d_t);
            Mat d_gamma_adv = disc_g.d_input.bottomRows(1);

            Mat enc_in(din + 1, mb);
            enc_in.topRows(din) = b.x;
            enc_in.bottomRows(1) = gamma;
            ForwardTrace enc_trace;
            Mat zhat = mlp_forward_batch(m.encoder, enc_in, &enc_trace);
            Mat z_err = zhat - z;
            const double rec = z_err.squaredNorm() / static_cast<double>(mb);
            Mat d_zhat = 2.0 * z_err / static_cast<double>(mb);
            MlpGradients enc_g = mlp_backward(m.encoder, enc_trace, d_zhat);
            Mat d_gamma_rec = enc_g.d_input.bottomRows(1);

            const double loss = adv + cfg.lambda * rec;
            if (!std::isfinite(loss)) throw NonFiniteLoss(step, loss);

            Mat d_gamma = d_gamma_adv + cfg.lambda * d_gamma_rec;
            MlpGradients gen_g = mlp_backward(m.generator, gen_trace, d_gamma);
            adam_step(gen_adam, gen_params, mlp_pack_gradients(m.generator, gen_g));
            mlp_unpack(m.generator, gen_params);

            adam_step(enc_adam, enc_params, cfg.beta * mlp_pack_gradients(m.encoder, enc_g));
            mlp_unpack(m.encoder, enc_params);
        }
    }
    return m;
}

// Dataset-level trainer over (p, T, C) features, dropping constant columns.
inline GenerativeModel train_generative(const Dataset& train, const ArchSpec& arch,
                                        const TrainConfig& cfg, const FeatureList& features = {}) {
    if (train.empty()) throw EmptyDataset("train: empty training set");
    FeatureList f = features.empty() ? varying_features(train) : features;
    if (f.empty()) throw ZeroVariance("all inputs");
    GenerativeModel m = train_generative_matrix(to_matrix(train, f), to_targets(train), arch, cfg);
    m.features = f;
    return m;
}

// ------------------------------- Sampling -------------------------------

// n_samples draws gamma_i = generator(x*, z_i), z_i ~ N(0, I), de-standardized.
inline Vec sample_generative_vec(const GenerativeModel& m, const Vec& x_raw, long n_samples,
                                 std::uint64_t seed) {
    if (x_raw.size() != m.dim()) throw DimensionMismatch("sample: query size");
    if (n_samples < 1) throw DimensionMismatch("sample: n_samples must be >= 1");
    Vec x = m.x_std.transform_row(x_raw);
    Rng rng(seed);
    Mat in(m.dim() + m.latent_dim, n_samples);
    for (long j = 0; j < n_samples; ++j) {
        in.col(j).head(m.dim()) = x;
        for (int k = 0; k < m.latent_dim; ++k) in(m.dim() + k, j) = rng.normal();
    }
    Mat gamma = mlp_forward_batch(m.generator, in);
    Vec out(n_samples);
    for (long j = 0; j < n_samples; ++j) out(j) = m.y_std.inverse_scalar(gamma(0, j));
    return out;
}

// Monte Carlo moments: sample mean and population variance about it.
inline Prediction predict_moments_vec(const GenerativeModel& m, const Vec& x_raw, long n_samples,
                                      std::uint64_t seed) {
    if (n_samples < 2) throw DimensionMismatch("predict_moments: n_samples must be >= 2");
    Vec draws = sample_generative_vec(m, x_raw, n_samples, seed);
    Prediction p;
    p.mean = draws.mean();
    p.variance = (draws.array() - p.mean).square().sum() / static_cast<double>(n_samples);
    p.n_samples = n_samples;
    return p;
}

inline Vec feature_query(const FeatureList& features, double pressure, double temperature,
                         int carbon) {
    DataPoint pt;
    pt.pressure = pressure;
    pt.temperature = temperature;
    pt.carbon_count = carbon;
    Vec x(features.size());
    for (std::size_t j = 0; j < features.size(); ++j) x(j) = feature_value(pt, features[j]);
    return x;
}

inline Vec sample_generative(const GenerativeModel& m, double pressure, double temperature,
                             int carbon, long n_samples, std::uint64_t seed) {
    if (m.features.empty()) throw DimensionMismatch("sample: model has no feature map");
    return sample_generative_vec(m, feature_query(m.features, pressure, temperature, carbon),
                                 n_samples, seed);
}

inline Prediction predict_moments(const GenerativeModel& m, double pressure, double temperature,
                                  int carbon, long n_samples, std::uint64_t seed) {
    if (m.features.empty()) throw DimensionMismatch("predict_moments: model has no feature map");
    return predict_moments_vec(m, feature_query(m.features, pressure, temperature, carbon),
                               n_samples, seed);
}

}  // namespace propsurro
