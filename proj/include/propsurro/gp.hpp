#pragma once

#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

#include "propsurro/common.hpp"
#include "propsurro/dataset.hpp"
#include "propsurro/linalg.hpp"
#include "propsurro/optim.hpp"
#include "propsurro/rng.hpp"

namespace propsurro {

// ------------------------------- Kernel -------------------------------

// Matern-3/2 family hyperparameters with one ARD lengthscale per input
// dimension. The default scaling constant inside the kernel is sqrt(6);
// sqrt3_variant switches to the textbook sqrt(3) form.
struct KernelParams {
    Vec lengthscales;
    double signal_sd = 1.0;
    double noise_variance = 0.0;
    bool sqrt3_variant = false;

    double scale_const() const { return sqrt3_variant ? std::sqrt(3.0) : std::sqrt(6.0); }
};

// k(r) = sigma^2 (1 + a s) exp(-a s), s = sqrt(sum_j (r_j / l_j)^2)
inline double matern32(const Vec& r, const KernelParams& kp) {
    if (r.size() != kp.lengthscales.size())
        throw DimensionMismatch("matern32: difference vector size != lengthscale count");
    const double a = kp.scale_const();
    const double s = std::sqrt(r.cwiseQuotient(kp.lengthscales).squaredNorm());
    const double sig2 = kp.signal_sd * kp.signal_sd;
    return sig2 * (1.0 + a * s) * std::exp(-a * s);
}

namespace gp_detail {

// Pairwise squared differences per dimension: D[j](i,k) = (X(i,j) - X(k,j))^2
inline std::vector<Mat> squared_diffs(const Mat& X) {
    const Eigen::Index n = X.rows(), d = X.cols();
    std::vector<Mat> D(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        Vec c = X.col(j);
        Mat diff = c.replicate(1, n) - c.transpose().replicate(n, 1);
        D[j] = diff.cwiseProduct(diff);
    }
    return D;
}

inline Mat kernel_matrix_from_diffs(const std::vector<Mat>& D, const KernelParams& kp) {
    const Eigen::Index n = D.empty() ? 0 : D[0].rows();
    Mat s2 = Mat::Zero(n, n);
    for (std::size_t j = 0; j < D.size(); ++j)
        s2 += D[j] / (kp.lengthscales(j) * kp.lengthscales(j));
    const double a = kp.scale_const();
    Mat s = s2.array().max(0.0).sqrt();
    const double sig2 = kp.signal_sd * kp.signal_sd;
    return (sig2 * (1.0 + a * s.array()) * (-a * s.array()).exp()).matrix();
}

}  // namespace gp_detail

inline Mat kernel_matrix(const Mat& X, const KernelParams& kp) {
    if (X.cols() != kp.lengthscales.size())
        throw DimensionMismatch("kernel_matrix: input dimension != lengthscale count");
    return gp_detail::kernel_matrix_from_diffs(gp_detail::squared_diffs(X), kp);
}

inline Vec kernel_cross(const Mat& X, const Vec& x, const KernelParams& kp) {
    if (X.cols() != x.size() || x.size() != kp.lengthscales.size())
        throw DimensionMismatch("kernel_cross: dimensions disagree");
    const double a = kp.scale_const();
    const double sig2 = kp.signal_sd * kp.signal_sd;
    Mat R = X.rowwise() - x.transpose();
    Vec s = (R.array().rowwise() / kp.lengthscales.transpose().array())
                .square()
                .rowwise()
                .sum()
                .sqrt();
    return (sig2 * (1.0 + a * s.array()) * (-a * s.array()).exp()).matrix();
}

// ------------------------------- Jitter -------------------------------

// Factor K + noise I, adding relative jitter 1e-8 * mean(diag) to the
// diagonal and escalating x10 up to 1e-2 * mean(diag) before failing.
struct JitteredFactor {
    CholeskyFactor chol;
    double jitter = 0.0;
};

inline JitteredFactor cholesky_with_jitter(Mat K) {
    const double scale = K.diagonal().mean();
    double rel = 1e-8;
    NotPositiveDefinite last(0);
    while (rel <= 1e-2 + 1e-15) {
        Mat Kj = K;
        Kj.diagonal().array() += rel * scale;
        try {
            JitteredFactor out{cholesky(Kj), rel * scale};
            return out;
        } catch (const NotPositiveDefinite& e) {
            last = e;
            rel *= 10.0;
        }
    }
    throw last;
}

// ------------------------------- Marginal likelihood -------------------------------

// Optimizer coordinates: [log l_1..d, log sigma, u] with
// noise = NOISE_FLOOR + exp(u); u approximates log noise away from the floor.
inline constexpr double kNoiseFloor = 1e-12;

inline Vec params_to_log(const KernelParams& kp) {
    Vec u(kp.lengthscales.size() + 2);
    for (Eigen::Index j = 0; j < kp.lengthscales.size(); ++j) u(j) = std::log(kp.lengthscales(j));
    u(kp.lengthscales.size()) = std::log(kp.signal_sd);
    u(kp.lengthscales.size() + 1) = std::log(std::max(kp.noise_variance - kNoiseFloor, kNoiseFloor));
    return u;
}

inline KernelParams params_from_log(const Vec& u, bool sqrt3_variant) {
    KernelParams kp;
    const Eigen::Index d = u.size() - 2;
    kp.lengthscales = u.head(d).array().exp();
    kp.signal_sd = std::exp(u(d));
    kp.noise_variance = kNoiseFloor + std::exp(u(d + 1));
    kp.sqrt3_variant = sqrt3_variant;
    return kp;
}

struct LmlResult {
    double value = 0.0;
    Vec gradient;  // w.r.t. log-hyperparameters [log l.., log sigma, u]
};

namespace gp_detail {

// Shared core over precomputed pairwise differences. The gradient needs the
// explicit inverse (an extra O(n^3)); line-search probes skip it.
inline LmlResult lml_from_diffs(const std::vector<Mat>& D, const Vec& y, const KernelParams& kp,
                                bool want_gradient) {
    const Eigen::Index n = y.size(), d = static_cast<Eigen::Index>(D.size());
    Mat Ks = kernel_matrix_from_diffs(D, kp);
    Mat K = Ks;
    K.diagonal().array() += kp.noise_variance;
    JitteredFactor jf = cholesky_with_jitter(std::move(K));

    Vec alpha = jf.chol.solve(y);
    LmlResult out;
    out.value = -0.5 * y.dot(alpha) - 0.5 * jf.chol.log_det() -
                0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    if (!want_gradient) return out;

    // B = alpha alpha^T - K^-1 ; grad_theta = 1/2 tr(B dK/dtheta)
    Mat B = alpha * alpha.transpose() - jf.chol.inverse();

    const double a = kp.scale_const();
    const double sig2 = kp.signal_sd * kp.signal_sd;
    Mat s2 = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < d; ++j)
        s2 += D[j] / (kp.lengthscales(j) * kp.lengthscales(j));
    Mat E = (-a * s2.array().max(0.0).sqrt()).exp();

    out.gradient = Vec(d + 2);
    // d k / d log l_j = sigma^2 a^2 exp(-a s) r_j^2 / l_j^2
    for (Eigen::Index j = 0; j < d; ++j) {
        double inv_l2 = 1.0 / (kp.lengthscales(j) * kp.lengthscales(j));
        out.gradient(j) = 0.5 * sig2 * a * a * inv_l2 * B.cwiseProduct(E.cwiseProduct(D[j])).sum();
    }
    // d K / d log sigma = 2 K_signal
    out.gradient(d) = B.cwiseProduct(Ks).sum();
    // d K / d u = exp(u) I ; exp(u) = noise - floor
    out.gradient(d + 1) = 0.5 * B.trace() * (kp.noise_variance - kNoiseFloor);
    return out;
}

}  // namespace gp_detail

// log p(y | X, theta) = -1/2 log|K| - 1/2 y^T K^-1 y - n/2 log 2pi,
// via Cholesky, with the analytic gradient in log-parameter space.
inline LmlResult log_marginal_likelihood(const Mat& X, const Vec& y, const KernelParams& kp) {
    const Eigen::Index n = X.rows(), d = X.cols();
    if (y.size() != n) throw DimensionMismatch("log_marginal_likelihood: |y| != rows(X)");
    if (kp.lengthscales.size() != d)
        throw DimensionMismatch("log_marginal_likelihood: lengthscale count");
    return gp_detail::lml_from_diffs(gp_detail::squared_diffs(X), y, kp, /*want_gradient=*/true);
}

// ------------------------------- Model -------------------------------

struct GpModel {
    FeatureList features;        // empty for matrix-level fits
    Standardizer x_std;
    Standardizer y_std;
    Mat X;                       // standardized training inputs
    Vec y;                       // standardized targets
    KernelParams params;
    CholeskyFactor chol;         // of K + noise I (+ jitter)
    Vec alpha;                   // (K + noise I)^-1 y
    double jitter = 0.0;

    Eigen::Index dim() const { return X.cols(); }
};

struct GpFitOptions {
    int restarts = 10;
    std::uint64_t seed = 0;
    int max_iterations = 150;
    double grad_tolerance = 1e-6;
    bool sqrt3_variant = false;
    bool learn_noise = true;
    double fixed_noise_variance = 0.0;  // used when learn_noise is false
    FeatureList features;               // empty = varying features of the dataset
};

namespace gp_detail {

inline void finish_model(GpModel& m) {
    Mat K = kernel_matrix(m.X, m.params);
    K.diagonal().array() += m.params.noise_variance;
    JitteredFactor jf = cholesky_with_jitter(std::move(K));
    m.chol = std::move(jf.chol);
    m.jitter = jf.jitter;
    m.alpha = m.chol.solve(m.y);
}

}  // namespace gp_detail

// Matrix-level fit on raw (unstandardized) inputs/targets; standardization
// happens inside. Used directly by the multi-fidelity models, where inputs
// are augmented beyond the (p, T, C) features.
inline GpModel gp_fit_matrix(const Mat& X_raw, const Vec& y_raw, const GpFitOptions& opt = {}) {
    const Eigen::Index n = X_raw.rows(), d = X_raw.cols();
    if (n < 1) throw EmptyDataset("gp_fit_matrix: no training rows");
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < d; ++j) names.push_back("input " + std::to_string(j));

    GpModel m;
    m.x_std = fit_standardizer_matrix(X_raw, names, /*allow_constant=*/true);
    Mat ym(n, 1);
    ym.col(0) = y_raw;
    m.y_std = fit_standardizer_matrix(ym, {"target"});
    m.X = m.x_std.transform(X_raw);
    m.y = (y_raw.array() - m.y_std.mean(0)) / m.y_std.sd(0);

    const Vec& y = m.y;
    const bool learn_noise = opt.learn_noise;
    const double fixed_u = std::log(std::max(opt.fixed_noise_variance, kNoiseFloor));

    // pairwise differences depend only on the data, not the hyperparameters
    const std::vector<Mat> D = gp_detail::squared_diffs(m.X);

    Objective negative_lml = [&, learn_noise, fixed_u](const Vec& u_in, Vec& grad) -> double {
        Vec u = u_in;
        if (!learn_noise) u(u.size() - 1) = fixed_u;
        KernelParams kp = params_from_log(u, opt.sqrt3_variant);
        LmlResult lml;
        try {
            lml = gp_detail::lml_from_diffs(D, y, kp, /*want_gradient=*/true);
        } catch (const NotPositiveDefinite&) {
            grad.setZero();
            return std::numeric_limits<double>::infinity();
        }
        grad = -lml.gradient;
        if (!learn_noise) grad(grad.size() - 1) = 0.0;
        return -lml.value;
    };

    // line-search probes only need the value, which skips the O(n^3) inverse
    ValueObjective negative_lml_value = [&, learn_noise, fixed_u](const Vec& u_in) -> double {
        Vec u = u_in;
        if (!learn_noise) u(u.size() - 1) = fixed_u;
        KernelParams kp = params_from_log(u, opt.sqrt3_variant);
        try {
            return -gp_detail::lml_from_diffs(D, y, kp, /*want_gradient=*/false).value;
        } catch (const NotPositiveDefinite&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    // start at unit lengthscales / unit signal on standardized data
    Vec u0(d + 2);
    u0.head(d).setZero();
    u0(d) = 0.0;
    u0(d + 1) = std::log(1e-2);
    if (!learn_noise) u0(d + 1) = fixed_u;

    Vec lo(d + 2), hi(d + 2);
    lo.head(d).setConstant(std::log(0.05));
    hi.head(d).setConstant(std::log(20.0));
    lo(d) = std::log(0.2);
    hi(d) = std::log(5.0);
    lo(d + 1) = std::log(1e-8);
    hi(d + 1) = std::log(0.5);

    LbfgsOptions lopt;
    lopt.max_iterations = opt.max_iterations;
    lopt.grad_tolerance = opt.grad_tolerance;
    Rng rng(opt.seed);
    LbfgsResult best =
        lbfgs_multistart(negative_lml, u0, opt.restarts, rng, lo, hi, lopt, negative_lml_value);

    Vec u_best = best.x;
    if (!learn_noise) u_best(u_best.size() - 1) = fixed_u;
    m.params = params_from_log(u_best, opt.sqrt3_variant);
    if (!learn_noise) m.params.noise_variance = opt.fixed_noise_variance;
    gp_detail::finish_model(m);
    return m;
}

// Dataset-level fit over (p, T, C) features, dropping constant columns
// unless an explicit feature list is given.
inline GpModel gp_fit(const Dataset& train, const GpFitOptions& opt = {}) {
    if (train.empty()) throw EmptyDataset("gp_fit: empty training set");
    FeatureList features = opt.features.empty() ? varying_features(train) : opt.features;
    if (features.empty()) throw ZeroVariance("all inputs");
    GpModel m = gp_fit_matrix(to_matrix(train, features), to_targets(train), opt);
    m.features = features;
    return m;
}

// Build a model from fixed hyperparameters (no optimization).
inline GpModel gp_build(const Mat& X_raw, const Vec& y_raw, const KernelParams& params) {
    GpModel m;
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < X_raw.cols(); ++j) names.push_back("input " + std::to_string(j));
    m.x_std = fit_standardizer_matrix(X_raw, names, /*allow_constant=*/true);
    Mat ym(X_raw.rows(), 1);
    ym.col(0) = y_raw;
    m.y_std = fit_standardizer_matrix(ym, {"target"});
    m.X = m.x_std.transform(X_raw);
    m.y = (y_raw.array() - m.y_std.mean(0)) / m.y_std.sd(0);
    m.params = params;
    gp_detail::finish_model(m);
    return m;
}

// Posterior mean (k_* K^-1 y) and variance (k_** - k_* K^-1 k_*^T + noise)
// at one raw input, de-standardized to output units.
inline Prediction gp_predict_vec(const GpModel& m, const Vec& x_raw) {
    if (x_raw.size() != m.dim()) throw DimensionMismatch("gp_predict: query size");
    Vec x = m.x_std.transform_row(x_raw);
    Vec ks = kernel_cross(m.X, x, m.params);
    const double kss = m.params.signal_sd * m.params.signal_sd;
    Vec q = m.chol.solve_lower(ks);
    double mean = ks.dot(m.alpha);
    double var = kss - q.squaredNorm();
    if (var < 0.0) {
        if (var < -1e-10)
            std::fprintf(stderr, "gp_predict: clamping negative variance %.3e\n", var);
        var = 0.0;
    }
    var += m.params.noise_variance;
    Prediction out;
    out.mean = m.y_std.inverse_scalar(mean);
    out.variance = var * m.y_std.sd(0) * m.y_std.sd(0);
    out.n_samples = 0;
    return out;
}

// (p, T, C) front end that selects the model's feature columns.
inline Prediction gp_predict(const GpModel& m, double pressure, double temperature, int carbon) {
    if (m.features.empty()) throw DimensionMismatch("gp_predict: model has no feature map");
    Vec x(m.features.size());
    DataPoint p;
    p.pressure = pressure;
    p.temperature = temperature;
    p.carbon_count = carbon;
    for (std::size_t j = 0; j < m.features.size(); ++j) x(j) = feature_value(p, m.features[j]);
    return gp_predict_vec(m, x);
}

}  // namespace propsurro
