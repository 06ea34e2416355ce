#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "propsurro/common.hpp"
#include "propsurro/dataset.hpp"
#include "propsurro/generative.hpp"
#include "propsurro/gp.hpp"
#include "propsurro/metrics.hpp"
#include "propsurro/rng.hpp"

namespace propsurro {

// ------------------------------- Fidelity pair -------------------------------

struct FidelityPair {
    Dataset low;
    Dataset high;
};

inline void validate_pair(const FidelityPair& pair) {
    if (pair.low.empty()) throw EmptyDataset("fidelity pair: low set is empty");
    if (pair.high.empty()) throw EmptyDataset("fidelity pair: high set is empty");
}

// Features that vary across the union of both sets, so low and high models
// share one input layout.
inline FeatureList pair_features(const FidelityPair& pair) {
    Dataset joint;
    joint.points = pair.low.points;
    joint.points.insert(joint.points.end(), pair.high.points.begin(), pair.high.points.end());
    FeatureList f = varying_features(joint);
    if (f.empty()) throw ZeroVariance("all inputs");
    return f;
}

// ------------------------------- NARGP -------------------------------

// Recursive two-level GP: the high-fidelity response is regressed over the
// augmented input (x, f_L(x)) where f_L is the low-fidelity posterior mean.
struct NargpModel {
    FeatureList features;
    GpModel low_gp;
    GpModel high_gp;  // input dimension = |features| + 1
};

inline NargpModel nargp_fit(const FidelityPair& pair, std::uint64_t seed,
                            const GpFitOptions& base_opt = {}) {
    validate_pair(pair);
    NargpModel m;
    m.features = pair_features(pair);

    GpFitOptions low_opt = base_opt;
    low_opt.features = m.features;
    low_opt.seed = mix_seed(seed, 1);
    m.low_gp = gp_fit(pair.low, low_opt);

    Mat Xh = to_matrix(pair.high, m.features);
    Mat Xaug(Xh.rows(), Xh.cols() + 1);
    Xaug.leftCols(Xh.cols()) = Xh;
    for (Eigen::Index i = 0; i < Xh.rows(); ++i)
        Xaug(i, Xh.cols()) = gp_predict_vec(m.low_gp, Xh.row(i).transpose()).mean;

    GpFitOptions high_opt = base_opt;
    high_opt.features.clear();
    high_opt.seed = mix_seed(seed, 2);
    m.high_gp = gp_fit_matrix(Xaug, to_targets(pair.high), high_opt);
    return m;
}

// Uncertainty propagation: draw the low posterior at x*, push each draw
// through the high GP, and pool with the law of total variance
// (mean of variances + variance of means).
inline Prediction nargp_predict_vec(const NargpModel& m, const Vec& x_raw, long n_samples,
                                    std::uint64_t seed) {
    if (n_samples < 2) throw DimensionMismatch("nargp_predict: n_samples must be >= 2");
    Prediction low = gp_predict_vec(m.low_gp, x_raw);
    const double low_sd = std::sqrt(std::max(low.variance, 0.0));
    Rng rng(seed);
    Vec means(n_samples), vars(n_samples);
    Vec xa(x_raw.size() + 1);
    xa.head(x_raw.size()) = x_raw;
    for (long s = 0; s < n_samples; ++s) {
        xa(x_raw.size()) = low.mean + low_sd * rng.normal();
        Prediction h = gp_predict_vec(m.high_gp, xa);
        means(s) = h.mean;
        vars(s) = h.variance;
    }
    Prediction out;
    out.mean = means.mean();
    out.variance = vars.mean() + (means.array() - out.mean).square().sum() /
                                     static_cast<double>(n_samples);
    out.n_samples = n_samples;
    return out;
}

inline Prediction nargp_predict(const NargpModel& m, double pressure, double temperature,
                                int carbon, long n_samples = 1000, std::uint64_t seed = 0) {
    return nargp_predict_vec(m, feature_query(m.features, pressure, temperature, carbon),
                             n_samples, seed);
}

// ------------------------------- Multi-fidelity generative -------------------------------

// gamma_H = f_phi(x, gamma_L, z) where gamma_L comes from a cheap GP proxy of
// the low-fidelity source.
struct MfGenerativeModel {
    FeatureList features;
    GpModel low_proxy;
    GenerativeModel core;  // input dimension = |features| + 1 (+ latent)
};

inline MfGenerativeModel mf_generative_fit(const FidelityPair& pair, const ArchSpec& arch,
                                           const TrainConfig& cfg,
                                           const GpFitOptions& proxy_opt = {}) {
    validate_pair(pair);
    MfGenerativeModel m;
    m.features = pair_features(pair);

    GpFitOptions popt = proxy_opt;
    popt.features = m.features;
    popt.seed = mix_seed(cfg.seed, 101);
    m.low_proxy = gp_fit(pair.low, popt);

    Mat Xh = to_matrix(pair.high, m.features);
    Mat Xaug(Xh.rows(), Xh.cols() + 1);
    Xaug.leftCols(Xh.cols()) = Xh;
    for (Eigen::Index i = 0; i < Xh.rows(); ++i)
        Xaug(i, Xh.cols()) = gp_predict_vec(m.low_proxy, Xh.row(i).transpose()).mean;

    m.core = train_generative_matrix(Xaug, to_targets(pair.high), arch, cfg);
    return m;
}

inline Vec mf_generative_sample_vec(const MfGenerativeModel& m, const Vec& x_raw, long n_samples,
                                    std::uint64_t seed) {
    Vec xa(x_raw.size() + 1);
    xa.head(x_raw.size()) = x_raw;
    xa(x_raw.size()) = gp_predict_vec(m.low_proxy, x_raw).mean;
    return sample_generative_vec(m.core, xa, n_samples, seed);
}

inline Prediction mf_generative_predict_vec(const MfGenerativeModel& m, const Vec& x_raw,
                                            long n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw DimensionMismatch("mf_generative_predict: n_samples must be >= 2");
    Vec draws = mf_generative_sample_vec(m, x_raw, n_samples, seed);
    Prediction p;
    p.mean = draws.mean();
    p.variance = (draws.array() - p.mean).square().sum() / static_cast<double>(n_samples);
    p.n_samples = n_samples;
    return p;
}

inline Prediction mf_generative_predict(const MfGenerativeModel& m, double pressure,
                                        double temperature, int carbon, long n_samples = 2000,
                                        std::uint64_t seed = 0) {
    return mf_generative_predict_vec(m, feature_query(m.features, pressure, temperature, carbon),
                                     n_samples, seed);
}

// ------------------------------- Fusion experiment -------------------------------

enum class SurrogateKind { Gp, Generative };

inline std::string to_string(SurrogateKind k) {
    return k == SurrogateKind::Gp ? "gp" : "generative";
}

struct FusionConfig {
    SurrogateKind kind = SurrogateKind::Generative;
    ArchSpec arch;
    TrainConfig train;        // generative arms
    GpFitOptions gp;          // gp arms
    long n_samples = 2000;    // Monte Carlo draws for generative predictions
    std::uint64_t sample_seed = 0;
};

struct FusionRow {
    std::string model;
    int n_added = 0;
    double pressure = 0.0;
    double temperature = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double ref_value = 0.0;
    double rel_error = 0.0;
};

struct FusionReport {
    std::vector<FusionRow> rows;
};

// One concatenation arm: merge the first n_added anchor points into the
// training table, train one model, and score it against the reference curve.
inline std::vector<FusionRow> fusion_arm(const Dataset& base, const Dataset& anchors,
                                         std::size_t n_added, const Dataset& reference,
                                         const FusionConfig& cfg) {
    if (base.empty()) throw EmptyDataset("fusion: empty base dataset");
    if (reference.empty()) throw EmptyDataset("fusion: empty reference curve");
    if (n_added > anchors.points.size())
        throw DimensionMismatch("fusion: n_added exceeds anchor count");
    Dataset extra;
    extra.name = anchors.name;
    extra.points.assign(anchors.points.begin(), anchors.points.begin() + static_cast<long>(n_added));
    Dataset train_set = fuse(base, extra);

    PointPredictor predict;
    GpModel gp_model;
    GenerativeModel gen_model;
    if (cfg.kind == SurrogateKind::Gp) {
        gp_model = gp_fit(train_set, cfg.gp);
        predict = [&gp_model](double p, double T, int C) { return gp_predict(gp_model, p, T, C); };
    } else {
        gen_model = train_generative(train_set, cfg.arch, cfg.train);
        predict = [&gen_model, &cfg](double p, double T, int C) {
            return predict_moments(gen_model, p, T, C, cfg.n_samples,
                                   mix_seed(cfg.sample_seed,
                                            static_cast<std::uint64_t>(T * 1000.0 + p)));
        };
    }

    std::vector<FusionRow> rows;
    for (const DataPoint& ref : reference.points) {
        if (ref.density == 0.0) throw ZeroTruthValue("fusion: reference density is zero");
        Prediction pr = predict(ref.pressure, ref.temperature, ref.carbon_count);
        FusionRow row;
        row.model = to_string(cfg.kind);
        row.n_added = static_cast<int>(n_added);
        row.pressure = ref.pressure;
        row.temperature = ref.temperature;
        row.mean = pr.mean;
        row.sd = std::sqrt(std::max(pr.variance, 0.0));
        row.ref_value = ref.density;
        row.rel_error = std::abs(pr.mean - ref.density) / std::abs(ref.density);
        rows.push_back(row);
    }
    return rows;
}

// Full study over arms n_added = 0 .. |anchors|.
inline FusionReport fusion_experiment(const Dataset& base, const Dataset& anchors,
                                      const Dataset& reference, const FusionConfig& cfg) {
    FusionReport report;
    for (std::size_t n = 0; n <= anchors.points.size(); ++n) {
        std::vector<FusionRow> rows = fusion_arm(base, anchors, n, reference, cfg);
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }
    return report;
}

inline void save_fusion_csv(const FusionReport& r, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "model,n_added,pressure_mpa,temperature_k,mean,sd,ref_value,rel_error\n");
    for (const FusionRow& row : r.rows)
        std::fprintf(f, "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.model.c_str(),
                     row.n_added, row.pressure, row.temperature, row.mean, row.sd, row.ref_value,
                     row.rel_error);
    std::fclose(f);
}

}  // namespace propsurro
