#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "propsurro/common.hpp"

namespace propsurro {

// Mean of squared relative errors, (1/N) sum ((y_i - yhat_i)/y_i)^2. The
// source formula carries an L2 name; the implementation follows the printed
// definition, which squares each relative error before averaging.
inline double l2_mre(const Vec& truth, const Vec& pred) {
    if (truth.size() != pred.size())
        throw LengthMismatch("l2_mre: truth and prediction lengths differ");
    if (truth.size() == 0) throw LengthMismatch("l2_mre: empty vectors");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (truth(i) == 0.0) throw ZeroTruthValue("l2_mre: truth entry " + std::to_string(i));
        const double rel = (truth(i) - pred(i)) / truth(i);
        acc += rel * rel;
    }
    return acc / static_cast<double>(truth.size());
}

// Coefficient of determination, 1 - SS_res / SS_tot.
inline double r2_score(const Vec& truth, const Vec& pred) {
    if (truth.size() != pred.size())
        throw LengthMismatch("r2_score: truth and prediction lengths differ");
    if (truth.size() < 2) throw LengthMismatch("r2_score: need at least 2 points");
    const double mean = truth.mean();
    const double ss_tot = (truth.array() - mean).square().sum();
    if (ss_tot == 0.0) throw ConstantTruth("r2_score: truth vector is constant");
    const double ss_res = (truth - pred).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

// cv = sigma / mu for one predictive distribution.
inline double coefficient_of_variation(const Prediction& p) {
    if (p.mean == 0.0) throw ZeroMean("coefficient_of_variation: zero mean");
    if (p.variance < 0.0)
        throw NonPositiveValue("coefficient_of_variation: negative variance");
    return std::sqrt(p.variance) / p.mean;
}

// ------------------------------- cv map -------------------------------

// Grid sweep recording prediction uncertainty across operating conditions:
// pressures log-spaced over [10^log10_p_lo, 10^log10_p_hi], temperatures
// stepped linearly. The defaults cover [0.5, 2.5] decades and 320..900 K in
// 20 K steps (30 temperature rows).
struct CvMapSpec {
    double log10_p_lo = 0.5;
    double log10_p_hi = 2.5;
    int n_pressures = 40;
    double temp_lo = 320.0;
    double temp_hi = 900.0;
    double temp_step = 20.0;
    int carbon_count = 8;
};

inline void validate_cv_map_spec(const CvMapSpec& s) {
    if (!(s.log10_p_hi > s.log10_p_lo)) throw ConfigError("cv map: degenerate pressure range");
    if (s.n_pressures < 2) throw ConfigError("cv map: need at least 2 pressure nodes");
    if (!(s.temp_hi > s.temp_lo)) throw ConfigError("cv map: degenerate temperature range");
    if (!(s.temp_step > 0.0)) throw ConfigError("cv map: temperature step must be positive");
    const double span = (s.temp_hi - s.temp_lo) / s.temp_step;
    if (std::abs(span - std::round(span)) > 1e-9)
        throw ConfigError("cv map: temperature step does not divide the range");
}

struct CvMapResult {
    Vec pressures;      // MPa, log-spaced
    Vec temperatures;   // K, rows of the grid
    Mat cv;             // n_temperatures x n_pressures
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
};

using PointPredictor = std::function<Prediction(double pressure, double temperature, int carbon)>;

// Sweep the grid; a cell where prediction throws is marked invalid and the
// sweep continues.
inline CvMapResult cv_map(const PointPredictor& predict, const CvMapSpec& spec) {
    validate_cv_map_spec(spec);
    const int nt = static_cast<int>(std::round((spec.temp_hi - spec.temp_lo) / spec.temp_step)) + 1;
    const int np = spec.n_pressures;
    CvMapResult out;
    out.pressures = Vec(np);
    for (int i = 0; i < np; ++i) {
        const double frac = static_cast<double>(i) / (np - 1);
        out.pressures(i) = std::pow(10.0, spec.log10_p_lo + frac * (spec.log10_p_hi - spec.log10_p_lo));
    }
    out.temperatures = Vec(nt);
    for (int i = 0; i < nt; ++i) out.temperatures(i) = spec.temp_lo + i * spec.temp_step;
    out.cv = Mat::Zero(nt, np);
    out.valid.setConstant(nt, np, false);
    for (int ti = 0; ti < nt; ++ti)
        for (int pi = 0; pi < np; ++pi) {
            try {
                Prediction p = predict(out.pressures(pi), out.temperatures(ti), spec.carbon_count);
                out.cv(ti, pi) = coefficient_of_variation(p);
                out.valid(ti, pi) = true;
            } catch (const Error&) {
                out.cv(ti, pi) = std::numeric_limits<double>::quiet_NaN();
            }
        }
    return out;
}

inline void save_cv_map_csv(const CvMapResult& r, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "pressure_mpa,temperature_k,cv,valid\n");
    for (Eigen::Index ti = 0; ti < r.temperatures.size(); ++ti)
        for (Eigen::Index pi = 0; pi < r.pressures.size(); ++pi) {
            if (r.valid(ti, pi))
                std::fprintf(f, "%.17g,%.17g,%.17g,1\n", r.pressures(pi), r.temperatures(ti),
                             r.cv(ti, pi));
            else
                std::fprintf(f, "%.17g,%.17g,,0\n", r.pressures(pi), r.temperatures(ti));
        }
    std::fclose(f);
}

}  // namespace propsurro
