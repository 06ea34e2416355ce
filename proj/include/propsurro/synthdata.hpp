#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "propsurro/common.hpp"
#include "propsurro/dataset.hpp"
#include "propsurro/rng.hpp"

namespace propsurro {

// Analytic alkane-like density surface: a thermally expanding liquid branch
// blended into a capped ideal-gas branch through a logistic transition whose
// center rises with pressure and carbon count. Defaults are calibrated so the
// surface is strictly decreasing in T and nondecreasing in p and C over
// [1,200] MPa x [300,950] K x C in [7,16].
struct OracleParams {
    // liquid branch: rho_ref(C) - expansion*(T - 320) + compress*p
    double liquid_base = 660.0;      // kg/m^3, rho_ref(C) = liquid_base + carbon_slope*C
    double carbon_slope = 7.0;       // kg/m^3 per carbon
    double expansion_slope = 0.55;   // kg/m^3 per K
    double compress_slope = 0.2;     // kg/m^3 per MPa

    // transition center T0(p, C) = center_base + center_carbon*C
    //                              + center_logp*log10(p) + center_shift
    double center_base = 525.0;      // K
    double center_carbon = 11.0;     // K per carbon
    double center_logp = 45.0;       // K per decade of pressure
    double center_shift = 0.0;       // K, fidelity offset

    // transition width w(p) = (width_base + width_logp*log10(p)) * width_scale
    double width_base = 12.0;        // K
    double width_logp = 1.3;         // K per decade of pressure
    double width_scale = 1.0;        // < 1 sharpens the transition

    // gas branch: molar mass M(C) = molar_base + molar_carbon*C
    double molar_base = 0.002;       // kg/mol
    double molar_carbon = 0.014;     // kg/mol per carbon

    double noise_sd = 0.0;           // kg/m^3, applied only by generate_table
    std::uint64_t seed = 0;
};

// Variant emulating a more trusted reference source: the transcritical drop
// sits earlier in T and is sharper than the baseline surface.
inline OracleParams high_fidelity_variant(OracleParams p, double center_shift = -20.0,
                                          double width_scale = 0.6) {
    p.center_shift = center_shift;
    p.width_scale = width_scale;
    return p;
}

namespace oracle_detail {

inline void check_domain(double p, double T, int C) {
    if (!(p >= 1.0 && p <= 200.0))
        throw OutOfDomain("pressure " + std::to_string(p) + " MPa outside [1, 200]");
    if (!(T >= 300.0 && T <= 950.0))
        throw OutOfDomain("temperature " + std::to_string(T) + " K outside [300, 950]");
    if (C < 7 || C > 16)
        throw OutOfDomain("carbon count " + std::to_string(C) + " outside [7, 16]");
}

inline double liquid_branch(double p, double T, int C, const OracleParams& o) {
    return o.liquid_base + o.carbon_slope * C - o.expansion_slope * (T - 320.0) +
           o.compress_slope * p;
}

// ideal-gas density capped below the liquid value: g = L*rho_i / (rho_i + L)
inline double gas_branch(double p, double T, int C, double liquid, const OracleParams& o) {
    const double molar = o.molar_base + o.molar_carbon * C;
    const double ideal = p * 1e6 * molar / (8.314 * T);
    return liquid * ideal / (ideal + liquid);
}

}  // namespace oracle_detail

// rho = gas + (liquid - gas) * sigmoid((T0(p,C) - T) / w(p))
inline double oracle_density(double p, double T, int C, const OracleParams& o = {}) {
    oracle_detail::check_domain(p, T, C);
    const double liquid = oracle_detail::liquid_branch(p, T, C, o);
    const double gas = oracle_detail::gas_branch(p, T, C, liquid, o);
    const double center =
        o.center_base + o.center_carbon * C + o.center_logp * std::log10(p) + o.center_shift;
    const double width = (o.width_base + o.width_logp * std::log10(p)) * o.width_scale;
    const double u = (center - T) / width;
    const double sig = 1.0 / (1.0 + std::exp(-u));
    return gas + (liquid - gas) * sig;
}

// Full Cartesian grid with optional additive N(0, noise_sd) perturbation.
inline Dataset generate_table(const std::vector<double>& pressures,
                              const std::vector<double>& temperatures,
                              const std::vector<int>& carbons, const OracleParams& o = {}) {
    Dataset out;
    out.name = "synthetic";
    Rng rng(o.seed);
    for (double p : pressures)
        for (double T : temperatures)
            for (int C : carbons) {
                DataPoint pt;
                pt.pressure = p;
                pt.temperature = T;
                pt.carbon_count = C;
                pt.density = oracle_density(p, T, C, o);
                if (o.noise_sd > 0.0) pt.density += o.noise_sd * rng.normal();
                pt.fidelity = Fidelity::Low;
                out.points.push_back(pt);
            }
    validate_dataset(out);
    return out;
}

// The tabulation grid used throughout the experiments: 8 pressures x 30
// temperatures x 5 carbon counts.
inline std::vector<double> standard_pressures() { return {3, 4, 6, 8, 10, 20, 100, 150}; }

inline std::vector<double> standard_temperatures() {
    std::vector<double> t;
    for (double T = 320.0; T <= 900.0 + 1e-9; T += 20.0) t.push_back(T);
    return t;
}

inline std::vector<int> standard_carbons() { return {8, 9, 10, 12, 16}; }

}  // namespace propsurro
