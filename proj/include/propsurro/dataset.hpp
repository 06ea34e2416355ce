#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "propsurro/common.hpp"
#include "propsurro/rng.hpp"

namespace propsurro {

enum class Fidelity { Low, High };

inline const char* to_string(Fidelity f) { return f == Fidelity::Low ? "low" : "high"; }

// One labeled observation: density at a (pressure, temperature, carbon count)
// state, tagged with the source fidelity.
struct DataPoint {
    double pressure = 0.0;     // MPa
    double temperature = 0.0;  // K
    int carbon_count = 0;      // C in CnH2n+2
    double density = 0.0;      // kg/m^3
    Fidelity fidelity = Fidelity::Low;
};

namespace detail {
using PointKey = std::tuple<double, double, int, int>;
inline PointKey key_of(const DataPoint& p) {
    return {p.pressure, p.temperature, p.carbon_count, static_cast<int>(p.fidelity)};
}
}  // namespace detail

struct Dataset {
    std::vector<DataPoint> points;
    std::string name;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

// Enforces the per-point positivity invariants and key uniqueness.
inline void validate_dataset(const Dataset& d) {
    std::map<detail::PointKey, std::size_t> seen;
    for (std::size_t i = 0; i < d.points.size(); ++i) {
        const DataPoint& p = d.points[i];
        if (!(p.pressure > 0.0) || !(p.temperature > 0.0) || !(p.density > 0.0))
            throw NonPositiveValue("dataset '" + d.name + "': non-positive value at point " +
                                   std::to_string(i));
        if (p.carbon_count < 1)
            throw NonPositiveValue("dataset '" + d.name + "': carbon_count < 1 at point " +
                                   std::to_string(i));
        auto [it, inserted] = seen.emplace(detail::key_of(p), i);
        if (!inserted)
            throw DuplicateKey("dataset '" + d.name + "': duplicate key at points " +
                               std::to_string(it->second) + " and " + std::to_string(i));
    }
}

// ------------------------------- CSV -------------------------------
// Comma separated, '.' decimal, header row with named columns
// pressure_mpa, temperature_k, carbon_count, density_kgm3 and an optional
// fidelity column ("low"/"high", case-insensitive). Extra columns are ignored.

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline double parse_number(const std::string& cell, long row) {
    const std::string t = trim(cell);
    if (t.empty()) throw NonNumericCell(row, cell);
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw NonNumericCell(row, cell);
    }
    if (pos != t.size() || !std::isfinite(v)) throw NonNumericCell(row, cell);
    return v;
}

}  // namespace detail

inline Dataset load_csv(const std::string& path, Fidelity fidelity_default) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV file '" + path + "'");

    auto header = detail::split_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i)
        col[detail::lower(detail::trim(header[i]))] = i;

    for (const char* required : {"pressure_mpa", "temperature_k", "carbon_count", "density_kgm3"})
        if (!col.count(required)) throw MissingColumn(required);
    const bool has_fidelity = col.count("fidelity") > 0;

    Dataset d;
    d.name = path;
    long row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        ++row;
        auto cells = detail::split_line(line);
        auto cell = [&](const char* name) -> const std::string& {
            std::size_t i = col.at(name);
            if (i >= cells.size()) throw NonNumericCell(row, "");
            return cells[i];
        };
        DataPoint p;
        p.pressure = detail::parse_number(cell("pressure_mpa"), row);
        p.temperature = detail::parse_number(cell("temperature_k"), row);
        double carbon = detail::parse_number(cell("carbon_count"), row);
        if (std::abs(carbon - std::round(carbon)) > 1e-9)
            throw NonNumericCell(row, cell("carbon_count"));
        p.carbon_count = static_cast<int>(std::llround(carbon));
        p.density = detail::parse_number(cell("density_kgm3"), row);
        p.fidelity = fidelity_default;
        if (has_fidelity) {
            std::string f = detail::lower(detail::trim(cells.at(col.at("fidelity"))));
            if (f == "low") p.fidelity = Fidelity::Low;
            else if (f == "high") p.fidelity = Fidelity::High;
            else if (!f.empty()) throw NonNumericCell(row, f);
        }
        d.points.push_back(p);
    }
    validate_dataset(d);
    return d;
}

inline void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write CSV file '" + path + "'");
    out << "pressure_mpa,temperature_k,carbon_count,density_kgm3,fidelity\n";
    char buf[160];
    for (const DataPoint& p : d.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%s\n", p.pressure, p.temperature,
                      p.carbon_count, p.density, to_string(p.fidelity));
        out << buf;
    }
}

// ------------------------------- Split -------------------------------

struct SplitSpec {
    double train_fraction = 0.8;
    double subset_fraction = 1.0;
    std::uint64_t seed = 0;
};

// Random split. The test set is the fixed complement of the full training
// pool; subset_fraction shrinks only the training side, so models trained on
// 10%/50% subsets are scored against the same held-out points.
inline std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& s) {
    if (d.empty()) throw EmptyDataset("split: dataset '" + d.name + "' is empty");
    if (!(s.train_fraction > 0.0 && s.train_fraction <= 1.0) ||
        !(s.subset_fraction > 0.0 && s.subset_fraction <= 1.0))
        throw Error("split: fractions must lie in (0, 1]");
    const std::size_t n = d.size();
    const std::size_t n_pool =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(s.train_fraction * n)));
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(s.subset_fraction * s.train_fraction * n));
    n_train = std::min(n_train, n_pool);

    Rng rng(s.seed);
    std::vector<std::size_t> perm = rng.permutation(n);

    Dataset train, test;
    train.name = d.name + "/train";
    test.name = d.name + "/test";
    for (std::size_t i = 0; i < n_train; ++i) train.points.push_back(d.points[perm[i]]);
    for (std::size_t i = n_pool; i < n; ++i) test.points.push_back(d.points[perm[i]]);
    return {std::move(train), std::move(test)};
}

// ------------------------------- Features -------------------------------

enum class Feature { Pressure, Temperature, Carbon };

inline const char* to_string(Feature f) {
    switch (f) {
        case Feature::Pressure: return "pressure";
        case Feature::Temperature: return "temperature";
        default: return "carbon_count";
    }
}

using FeatureList = std::vector<Feature>;

inline FeatureList all_features() {
    return {Feature::Pressure, Feature::Temperature, Feature::Carbon};
}

inline double feature_value(const DataPoint& p, Feature f) {
    switch (f) {
        case Feature::Pressure: return p.pressure;
        case Feature::Temperature: return p.temperature;
        default: return static_cast<double>(p.carbon_count);
    }
}

inline Mat to_matrix(const Dataset& d, const FeatureList& features) {
    Mat X(d.size(), features.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < features.size(); ++j)
            X(i, j) = feature_value(d.points[i], features[j]);
    return X;
}

inline Vec to_targets(const Dataset& d) {
    Vec y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) y(i) = d.points[i].density;
    return y;
}

// Features that actually vary in the dataset; a fixed-fuel table drops the
// carbon column rather than feeding a constant into the standardizer.
inline FeatureList varying_features(const Dataset& d) {
    FeatureList out;
    for (Feature f : all_features()) {
        bool varies = false;
        for (std::size_t i = 1; i < d.size() && !varies; ++i)
            varies = feature_value(d.points[i], f) != feature_value(d.points[0], f);
        if (varies) out.push_back(f);
    }
    return out;
}

// ------------------------------- Standardizer -------------------------------

struct Standardizer {
    Vec mean;
    Vec sd;  // population standard deviation, strictly positive

    Eigen::Index dim() const { return mean.size(); }

    Mat transform(const Mat& X) const {
        if (X.cols() != dim()) throw DimensionMismatch("standardizer: column count");
        return (X.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
    }
    Vec transform_row(const Vec& x) const {
        if (x.size() != dim()) throw DimensionMismatch("standardizer: row size");
        return (x - mean).cwiseQuotient(sd);
    }
    Mat inverse_transform(const Mat& X) const {
        if (X.cols() != dim()) throw DimensionMismatch("standardizer: column count");
        return (X.array().rowwise() * sd.transpose().array()).rowwise() + mean.transpose().array();
    }
    double transform_scalar(double v) const { return (v - mean(0)) / sd(0); }
    double inverse_scalar(double v) const { return v * sd(0) + mean(0); }
};

// A constant column is an error by default. Matrix-level fits pass
// allow_constant so a column that is fixed within one design (a pressure
// shared by every high-fidelity run, say) standardizes to zero and drops out
// of the distances instead of aborting; an all-constant matrix still throws.
inline Standardizer fit_standardizer_matrix(const Mat& X, const std::vector<std::string>& names,
                                            bool allow_constant = false) {
    if (X.rows() < 2) throw Error("standardizer: need at least 2 points");
    Standardizer s;
    s.mean = X.colwise().mean();
    s.sd = Vec(X.cols());
    Eigen::Index n_constant = 0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double var = (X.col(j).array() - s.mean(j)).square().mean();
        if (!(var > 0.0)) {
            if (!allow_constant)
                throw ZeroVariance(j < static_cast<Eigen::Index>(names.size())
                                       ? names[j] : "feature " + std::to_string(j));
            ++n_constant;
            s.sd(j) = 1.0;
            continue;
        }
        s.sd(j) = std::sqrt(var);
    }
    if (n_constant == X.cols()) throw ZeroVariance("all inputs");
    return s;
}

inline Standardizer fit_standardizer(const Dataset& d, const FeatureList& features) {
    std::vector<std::string> names;
    for (Feature f : features) names.emplace_back(to_string(f));
    return fit_standardizer_matrix(to_matrix(d, features), names);
}

inline Standardizer fit_target_standardizer(const Dataset& d) {
    Mat y(d.size(), 1);
    y.col(0) = to_targets(d);
    return fit_standardizer_matrix(y, {"density"});
}

// ------------------------------- Fuse -------------------------------

// Concatenate extra (trusted, high-fidelity) points onto base. A shared
// (p, T, C) state with different densities is a collision regardless of tag.
inline Dataset fuse(const Dataset& base, const Dataset& extra) {
    std::map<std::tuple<double, double, int>, double> seen;
    for (const DataPoint& p : base.points)
        seen[{p.pressure, p.temperature, p.carbon_count}] = p.density;
    for (const DataPoint& p : extra.points) {
        auto it = seen.find({p.pressure, p.temperature, p.carbon_count});
        if (it != seen.end() && it->second != p.density)
            throw KeyCollision("fuse: conflicting densities at (p=" + std::to_string(p.pressure) +
                               ", T=" + std::to_string(p.temperature) +
                               ", C=" + std::to_string(p.carbon_count) + ")");
    }
    Dataset out = base;
    out.name = base.name + "+" + extra.name;
    for (DataPoint p : extra.points) {
        p.fidelity = Fidelity::High;
        out.points.push_back(p);
    }
    validate_dataset(out);
    return out;
}

}  // namespace propsurro
