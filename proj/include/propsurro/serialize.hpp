#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "propsurro/common.hpp"
#include "propsurro/dataset.hpp"
#include "propsurro/generative.hpp"
#include "propsurro/gp.hpp"

namespace propsurro {

// Model files are self-describing JSON documents:
//   { "format": "propsurro-model", "version": 1, "kind": "gp" | "generative", ... }
// Loading rejects unknown formats, versions, and kinds with ModelIoError.

inline constexpr int kModelFormatVersion = 1;

namespace ser_detail {

using nlohmann::json;

inline json vec_to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vec vec_from_json(const json& a) {
    Vec v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

inline json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Mat mat_from_json(const json& rows) {
    const std::size_t nr = rows.size();
    const std::size_t nc = nr == 0 ? 0 : rows[0].size();
    Mat m(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
        if (rows[i].size() != nc) throw ModelIoError("ragged matrix in model file");
        for (std::size_t j = 0; j < nc; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
    return m;
}

inline json standardizer_to_json(const Standardizer& s) {
    return json{{"mean", vec_to_json(s.mean)}, {"sd", vec_to_json(s.sd)}};
}

inline Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.mean = vec_from_json(j.at("mean"));
    s.sd = vec_from_json(j.at("sd"));
    return s;
}

inline json features_to_json(const FeatureList& f) {
    json a = json::array();
    for (Feature x : f) a.push_back(to_string(x));
    return a;
}

inline Feature feature_from_name(const std::string& name) {
    if (name == "pressure") return Feature::Pressure;
    if (name == "temperature") return Feature::Temperature;
    if (name == "carbon_count") return Feature::Carbon;
    throw ModelIoError("unknown feature name '" + name + "' in model file");
}

inline FeatureList features_from_json(const json& a) {
    FeatureList f;
    for (const auto& x : a) f.push_back(feature_from_name(x.get<std::string>()));
    return f;
}

inline json network_to_json(const MlpNetwork& net) {
    json j;
    j["widths"] = net.widths;
    json ws = json::array(), bs = json::array();
    for (int i = 0; i < net.layer_count(); ++i) {
        ws.push_back(mat_to_json(net.weights[i]));
        bs.push_back(vec_to_json(net.biases[i]));
    }
    j["weights"] = std::move(ws);
    j["biases"] = std::move(bs);
    return j;
}

inline MlpNetwork network_from_json(const json& j) {
    MlpNetwork net;
    net.widths = j.at("widths").get<std::vector<int>>();
    if (net.widths.size() < 2) throw ModelIoError("network widths truncated in model file");
    for (std::size_t i = 0; i + 1 < net.widths.size(); ++i) {
        Mat W = mat_from_json(j.at("weights").at(i));
        Vec b = vec_from_json(j.at("biases").at(i));
        if (W.rows() != net.widths[i + 1] || W.cols() != net.widths[i] ||
            b.size() != net.widths[i + 1])
            throw ModelIoError("network tensor shape disagrees with widths in model file");
        net.weights.push_back(std::move(W));
        net.biases.push_back(std::move(b));
    }
    return net;
}

inline json read_document(const std::string& path, const std::string& expect_kind) {
    std::ifstream in(path);
    if (!in) throw ModelIoError("cannot open model file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ModelIoError("cannot parse model file '" + path + "': " + e.what());
    }
    if (j.value("format", "") != "propsurro-model")
        throw ModelIoError("'" + path + "' is not a model file");
    if (j.value("version", -1) != kModelFormatVersion)
        throw ModelIoError("model file '" + path + "' has unsupported version " +
                           j.value("version", json()).dump());
    if (!expect_kind.empty() && j.value("kind", "") != expect_kind)
        throw ModelIoError("model file '" + path + "' holds a '" + j.value("kind", "?") +
                           "' model, expected '" + expect_kind + "'");
    return j;
}

inline void write_document(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelIoError("cannot write model file '" + path + "'");
    out << j.dump(1) << "\n";
}

}  // namespace ser_detail

// ------------------------------- GP -------------------------------

inline void save_gp_model(const GpModel& m, const std::string& path) {
    using ser_detail::json;
    json j;
    j["format"] = "propsurro-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = "gp";
    j["features"] = ser_detail::features_to_json(m.features);
    j["x_standardizer"] = ser_detail::standardizer_to_json(m.x_std);
    j["y_standardizer"] = ser_detail::standardizer_to_json(m.y_std);
    j["X"] = ser_detail::mat_to_json(m.X);
    j["y"] = ser_detail::vec_to_json(m.y);
    j["kernel"] = {{"lengthscales", ser_detail::vec_to_json(m.params.lengthscales)},
                   {"signal_sd", m.params.signal_sd},
                   {"noise_variance", m.params.noise_variance},
                   {"sqrt3_variant", m.params.sqrt3_variant}};
    ser_detail::write_document(j, path);
}

inline GpModel load_gp_model(const std::string& path) {
    ser_detail::json j = ser_detail::read_document(path, "gp");
    GpModel m;
    try {
        m.features = ser_detail::features_from_json(j.at("features"));
        m.x_std = ser_detail::standardizer_from_json(j.at("x_standardizer"));
        m.y_std = ser_detail::standardizer_from_json(j.at("y_standardizer"));
        m.X = ser_detail::mat_from_json(j.at("X"));
        m.y = ser_detail::vec_from_json(j.at("y"));
        const auto& k = j.at("kernel");
        m.params.lengthscales = ser_detail::vec_from_json(k.at("lengthscales"));
        m.params.signal_sd = k.at("signal_sd").get<double>();
        m.params.noise_variance = k.at("noise_variance").get<double>();
        m.params.sqrt3_variant = k.at("sqrt3_variant").get<bool>();
    } catch (const ser_detail::json::exception& e) {
        throw ModelIoError("malformed gp model file '" + path + "': " + e.what());
    }
    if (m.X.rows() != m.y.size() || m.X.cols() != m.params.lengthscales.size())
        throw ModelIoError("inconsistent dimensions in gp model file '" + path + "'");
    gp_detail::finish_model(m);
    return m;
}

// ------------------------------- Generative -------------------------------

inline void save_generative_model(const GenerativeModel& m, const std::string& path) {
    using ser_detail::json;
    json j;
    j["format"] = "propsurro-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = "generative";
    j["features"] = ser_detail::features_to_json(m.features);
    j["x_standardizer"] = ser_detail::standardizer_to_json(m.x_std);
    j["y_standardizer"] = ser_detail::standardizer_to_json(m.y_std);
    j["x_lo"] = ser_detail::vec_to_json(m.x_lo);
    j["x_hi"] = ser_detail::vec_to_json(m.x_hi);
    j["latent_dim"] = m.latent_dim;
    j["generator"] = ser_detail::network_to_json(m.generator);
    j["encoder"] = ser_detail::network_to_json(m.encoder);
    j["discriminator"] = ser_detail::network_to_json(m.discriminator);
    ser_detail::write_document(j, path);
}

inline GenerativeModel load_generative_model(const std::string& path) {
    ser_detail::json j = ser_detail::read_document(path, "generative");
    GenerativeModel m;
    try {
        m.features = ser_detail::features_from_json(j.at("features"));
        m.x_std = ser_detail::standardizer_from_json(j.at("x_standardizer"));
        m.y_std = ser_detail::standardizer_from_json(j.at("y_standardizer"));
        m.x_lo = ser_detail::vec_from_json(j.at("x_lo"));
        m.x_hi = ser_detail::vec_from_json(j.at("x_hi"));
        m.latent_dim = j.at("latent_dim").get<int>();
        m.generator = ser_detail::network_from_json(j.at("generator"));
        m.encoder = ser_detail::network_from_json(j.at("encoder"));
        m.discriminator = ser_detail::network_from_json(j.at("discriminator"));
    } catch (const ser_detail::json::exception& e) {
        throw ModelIoError("malformed generative model file '" + path + "': " + e.what());
    }
    if (m.latent_dim < 1 ||
        m.generator.input_width() <= m.latent_dim ||
        m.generator.input_width() - m.latent_dim != static_cast<int>(m.x_std.dim()))
        throw ModelIoError("inconsistent dimensions in generative model file '" + path + "'");
    return m;
}

// Peek at the stored kind ("gp" or "generative") so callers can dispatch.
inline std::string model_kind(const std::string& path) {
    ser_detail::json j = ser_detail::read_document(path, "");
    std::string kind = j.value("kind", "");
    if (kind != "gp" && kind != "generative")
        throw ModelIoError("model file '" + path + "' has unknown kind '" + kind + "'");
    return kind;
}

}  // namespace propsurro
