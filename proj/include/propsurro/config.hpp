#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "propsurro/common.hpp"
#include "propsurro/dataset.hpp"
#include "propsurro/generative.hpp"
#include "propsurro/gp.hpp"
#include "propsurro/metrics.hpp"
#include "propsurro/synthdata.hpp"

namespace propsurro {

// INI-style run configuration: [section] headers, key = value lines, '#' or
// ';' comments. Every known key has a default; an unknown section or key is
// a hard ConfigError naming it, so typos cannot silently fall back.

struct ConfigDoc {
    // section -> key -> raw value
    std::map<std::string, std::map<std::string, std::string>> sections;
};

namespace cfg_detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace cfg_detail

inline ConfigDoc parse_config_text(const std::string& text) {
    ConfigDoc doc;
    std::istringstream in(text);
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = cfg_detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = cfg_detail::trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            doc.sections[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = cfg_detail::trim(line.substr(0, eq));
        std::string value = cfg_detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key +
                              "' appears before any [section]");
        auto [it, inserted] = doc.sections[section].emplace(key, value);
        if (!inserted)
            throw ConfigError("config: duplicate key '" + section + "." + key + "'");
    }
    return doc;
}

inline ConfigDoc load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ------------------------------- Run configuration -------------------------------

struct RunConfig {
    struct {
        std::string kind = "gp";  // gp | gen
    } model;

    struct {
        std::string path;
        double train_fraction = 0.8;
        double subset_fraction = 1.0;
        std::uint64_t seed = 0;
    } data;

    struct {
        std::vector<double> pressures = {3, 4, 6, 8, 10, 20, 100, 150};
        std::vector<double> temperatures;  // empty = 320..900 step 20
        std::vector<int> carbons = {8, 9, 10, 12, 16};
        double noise_sd = 0.0;
        std::uint64_t seed = 0;
        double hf_center_shift = -20.0;
        double hf_width_scale = 0.6;
    } oracle;

    struct {
        bool sqrt3_variant = false;
    } kernel;

    struct {
        int restarts = 10;
        int max_iterations = 150;
        std::uint64_t seed = 0;
        bool learn_noise = true;
        double fixed_noise_variance = 0.0;
    } gp;

    TrainConfig train;
    ArchSpec arch;

    struct {
        std::vector<double> pressures = {3, 10, 100};
        int carbon = 8;
        double temp_lo = 320.0;
        double temp_hi = 900.0;
        double temp_step = 5.0;
        long n_samples = 2000;
        std::uint64_t seed = 0;
        std::string reference;
        bool extrapolate = false;
    } predict;

    CvMapSpec cvmap;
    long cvmap_samples = 2000;
    std::uint64_t cvmap_seed = 0;

    struct {
        std::string base;
        std::string anchors;
        std::string reference;
        long n_samples = 2000;
        std::uint64_t seed = 0;
        long steps = 20000;
    } fuse;

    struct {
        std::string low;
        std::string high;
        std::string reference;
        long n_samples = 2000;
        std::uint64_t seed = 0;
        long steps = 20000;
        int disc_updates = 1;
        int gen_updates = 5;
    } mf;

    struct {
        std::string dir = "out";
        std::string model;
    } output;
};

namespace cfg_detail {

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos == v.size()) return d;
    } catch (const std::exception&) {}
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
}

inline long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long d = std::stol(v, &pos);
        if (pos == v.size()) return d;
    } catch (const std::exception&) {}
    throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        unsigned long long d = std::stoull(v, &pos);
        if (pos == v.size()) return d;
    } catch (const std::exception&) {}
    throw ConfigError("config key '" + key + "': '" + v + "' is not a nonnegative integer");
}

inline bool to_bool(const std::string& key, const std::string& v) {
    const std::string s = lower(v);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

// "a,b,c" or range "lo:hi:step"
inline std::vector<double> to_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (v.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(v);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(trim(p));
        if (parts.size() != 3) throw ConfigError("config key '" + key + "': range needs lo:hi:step");
        double lo = to_double(key, parts[0]), hi = to_double(key, parts[1]),
               step = to_double(key, parts[2]);
        if (!(step > 0.0) || hi < lo)
            throw ConfigError("config key '" + key + "': bad range bounds");
        for (double x = lo; x <= hi + 1e-9 * step; x += step) out.push_back(x);
        return out;
    }
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (!cell.empty()) out.push_back(to_double(key, cell));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

inline std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (double d : to_double_list(key, v)) {
        if (d != static_cast<int>(d))
            throw ConfigError("config key '" + key + "': '" + v + "' holds non-integers");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

}  // namespace cfg_detail

// Overlay a parsed document onto the defaults. Unknown keys are fatal.
inline RunConfig apply_config(const ConfigDoc& doc) {
    RunConfig c;
    using Handler = std::function<void(const std::string&, const std::string&)>;
    std::map<std::string, Handler> h;

    auto bind_d = [&](const char* k, double& ref) {
        h[k] = [&ref](const std::string& key, const std::string& v) {
            ref = cfg_detail::to_double(key, v);
        };
    };
    auto bind_i = [&](const char* k, int& ref) {
        h[k] = [&ref](const std::string& key, const std::string& v) {
            ref = static_cast<int>(cfg_detail::to_long(key, v));
        };
    };
    auto bind_l = [&](const char* k, long& ref) {
        h[k] = [&ref](const std::string& key, const std::string& v) {
            ref = cfg_detail::to_long(key, v);
        };
    };
    auto bind_u = [&](const char* k, std::uint64_t& ref) {
        h[k] = [&ref](const std::string& key, const std::string& v) {
            ref = cfg_detail::to_u64(key, v);
        };
    };
    auto bind_b = [&](const char* k, bool& ref) {
        h[k] = [&ref](const std::string& key, const std::string& v) {
            ref = cfg_detail::to_bool(key, v);
        };
    };
    auto bind_s = [&](const char* k, std::string& ref) {
        h[k] = [&ref](const std::string&, const std::string& v) { ref = v; };
    };
    auto bind_dl = [&](const char* k, std::vector<double>& ref) {
        h[k] = [&ref](const std::string& key, const std::string& v) {
            ref = cfg_detail::to_double_list(key, v);
        };
    };
    auto bind_il = [&](const char* k, std::vector<int>& ref) {
        h[k] = [&ref](const std::string& key, const std::string& v) {
            ref = cfg_detail::to_int_list(key, v);
        };
    };

    h["model.kind"] = [&c](const std::string& key, const std::string& v) {
        if (v != "gp" && v != "gen")
            throw ConfigError("config key '" + key + "': expected gp or gen, got '" + v + "'");
        c.model.kind = v;
    };

    bind_s("data.path", c.data.path);
    bind_d("data.train_fraction", c.data.train_fraction);
    bind_d("data.subset_fraction", c.data.subset_fraction);
    bind_u("data.seed", c.data.seed);

    bind_dl("oracle.pressures", c.oracle.pressures);
    bind_dl("oracle.temperatures", c.oracle.temperatures);
    bind_il("oracle.carbons", c.oracle.carbons);
    bind_d("oracle.noise_sd", c.oracle.noise_sd);
    bind_u("oracle.seed", c.oracle.seed);
    bind_d("oracle.hf_center_shift", c.oracle.hf_center_shift);
    bind_d("oracle.hf_width_scale", c.oracle.hf_width_scale);

    bind_b("kernel.sqrt3_variant", c.kernel.sqrt3_variant);

    bind_i("gp.restarts", c.gp.restarts);
    bind_i("gp.max_iterations", c.gp.max_iterations);
    bind_u("gp.seed", c.gp.seed);
    bind_b("gp.learn_noise", c.gp.learn_noise);
    bind_d("gp.fixed_noise_variance", c.gp.fixed_noise_variance);

    bind_l("train.steps", c.train.steps);
    bind_d("train.learning_rate", c.train.learning_rate);
    bind_i("train.batch_size", c.train.batch_size);
    bind_i("train.disc_updates", c.train.disc_updates);
    bind_i("train.gen_updates", c.train.gen_updates);
    bind_d("train.lambda", c.train.lambda);
    bind_d("train.beta", c.train.beta);
    bind_u("train.seed", c.train.seed);

    bind_i("arch.gen_hidden_layers", c.arch.gen_hidden_layers);
    bind_i("arch.gen_width", c.arch.gen_width);
    bind_i("arch.enc_hidden_layers", c.arch.enc_hidden_layers);
    bind_i("arch.enc_width", c.arch.enc_width);
    bind_i("arch.disc_hidden_layers", c.arch.disc_hidden_layers);
    bind_i("arch.disc_width", c.arch.disc_width);
    bind_i("arch.latent_dim", c.arch.latent_dim);

    bind_dl("predict.pressures", c.predict.pressures);
    bind_i("predict.carbon", c.predict.carbon);
    bind_d("predict.temp_lo", c.predict.temp_lo);
    bind_d("predict.temp_hi", c.predict.temp_hi);
    bind_d("predict.temp_step", c.predict.temp_step);
    bind_l("predict.n_samples", c.predict.n_samples);
    bind_u("predict.seed", c.predict.seed);
    bind_s("predict.reference", c.predict.reference);
    bind_b("predict.extrapolate", c.predict.extrapolate);

    bind_d("cvmap.log10_p_lo", c.cvmap.log10_p_lo);
    bind_d("cvmap.log10_p_hi", c.cvmap.log10_p_hi);
    bind_i("cvmap.n_pressures", c.cvmap.n_pressures);
    bind_d("cvmap.temp_lo", c.cvmap.temp_lo);
    bind_d("cvmap.temp_hi", c.cvmap.temp_hi);
    bind_d("cvmap.temp_step", c.cvmap.temp_step);
    bind_i("cvmap.carbon", c.cvmap.carbon_count);
    bind_l("cvmap.n_samples", c.cvmap_samples);
    bind_u("cvmap.seed", c.cvmap_seed);

    bind_s("fuse.base", c.fuse.base);
    bind_s("fuse.anchors", c.fuse.anchors);
    bind_s("fuse.reference", c.fuse.reference);
    bind_l("fuse.n_samples", c.fuse.n_samples);
    bind_u("fuse.seed", c.fuse.seed);
    bind_l("fuse.steps", c.fuse.steps);

    bind_s("mf.low", c.mf.low);
    bind_s("mf.high", c.mf.high);
    bind_s("mf.reference", c.mf.reference);
    bind_l("mf.n_samples", c.mf.n_samples);
    bind_u("mf.seed", c.mf.seed);
    bind_l("mf.steps", c.mf.steps);
    bind_i("mf.disc_updates", c.mf.disc_updates);
    bind_i("mf.gen_updates", c.mf.gen_updates);

    bind_s("output.dir", c.output.dir);
    bind_s("output.model", c.output.model);

    for (const auto& [section, kv] : doc.sections)
        for (const auto& [key, value] : kv) {
            const std::string full = section + "." + key;
            auto it = h.find(full);
            if (it == h.end()) throw ConfigError("unknown config key '" + full + "'");
            it->second(full, value);
        }

    if (c.oracle.temperatures.empty()) c.oracle.temperatures = standard_temperatures();
    return c;
}

}  // namespace propsurro
