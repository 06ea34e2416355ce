// Command-line front end: dataset generation, model training and evaluation,
// prediction sweeps with uncertainty bands, cv maps, and the data-fusion and
// multi-fidelity experiment suites.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "propsurro/propsurro.hpp"

namespace ps = propsurro;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> model_kind;
    std::optional<double> train_frac;
    std::optional<double> subset_frac;
    bool extrapolate = false;
};

ps::RunConfig make_config(const CliOverrides& o) {
    ps::ConfigDoc doc;
    if (!o.config_path.empty()) doc = ps::load_config(o.config_path);
    ps::RunConfig c = ps::apply_config(doc);
    if (o.seed) {
        c.data.seed = *o.seed;
        c.oracle.seed = *o.seed;
        c.gp.seed = *o.seed;
        c.train.seed = *o.seed;
        c.predict.seed = *o.seed;
        c.cvmap_seed = *o.seed;
        c.fuse.seed = *o.seed;
        c.mf.seed = *o.seed;
    }
    if (o.out_dir) c.output.dir = *o.out_dir;
    if (o.model_kind) {
        if (*o.model_kind != "gp" && *o.model_kind != "gen")
            throw ps::ConfigError("--model: expected gp or gen, got '" + *o.model_kind + "'");
        c.model.kind = *o.model_kind;
    }
    if (o.train_frac) c.data.train_fraction = *o.train_frac;
    if (o.subset_frac) c.data.subset_fraction = *o.subset_frac;
    if (o.extrapolate) c.predict.extrapolate = true;
    return c;
}

fs::path ensure_outdir(const ps::RunConfig& c) {
    fs::path dir(c.output.dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ps::Error("cannot create output directory '" + c.output.dir + "'");
    return dir;
}

std::string num_tag(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    std::string s = buf;
    for (char& ch : s)
        if (ch == '.') ch = '_';
    return s;
}

// decorrelated sampling stream per query point
std::uint64_t point_stream(std::uint64_t seed, double p, double T, int C) {
    auto bits = [](double v) {
        std::uint64_t u;
        std::memcpy(&u, &v, sizeof u);
        return u;
    };
    return ps::mix_seed(seed, ps::mix_seed(bits(p), ps::mix_seed(bits(T),
                                                                static_cast<std::uint64_t>(C))));
}

struct LoadedModel {
    std::string kind;
    std::shared_ptr<ps::GpModel> gp;
    std::shared_ptr<ps::GenerativeModel> gen;

    const ps::FeatureList& features() const { return gp ? gp->features : gen->features; }
};

LoadedModel load_model(const std::string& path) {
    if (path.empty()) throw ps::ConfigError("output.model (or --config) must name a model file");
    LoadedModel m;
    m.kind = ps::model_kind(path);
    if (m.kind == "gp")
        m.gp = std::make_shared<ps::GpModel>(ps::load_gp_model(path));
    else
        m.gen = std::make_shared<ps::GenerativeModel>(ps::load_generative_model(path));
    return m;
}

ps::PointPredictor make_predictor(const LoadedModel& m, long n_samples, std::uint64_t seed) {
    if (m.gp)
        return [g = m.gp](double p, double T, int C) { return ps::gp_predict(*g, p, T, C); };
    return [g = m.gen, n_samples, seed](double p, double T, int C) {
        return ps::predict_moments(*g, p, T, C, n_samples, point_stream(seed, p, T, C));
    };
}

// training-domain box in raw units, ordered like the model's features
void model_box(const LoadedModel& m, ps::Vec& lo, ps::Vec& hi) {
    if (m.gp) {
        ps::Mat X = m.gp->x_std.inverse_transform(m.gp->X);
        lo = X.colwise().minCoeff();
        hi = X.colwise().maxCoeff();
    } else {
        lo = m.gen->x_lo;
        hi = m.gen->x_hi;
    }
}

void check_domain(const LoadedModel& m, double p, double T, int C, bool extrapolate) {
    if (extrapolate) return;
    ps::Vec lo, hi;
    model_box(m, lo, hi);
    const ps::FeatureList& f = m.features();
    ps::DataPoint pt;
    pt.pressure = p;
    pt.temperature = T;
    pt.carbon_count = C;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double v = ps::feature_value(pt, f[j]);
        const double tol = 1e-9 * (1.0 + std::abs(lo(j)) + std::abs(hi(j)));
        if (v < lo(j) - tol || v > hi(j) + tol)
            throw ps::ConfigError(std::string("query outside the training domain for ") +
                                  ps::to_string(f[j]) + " (" + std::to_string(v) + " not in [" +
                                  std::to_string(lo(j)) + ", " + std::to_string(hi(j)) +
                                  "]); pass --extrapolate to override");
    }
}

void write_json(const json& j, const fs::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ps::Error("cannot write '" + path.string() + "'");
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

std::vector<double> temperature_sweep(double lo, double hi, double step) {
    std::vector<double> t;
    if (!(step > 0.0)) throw ps::ConfigError("temperature step must be positive");
    for (double T = lo; T <= hi + 1e-9 * step; T += step) t.push_back(T);
    return t;
}

// ------------------------------- generate -------------------------------

int cmd_generate(const ps::RunConfig& c) {
    fs::path dir = ensure_outdir(c);
    ps::OracleParams low_params;
    low_params.noise_sd = c.oracle.noise_sd;
    low_params.seed = c.oracle.seed;
    ps::Dataset low = ps::generate_table(c.oracle.pressures, c.oracle.temperatures,
                                         c.oracle.carbons, low_params);
    low.name = "synthetic-low";

    ps::OracleParams high_params =
        ps::high_fidelity_variant(low_params, c.oracle.hf_center_shift, c.oracle.hf_width_scale);
    high_params.seed = ps::mix_seed(c.oracle.seed, 1);
    ps::Dataset high = ps::generate_table(c.oracle.pressures, c.oracle.temperatures,
                                          c.oracle.carbons, high_params);
    high.name = "synthetic-high";
    for (ps::DataPoint& p : high.points) p.fidelity = ps::Fidelity::High;

    ps::save_csv(low, (dir / "low.csv").string());
    ps::save_csv(high, (dir / "high.csv").string());
    std::printf("generate: wrote %zu low-fidelity and %zu high-fidelity rows to %s\n", low.size(),
                high.size(), dir.string().c_str());
    return 0;
}

// ------------------------------- train -------------------------------

int cmd_train(const ps::RunConfig& c) {
    if (c.data.path.empty())
        throw ps::ConfigError("data.path must name the training dataset CSV");
    fs::path dir = ensure_outdir(c);
    const auto t0 = std::chrono::steady_clock::now();

    ps::Dataset full = ps::load_csv(c.data.path, ps::Fidelity::Low);
    ps::SplitSpec split_spec{c.data.train_fraction, c.data.subset_fraction, c.data.seed};
    auto [train_set, test_set] = ps::split(full, split_spec);
    if (train_set.empty()) throw ps::Error("train: empty training subset");

    const std::string model_path =
        c.output.model.empty() ? (dir / "model.json").string() : c.output.model;

    ps::PointPredictor predict;
    ps::GpModel gp_model;
    ps::GenerativeModel gen_model;
    if (c.model.kind == "gp") {
        ps::GpFitOptions opt;
        opt.restarts = c.gp.restarts;
        opt.seed = c.gp.seed;
        opt.max_iterations = c.gp.max_iterations;
        opt.sqrt3_variant = c.kernel.sqrt3_variant;
        opt.learn_noise = c.gp.learn_noise;
        opt.fixed_noise_variance = c.gp.fixed_noise_variance;
        gp_model = ps::gp_fit(train_set, opt);
        ps::save_gp_model(gp_model, model_path);
        predict = [&gp_model](double p, double T, int C) {
            return ps::gp_predict(gp_model, p, T, C);
        };
    } else {
        gen_model = ps::train_generative(train_set, c.arch, c.train);
        ps::save_generative_model(gen_model, model_path);
        predict = [&gen_model, &c](double p, double T, int C) {
            return ps::predict_moments(gen_model, p, T, C, c.predict.n_samples,
                                       point_stream(c.predict.seed, p, T, C));
        };
    }

    json report;
    report["model"] = c.model.kind;
    report["model_file"] = model_path;
    report["n_train"] = train_set.size();
    report["n_test"] = test_set.size();
    report["train_fraction"] = c.data.train_fraction;
    report["subset_fraction"] = c.data.subset_fraction;
    if (!test_set.empty()) {
        ps::Vec truth = ps::to_targets(test_set);
        ps::Vec pred(test_set.size());
        for (std::size_t i = 0; i < test_set.size(); ++i) {
            const ps::DataPoint& p = test_set.points[i];
            pred(i) = predict(p.pressure, p.temperature, p.carbon_count).mean;
        }
        report["l2_mre"] = ps::l2_mre(truth, pred);
        report["r2"] = ps::r2_score(truth, pred);
    } else {
        report["l2_mre"] = nullptr;
        report["r2"] = nullptr;
    }
    const auto t1 = std::chrono::steady_clock::now();
    report["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    write_json(report, dir / "train_report.json");

    std::printf("train: %s model on %zu points -> %s", c.model.kind.c_str(), train_set.size(),
                model_path.c_str());
    if (!test_set.empty())
        std::printf(" (held-out r2 = %.6f, l2_mre = %.6g)", report["r2"].get<double>(),
                    report["l2_mre"].get<double>());
    std::printf("\n");
    return 0;
}

// ------------------------------- evaluate -------------------------------

int cmd_evaluate(const ps::RunConfig& c) {
    if (c.data.path.empty())
        throw ps::ConfigError("data.path must name the evaluation dataset CSV");
    fs::path dir = ensure_outdir(c);
    LoadedModel model = load_model(c.output.model);
    ps::PointPredictor predict = make_predictor(model, c.predict.n_samples, c.predict.seed);
    ps::Dataset ds = ps::load_csv(c.data.path, ps::Fidelity::Low);
    if (ds.empty()) throw ps::Error("evaluate: empty dataset");

    std::FILE* f = std::fopen((dir / "evaluation.csv").string().c_str(), "w");
    if (!f) throw ps::Error("cannot write evaluation.csv");
    std::fprintf(f, "pressure_mpa,temperature_k,carbon_count,density_kgm3,mean,sd,rel_error\n");
    ps::Vec truth = ps::to_targets(ds);
    ps::Vec pred(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const ps::DataPoint& p = ds.points[i];
        ps::Prediction pr = predict(p.pressure, p.temperature, p.carbon_count);
        pred(i) = pr.mean;
        std::fprintf(f, "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", p.pressure, p.temperature,
                     p.carbon_count, p.density, pr.mean, std::sqrt(std::max(pr.variance, 0.0)),
                     std::abs(pr.mean - p.density) / std::abs(p.density));
    }
    std::fclose(f);

    json report;
    report["model"] = model.kind;
    report["n_points"] = ds.size();
    report["l2_mre"] = ps::l2_mre(truth, pred);
    report["r2"] = ds.size() >= 2 ? json(ps::r2_score(truth, pred)) : json(nullptr);
    write_json(report, dir / "evaluation.json");
    std::printf("evaluate: %s on %zu points, l2_mre = %.6g\n", model.kind.c_str(), ds.size(),
                report["l2_mre"].get<double>());
    return 0;
}

// ------------------------------- predict -------------------------------

int cmd_predict(const ps::RunConfig& c) {
    fs::path dir = ensure_outdir(c);
    LoadedModel model = load_model(c.output.model);
    ps::PointPredictor predict = make_predictor(model, c.predict.n_samples, c.predict.seed);

    std::vector<double> temps =
        temperature_sweep(c.predict.temp_lo, c.predict.temp_hi, c.predict.temp_step);
    if (c.predict.pressures.empty() || temps.empty())
        throw ps::ConfigError("predict: empty sweep (no pressures or temperatures)");

    ps::Dataset reference;
    if (!c.predict.reference.empty())
        reference = ps::load_csv(c.predict.reference, ps::Fidelity::High);

    for (double P : c.predict.pressures) {
        check_domain(model, P, temps.front(), c.predict.carbon, c.predict.extrapolate);
        check_domain(model, P, temps.back(), c.predict.carbon, c.predict.extrapolate);

        ps::SvgSeries series;
        series.x = ps::Vec(temps.size());
        series.mean = ps::Vec(temps.size());
        series.lo = ps::Vec(temps.size());
        series.hi = ps::Vec(temps.size());
        series.label = model.kind + " mean with 2 sd band";

        std::string tag = num_tag(P);
        std::FILE* f = std::fopen((dir / ("series_p" + tag + ".csv")).string().c_str(), "w");
        if (!f) throw ps::Error("cannot write series CSV");
        std::fprintf(f, "temperature_k,mean,sd,lo_2sd,hi_2sd\n");
        for (std::size_t i = 0; i < temps.size(); ++i) {
            ps::Prediction pr = predict(P, temps[i], c.predict.carbon);
            const double sd = std::sqrt(std::max(pr.variance, 0.0));
            series.x(i) = temps[i];
            series.mean(i) = pr.mean;
            series.lo(i) = pr.mean - 2 * sd;
            series.hi(i) = pr.mean + 2 * sd;
            std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", temps[i], pr.mean, sd,
                         pr.mean - 2 * sd, pr.mean + 2 * sd);
        }
        std::fclose(f);

        std::vector<ps::SvgPoints> overlays;
        if (!reference.empty()) {
            std::vector<double> rx, ry;
            for (const ps::DataPoint& p : reference.points)
                if (std::abs(p.pressure - P) < 1e-9 && p.carbon_count == c.predict.carbon) {
                    rx.push_back(p.temperature);
                    ry.push_back(p.density);
                }
            if (!rx.empty()) {
                ps::SvgPoints pts;
                pts.x = Eigen::Map<ps::Vec>(rx.data(), static_cast<Eigen::Index>(rx.size()));
                pts.y = Eigen::Map<ps::Vec>(ry.data(), static_cast<Eigen::Index>(ry.size()));
                pts.label = "reference";
                overlays.push_back(std::move(pts));
            }
        }
        ps::svg_band_plot((dir / ("series_p" + tag + ".svg")).string(),
                          "density at " + std::string(tag) + " MPa", "temperature [K]",
                          "density [kg/m3]", {series}, overlays);
    }

    if (!reference.empty()) {
        std::FILE* f = std::fopen((dir / "reference_eval.csv").string().c_str(), "w");
        if (!f) throw ps::Error("cannot write reference_eval.csv");
        std::fprintf(f, "pressure_mpa,temperature_k,carbon_count,ref_value,mean,sd,rel_error\n");
        ps::Vec truth(reference.size()), pred(reference.size());
        for (std::size_t i = 0; i < reference.size(); ++i) {
            const ps::DataPoint& p = reference.points[i];
            check_domain(model, p.pressure, p.temperature, p.carbon_count, c.predict.extrapolate);
            ps::Prediction pr = predict(p.pressure, p.temperature, p.carbon_count);
            truth(i) = p.density;
            pred(i) = pr.mean;
            std::fprintf(f, "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", p.pressure, p.temperature,
                         p.carbon_count, p.density, pr.mean, std::sqrt(std::max(pr.variance, 0.0)),
                         std::abs(pr.mean - p.density) / std::abs(p.density));
        }
        std::fclose(f);
        json rep;
        rep["l2_mre_vs_reference"] = ps::l2_mre(truth, pred);
        write_json(rep, dir / "reference_eval.json");
    }

    std::printf("predict: %zu pressure series x %zu temperatures -> %s\n",
                c.predict.pressures.size(), temps.size(), dir.string().c_str());
    return 0;
}

// ------------------------------- cvmap -------------------------------

int cmd_cvmap(const ps::RunConfig& c) {
    fs::path dir = ensure_outdir(c);
    LoadedModel model = load_model(c.output.model);
    ps::PointPredictor predict = make_predictor(model, c.cvmap_samples, c.cvmap_seed);
    ps::CvMapResult result = ps::cv_map(predict, c.cvmap);
    ps::save_cv_map_csv(result, (dir / "cv_map.csv").string());
    ps::svg_heat_map((dir / "cv_map.svg").string(), "coefficient of variation",
                     "log10 pressure [MPa]", "temperature [K]", result.pressures,
                     result.temperatures, result.cv, result.valid, true);
    long invalid = 0;
    for (Eigen::Index i = 0; i < result.valid.rows(); ++i)
        for (Eigen::Index j = 0; j < result.valid.cols(); ++j)
            if (!result.valid(i, j)) ++invalid;
    std::printf("cvmap: %ld x %ld grid (%ld invalid cells) -> %s\n",
                static_cast<long>(result.temperatures.size()),
                static_cast<long>(result.pressures.size()), invalid, dir.string().c_str());
    return 0;
}

// ------------------------------- fuse -------------------------------

int cmd_fuse(const ps::RunConfig& c) {
    fs::path dir = ensure_outdir(c);

    ps::OracleParams low_params;
    low_params.noise_sd = c.oracle.noise_sd;
    low_params.seed = c.oracle.seed;
    ps::OracleParams high_params =
        ps::high_fidelity_variant(low_params, c.oracle.hf_center_shift, c.oracle.hf_width_scale);
    high_params.noise_sd = 0.0;

    ps::Dataset base;
    if (!c.fuse.base.empty()) {
        base = ps::load_csv(c.fuse.base, ps::Fidelity::Low);
    } else {
        base = ps::generate_table(c.oracle.pressures, c.oracle.temperatures, {12}, low_params);
        base.name = "md-like";
    }

    ps::Dataset anchors;
    if (!c.fuse.anchors.empty()) {
        anchors = ps::load_csv(c.fuse.anchors, ps::Fidelity::High);
    } else {
        anchors.name = "nist-like";
        for (double T : {660.0, 680.0, 700.0}) {
            ps::DataPoint p;
            p.pressure = 2.0;
            p.temperature = T;
            p.carbon_count = 12;
            p.density = ps::oracle_density(2.0, T, 12, high_params);
            p.fidelity = ps::Fidelity::High;
            anchors.points.push_back(p);
        }
    }

    ps::Dataset reference;
    if (!c.fuse.reference.empty()) {
        reference = ps::load_csv(c.fuse.reference, ps::Fidelity::High);
    } else {
        reference = ps::generate_table({2.0}, c.oracle.temperatures, {12}, high_params);
        reference.name = "reference";
    }

    ps::FusionConfig fc;
    fc.kind = c.model.kind == "gp" ? ps::SurrogateKind::Gp : ps::SurrogateKind::Generative;
    fc.arch = c.arch;
    fc.train = c.train;
    fc.train.steps = c.fuse.steps;
    fc.train.seed = c.fuse.seed;
    fc.gp.restarts = c.gp.restarts;
    fc.gp.seed = c.gp.seed;
    fc.gp.max_iterations = c.gp.max_iterations;
    fc.gp.sqrt3_variant = c.kernel.sqrt3_variant;
    fc.gp.learn_noise = c.gp.learn_noise;
    fc.gp.fixed_noise_variance = c.gp.fixed_noise_variance;
    fc.n_samples = c.fuse.n_samples;
    fc.sample_seed = ps::mix_seed(c.fuse.seed, 7);

    const std::string report_path = (dir / "fusion_report.csv").string();
    ps::FusionReport report;
    for (std::size_t n = 0; n <= anchors.points.size(); ++n) {
        try {
            std::vector<ps::FusionRow> rows = ps::fusion_arm(base, anchors, n, reference, fc);
            report.rows.insert(report.rows.end(), rows.begin(), rows.end());
            ps::save_fusion_csv(report, report_path);

            ps::SvgSeries series;
            const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
            series.x = ps::Vec(nr);
            series.mean = ps::Vec(nr);
            series.lo = ps::Vec(nr);
            series.hi = ps::Vec(nr);
            series.label = rows.empty() ? "" : rows[0].model + " mean with 2 sd band";
            ps::SvgPoints ref_pts;
            ref_pts.x = ps::Vec(nr);
            ref_pts.y = ps::Vec(nr);
            ref_pts.label = "reference";
            for (Eigen::Index i = 0; i < nr; ++i) {
                series.x(i) = rows[i].temperature;
                series.mean(i) = rows[i].mean;
                series.lo(i) = rows[i].mean - 2 * rows[i].sd;
                series.hi(i) = rows[i].mean + 2 * rows[i].sd;
                ref_pts.x(i) = rows[i].temperature;
                ref_pts.y(i) = rows[i].ref_value;
            }
            ps::svg_band_plot((dir / ("fusion_arm" + std::to_string(n) + ".svg")).string(),
                              "fusion with " + std::to_string(n) + " anchor points",
                              "temperature [K]", "density [kg/m3]", {series}, {ref_pts});
        } catch (const ps::Error&) {
            std::fprintf(stderr, "fuse: arm n_added=%zu failed; partial report kept at %s\n", n,
                         report_path.c_str());
            throw;
        }
    }
    std::printf("fuse: %zu arms x %zu reference points -> %s\n", anchors.points.size() + 1,
                reference.size(), report_path.c_str());
    return 0;
}

// ------------------------------- mf -------------------------------

int cmd_mf(const ps::RunConfig& c) {
    fs::path dir = ensure_outdir(c);

    ps::OracleParams low_params;
    low_params.seed = c.oracle.seed;
    ps::OracleParams high_params =
        ps::high_fidelity_variant(low_params, c.oracle.hf_center_shift, c.oracle.hf_width_scale);

    const std::vector<double> anchor_temps = {320, 440, 500, 620, 660, 680, 700};
    ps::FidelityPair pair;
    if (!c.mf.low.empty()) {
        pair.low = ps::load_csv(c.mf.low, ps::Fidelity::Low);
    } else {
        pair.low = ps::generate_table({2.0}, anchor_temps, {12}, low_params);
        pair.low.name = "low-fidelity";
    }
    if (!c.mf.high.empty()) {
        pair.high = ps::load_csv(c.mf.high, ps::Fidelity::High);
    } else {
        pair.high = ps::generate_table({2.0}, anchor_temps, {12}, high_params);
        pair.high.name = "high-fidelity";
        for (ps::DataPoint& p : pair.high.points) p.fidelity = ps::Fidelity::High;
    }

    ps::Dataset reference;
    if (!c.mf.reference.empty()) {
        reference = ps::load_csv(c.mf.reference, ps::Fidelity::High);
    } else {
        reference = pair.high;
        reference.name = "reference";
    }

    ps::GpFitOptions gp_opt;
    gp_opt.restarts = c.gp.restarts;
    gp_opt.seed = c.gp.seed;
    gp_opt.max_iterations = c.gp.max_iterations;
    gp_opt.sqrt3_variant = c.kernel.sqrt3_variant;
    gp_opt.learn_noise = c.gp.learn_noise;
    gp_opt.fixed_noise_variance = c.gp.fixed_noise_variance;

    ps::TrainConfig tc = c.train;
    tc.steps = c.mf.steps;
    tc.disc_updates = c.mf.disc_updates;
    tc.gen_updates = c.mf.gen_updates;
    tc.seed = c.mf.seed;

    ps::NargpModel nargp = ps::nargp_fit(pair, c.mf.seed, gp_opt);
    ps::MfGenerativeModel mfgen = ps::mf_generative_fit(pair, c.arch, tc, gp_opt);

    ps::FusionReport report;
    auto add_rows = [&](const std::string& name, const ps::PointPredictor& predict) {
        ps::Vec truth(reference.size()), pred(reference.size());
        for (std::size_t i = 0; i < reference.size(); ++i) {
            const ps::DataPoint& p = reference.points[i];
            ps::Prediction pr = predict(p.pressure, p.temperature, p.carbon_count);
            truth(i) = p.density;
            pred(i) = pr.mean;
            ps::FusionRow row;
            row.model = name;
            row.n_added = static_cast<int>(pair.high.size());
            row.pressure = p.pressure;
            row.temperature = p.temperature;
            row.mean = pr.mean;
            row.sd = std::sqrt(std::max(pr.variance, 0.0));
            row.ref_value = p.density;
            row.rel_error = std::abs(pr.mean - p.density) / std::abs(p.density);
            report.rows.push_back(row);
        }
        return ps::l2_mre(truth, pred);
    };

    const double nargp_mre = add_rows("nargp", [&](double p, double T, int C) {
        return ps::nargp_predict(nargp, p, T, C, c.mf.n_samples, ps::mix_seed(c.mf.seed, 11));
    });
    const double mfgen_mre = add_rows("mf-generative", [&](double p, double T, int C) {
        return ps::mf_generative_predict(mfgen, p, T, C, c.mf.n_samples,
                                         point_stream(c.mf.seed, p, T, C));
    });
    ps::save_fusion_csv(report, (dir / "mf_report.csv").string());

    // dense curves for the figure
    std::vector<double> temps = temperature_sweep(320, 900, 5);
    auto curve = [&](const ps::PointPredictor& predict, const std::string& color,
                     const std::string& label) {
        ps::SvgSeries s;
        const Eigen::Index n = static_cast<Eigen::Index>(temps.size());
        s.x = ps::Vec(n);
        s.mean = ps::Vec(n);
        s.lo = ps::Vec(n);
        s.hi = ps::Vec(n);
        s.color = color;
        s.label = label;
        for (Eigen::Index i = 0; i < n; ++i) {
            ps::Prediction pr = predict(2.0, temps[i], 12);
            const double sd = std::sqrt(std::max(pr.variance, 0.0));
            s.x(i) = temps[i];
            s.mean(i) = pr.mean;
            s.lo(i) = pr.mean - 2 * sd;
            s.hi(i) = pr.mean + 2 * sd;
        }
        return s;
    };
    ps::SvgSeries nargp_curve = curve(
        [&](double p, double T, int C) {
            return ps::nargp_predict(nargp, p, T, C, c.mf.n_samples, ps::mix_seed(c.mf.seed, 11));
        },
        "#1f77b4", "nargp");
    ps::SvgSeries mfgen_curve = curve(
        [&](double p, double T, int C) {
            return ps::mf_generative_predict(mfgen, p, T, C, c.mf.n_samples,
                                             point_stream(c.mf.seed, p, T, C));
        },
        "#2ca02c", "mf-generative");
    ps::SvgPoints high_pts;
    high_pts.x = ps::Vec(static_cast<Eigen::Index>(pair.high.size()));
    high_pts.y = ps::Vec(static_cast<Eigen::Index>(pair.high.size()));
    high_pts.label = "high-fidelity data";
    for (std::size_t i = 0; i < pair.high.size(); ++i) {
        high_pts.x(static_cast<Eigen::Index>(i)) = pair.high.points[i].temperature;
        high_pts.y(static_cast<Eigen::Index>(i)) = pair.high.points[i].density;
    }
    ps::svg_band_plot((dir / "mf_curves.svg").string(), "multi-fidelity reconstruction at 2 MPa",
                      "temperature [K]", "density [kg/m3]", {nargp_curve, mfgen_curve},
                      {high_pts});

    json summary;
    summary["nargp"] = {{"l2_mre", nargp_mre}};
    summary["mf_generative"] = {{"l2_mre", mfgen_mre}};
    summary["n_low"] = pair.low.size();
    summary["n_high"] = pair.high.size();
    write_json(summary, dir / "mf_summary.json");

    std::printf("mf: nargp l2_mre = %.6g, mf-generative l2_mre = %.6g -> %s\n", nargp_mre,
                mfgen_mre, dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("PROPSURRO_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) Eigen::setNbThreads(n);
    }

    CLI::App app{"surrogate models for tabulated fluid density"};
    app.require_subcommand(1);
    CliOverrides o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "run configuration file");
        cmd->add_option("--seed", o.seed, "override every seed in the configuration");
        cmd->add_option("--out", o.out_dir, "output directory");
        cmd->add_option("--train-frac", o.train_frac, "override data.train_fraction");
        cmd->add_option("--subset-frac", o.subset_frac, "override data.subset_fraction");
        cmd->add_option("--model", o.model_kind, "model kind: gp | gen");
        cmd->add_flag("--extrapolate", o.extrapolate, "allow queries outside the training domain");
        return cmd;
    };

    CLI::App* generate = add_common(app.add_subcommand("generate", "write synthetic density tables"));
    CLI::App* train = add_common(app.add_subcommand("train", "fit a model and report held-out metrics"));
    CLI::App* predict = add_common(app.add_subcommand("predict", "temperature sweeps with 2 sd bands"));
    CLI::App* evaluate = add_common(app.add_subcommand("evaluate", "score a model file on a dataset"));
    CLI::App* cvmap = add_common(app.add_subcommand("cvmap", "uncertainty map over (p, T)"));
    CLI::App* fuse = add_common(app.add_subcommand("fuse", "anchor-point concatenation study"));
    CLI::App* mf = add_common(app.add_subcommand("mf", "two-fidelity reconstruction experiment"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ps::RunConfig c = make_config(o);
        if (generate->parsed()) return cmd_generate(c);
        if (train->parsed()) return cmd_train(c);
        if (predict->parsed()) return cmd_predict(c);
        if (evaluate->parsed()) return cmd_evaluate(c);
        if (cvmap->parsed()) return cmd_cvmap(c);
        if (fuse->parsed()) return cmd_fuse(c);
        if (mf->parsed()) return cmd_mf(c);
        std::fprintf(stderr, "no command\n");
        return 2;
    } catch (const ps::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const ps::ModelIoError& e) {
        std::fprintf(stderr, "model file error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
