#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <catch2/catch_amalgamated.hpp>

#include "propsurro/dataset.hpp"

using namespace propsurro;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "propsurro_dataset_tests";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_text(const std::string& name, const std::string& text) {
    fs::path p = temp_file(name);
    std::ofstream out(p);
    out << text;
    return p;
}

Dataset small_set() {
    Dataset d;
    d.name = "small";
    for (int i = 0; i < 4; ++i) {
        DataPoint p;
        p.pressure = 1.0 + i;
        p.temperature = 400.0 + 10.0 * i;
        p.carbon_count = 8 + i;
        p.density = 700.0 - 5.0 * i;
        d.points.push_back(p);
    }
    return d;
}

}  // namespace

TEST_CASE("csv columns are located by name, extras ignored", "[dataset]") {
    auto p = write_text("by_name.csv",
                        "note,temperature_k,density_kgm3,pressure_mpa,carbon_count\n"
                        "x,400,700,2.5,8\n"
                        "y,500,650,3.5,12\n");
    Dataset d = load_csv(p.string(), Fidelity::Low);
    REQUIRE(d.size() == 2);
    REQUIRE(d.points[0].temperature == 400.0);
    REQUIRE(d.points[0].pressure == 2.5);
    REQUIRE(d.points[1].carbon_count == 12);
    REQUIRE(d.points[1].density == 650.0);
    REQUIRE(d.points[0].fidelity == Fidelity::Low);
}

TEST_CASE("fidelity column overrides the default tag", "[dataset]") {
    auto p = write_text("fid.csv",
                        "pressure_mpa,temperature_k,carbon_count,density_kgm3,fidelity\n"
                        "2,400,8,700,HIGH\n"
                        "3,400,8,690,low\n"
                        "4,400,8,680,\n");
    Dataset d = load_csv(p.string(), Fidelity::Low);
    REQUIRE(d.points[0].fidelity == Fidelity::High);
    REQUIRE(d.points[1].fidelity == Fidelity::Low);
    REQUIRE(d.points[2].fidelity == Fidelity::Low);
}

TEST_CASE("a missing required column is named", "[dataset]") {
    auto p = write_text("missing.csv", "pressure_mpa,temperature_k,carbon_count\n2,400,8\n");
    try {
        load_csv(p.string(), Fidelity::Low);
        FAIL("expected MissingColumn");
    } catch (const MissingColumn& e) {
        REQUIRE(e.column == "density_kgm3");
    }
}

TEST_CASE("non-numeric cells carry the offending row", "[dataset]") {
    auto p = write_text("badnum.csv",
                        "pressure_mpa,temperature_k,carbon_count,density_kgm3\n"
                        "2,400,8,700\n"
                        "3,4a0,8,690\n");
    try {
        load_csv(p.string(), Fidelity::Low);
        FAIL("expected NonNumericCell");
    } catch (const NonNumericCell& e) {
        REQUIRE(e.row == 2);
    }
}

TEST_CASE("fractional carbon counts are rejected", "[dataset]") {
    auto p = write_text("fraccarbon.csv",
                        "pressure_mpa,temperature_k,carbon_count,density_kgm3\n2,400,8.5,700\n");
    REQUIRE_THROWS_AS(load_csv(p.string(), Fidelity::Low), NonNumericCell);
}

TEST_CASE("blank lines and windows line endings are tolerated", "[dataset]") {
    auto p = write_text("crlf.csv",
                        "pressure_mpa,temperature_k,carbon_count,density_kgm3\r\n"
                        "2,400,8,700\r\n"
                        "\r\n"
                        "3,400,8,690\r\n");
    Dataset d = load_csv(p.string(), Fidelity::Low);
    REQUIRE(d.size() == 2);
}

TEST_CASE("save and load round-trip exactly", "[dataset]") {
    Dataset d = small_set();
    d.points[2].fidelity = Fidelity::High;
    d.points[0].density = 700.123456789012345;
    auto p = temp_file("roundtrip.csv");
    save_csv(d, p.string());
    Dataset back = load_csv(p.string(), Fidelity::Low);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        REQUIRE(back.points[i].pressure == d.points[i].pressure);
        REQUIRE(back.points[i].temperature == d.points[i].temperature);
        REQUIRE(back.points[i].carbon_count == d.points[i].carbon_count);
        REQUIRE(back.points[i].density == d.points[i].density);
        REQUIRE(back.points[i].fidelity == d.points[i].fidelity);
    }
}

TEST_CASE("validation rejects non-positive values", "[dataset]") {
    Dataset d = small_set();
    d.points[1].density = 0.0;
    REQUIRE_THROWS_AS(validate_dataset(d), NonPositiveValue);
    d = small_set();
    d.points[0].pressure = -1.0;
    REQUIRE_THROWS_AS(validate_dataset(d), NonPositiveValue);
    d = small_set();
    d.points[3].carbon_count = 0;
    REQUIRE_THROWS_AS(validate_dataset(d), NonPositiveValue);
}

TEST_CASE("duplicate state keys are rejected, fidelity disambiguates", "[dataset]") {
    Dataset d = small_set();
    d.points.push_back(d.points[0]);
    REQUIRE_THROWS_AS(validate_dataset(d), DuplicateKey);
    d.points.back().fidelity = Fidelity::High;
    REQUIRE_NOTHROW(validate_dataset(d));
}

TEST_CASE("split sizes follow pool-then-subset semantics", "[dataset]") {
    Dataset d;
    d.name = "ten";
    for (int i = 0; i < 10; ++i) {
        DataPoint p;
        p.pressure = 1.0 + i;
        p.temperature = 400.0;
        p.carbon_count = 8;
        p.density = 700.0 + i;
        d.points.push_back(p);
    }
    auto [train, test] = split(d, {0.8, 0.5, 3});
    REQUIRE(train.size() == 4);  // round(0.5 * 0.8 * 10)
    REQUIRE(test.size() == 2);   // complement of the 8-point pool
    std::set<double> train_d, test_d;
    for (const auto& p : train.points) train_d.insert(p.density);
    for (const auto& p : test.points) test_d.insert(p.density);
    for (double v : train_d) REQUIRE(test_d.count(v) == 0);
}

TEST_CASE("shrinking the subset keeps the test set fixed and nests trains", "[dataset]") {
    Dataset d;
    for (int i = 0; i < 40; ++i) {
        DataPoint p;
        p.pressure = 1.0 + i;
        p.temperature = 400.0;
        p.carbon_count = 8;
        p.density = 600.0 + i;
        d.points.push_back(p);
    }
    auto [train_half, test_half] = split(d, {0.8, 0.5, 7});
    auto [train_full, test_full] = split(d, {0.8, 1.0, 7});
    REQUIRE(test_half.size() == test_full.size());
    for (std::size_t i = 0; i < test_half.size(); ++i)
        REQUIRE(test_half.points[i].density == test_full.points[i].density);
    std::set<double> full_d;
    for (const auto& p : train_full.points) full_d.insert(p.density);
    for (const auto& p : train_half.points) REQUIRE(full_d.count(p.density) == 1);
}

TEST_CASE("full-fraction split leaves no test points", "[dataset]") {
    Dataset d = small_set();
    auto [train, test] = split(d, {1.0, 1.0, 0});
    REQUIRE(train.size() == d.size());
    REQUIRE(test.empty());
}

TEST_CASE("split validates inputs", "[dataset]") {
    Dataset d = small_set();
    REQUIRE_THROWS_AS(split(d, {0.0, 1.0, 0}), Error);
    REQUIRE_THROWS_AS(split(d, {0.8, 1.5, 0}), Error);
    REQUIRE_THROWS_AS(split(Dataset{}, {0.8, 1.0, 0}), EmptyDataset);
}

TEST_CASE("split is deterministic per seed", "[dataset]") {
    Dataset d = small_set();
    auto [a_train, a_test] = split(d, {0.5, 1.0, 11});
    auto [b_train, b_test] = split(d, {0.5, 1.0, 11});
    REQUIRE(a_train.size() == b_train.size());
    for (std::size_t i = 0; i < a_train.size(); ++i)
        REQUIRE(a_train.points[i].density == b_train.points[i].density);
}

TEST_CASE("standardizer reproduces the hand example", "[dataset]") {
    Mat X(2, 1);
    X << 1.0, 3.0;
    Standardizer s = fit_standardizer_matrix(X, {"x"});
    REQUIRE(s.mean(0) == 2.0);
    REQUIRE(s.sd(0) == 1.0);  // population deviation
    Mat Z = s.transform(X);
    REQUIRE(Z(0, 0) == -1.0);
    REQUIRE(Z(1, 0) == 1.0);
    REQUIRE((s.inverse_transform(Z) - X).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(s.transform_scalar(3.0) == 1.0);
    REQUIRE(s.inverse_scalar(-1.0) == 1.0);
}

TEST_CASE("standardizer rejects degenerate inputs", "[dataset]") {
    REQUIRE_THROWS_AS(fit_standardizer_matrix(Mat::Zero(1, 2), {"a", "b"}), Error);
    Mat X(3, 1);
    X << 2.0, 2.0, 2.0;
    try {
        fit_standardizer_matrix(X, {"pressure"});
        FAIL("expected ZeroVariance");
    } catch (const ZeroVariance& e) {
        REQUIRE(e.feature == "pressure");
    }
}

TEST_CASE("feature helpers expose names and values", "[dataset]") {
    DataPoint p;
    p.pressure = 2.0;
    p.temperature = 400.0;
    p.carbon_count = 12;
    REQUIRE(feature_value(p, Feature::Pressure) == 2.0);
    REQUIRE(feature_value(p, Feature::Temperature) == 400.0);
    REQUIRE(feature_value(p, Feature::Carbon) == 12.0);
    REQUIRE(std::string(to_string(Feature::Pressure)) == "pressure");
    REQUIRE(std::string(to_string(Feature::Carbon)) == "carbon_count");
}

TEST_CASE("constant columns are dropped from varying features", "[dataset]") {
    Dataset d;
    for (int i = 0; i < 3; ++i) {
        DataPoint p;
        p.pressure = 2.0;  // constant
        p.temperature = 400.0 + i;
        p.carbon_count = 8;  // constant
        p.density = 700.0 - i;
        d.points.push_back(p);
    }
    FeatureList f = varying_features(d);
    REQUIRE(f.size() == 1);
    REQUIRE(f[0] == Feature::Temperature);
}

TEST_CASE("matrix and target extraction line up row-wise", "[dataset]") {
    Dataset d = small_set();
    Mat X = to_matrix(d, all_features());
    Vec y = to_targets(d);
    REQUIRE(X.rows() == 4);
    REQUIRE(X.cols() == 3);
    REQUIRE(X(2, 0) == d.points[2].pressure);
    REQUIRE(X(1, 2) == 9.0);
    REQUIRE(y(3) == d.points[3].density);
}

TEST_CASE("fusing tags extra points high and keeps base order", "[dataset]") {
    Dataset base = small_set();
    Dataset extra;
    extra.name = "anchors";
    DataPoint p;
    p.pressure = 50.0;
    p.temperature = 600.0;
    p.carbon_count = 12;
    p.density = 500.0;
    p.fidelity = Fidelity::Low;  // should be forced to High
    extra.points.push_back(p);
    Dataset fused = fuse(base, extra);
    REQUIRE(fused.size() == 5);
    REQUIRE(fused.points[4].fidelity == Fidelity::High);
    for (std::size_t i = 0; i < base.size(); ++i)
        REQUIRE(fused.points[i].density == base.points[i].density);
}

TEST_CASE("fusing conflicting densities at one state is an error", "[dataset]") {
    Dataset base = small_set();
    Dataset extra;
    DataPoint p = base.points[0];
    p.density += 1.0;
    extra.points.push_back(p);
    REQUIRE_THROWS_AS(fuse(base, extra), KeyCollision);
    // identical density at the same state is allowed (distinct fidelity keys)
    extra.points[0].density = base.points[0].density;
    REQUIRE_NOTHROW(fuse(base, extra));
}
