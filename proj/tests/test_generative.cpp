#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>
#include <catch2/catch_amalgamated.hpp>

#include "propsurro/generative.hpp"

using namespace propsurro;

namespace {

// small-capacity stand-in for the default architecture, for fast training tests
ArchSpec tiny_arch() {
    ArchSpec a;
    a.gen_hidden_layers = 3;
    a.gen_width = 48;
    a.enc_hidden_layers = 3;
    a.enc_width = 48;
    a.disc_hidden_layers = 2;
    a.disc_width = 48;
    return a;
}

TrainConfig tiny_config(long steps, std::uint64_t seed) {
    TrainConfig c;
    c.steps = steps;
    c.learning_rate = 1e-3;
    c.seed = seed;
    return c;
}

// generator emitting `value` for every input: all weights zero, output bias set
GenerativeModel constant_model(double value) {
    GenerativeModel m;
    m.latent_dim = 1;
    m.x_std.mean = Vec::Zero(1);
    m.x_std.sd = Vec::Ones(1);
    m.y_std.mean = Vec::Zero(1);
    m.y_std.sd = Vec::Ones(1);
    m.x_lo = Vec::Constant(1, -1.0);
    m.x_hi = Vec::Constant(1, 1.0);
    Rng rng(1);
    m.generator = make_mlp({2, 8, 1}, rng);
    m.encoder = make_mlp({2, 8, 1}, rng);
    m.discriminator = make_mlp({2, 8, 1}, rng);
    Vec zero = Vec::Zero(m.generator.parameter_count());
    mlp_unpack(m.generator, zero);
    m.generator.biases.back()(0) = value;
    return m;
}

// generator passing its latent coordinate straight through: a single affine
// layer with weight [0 1] and zero bias
GenerativeModel latent_identity_model() {
    GenerativeModel m;
    m.latent_dim = 1;
    m.x_std.mean = Vec::Zero(1);
    m.x_std.sd = Vec::Ones(1);
    m.y_std.mean = Vec::Zero(1);
    m.y_std.sd = Vec::Ones(1);
    m.x_lo = Vec::Constant(1, -1.0);
    m.x_hi = Vec::Constant(1, 1.0);
    Rng rng(2);
    m.generator = make_mlp({2, 1}, rng);
    m.encoder = make_mlp({2, 8, 1}, rng);
    m.discriminator = make_mlp({2, 8, 1}, rng);
    m.generator.weights[0](0, 0) = 0.0;
    m.generator.weights[0](0, 1) = 1.0;
    m.generator.biases[0](0) = 0.0;
    return m;
}

bool same_params(const Vec& a, const Vec& b) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() == 0.0;
}

double spearman_against_index(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::vector<double> rank(n);
    for (int r = 0; r < n; ++r) rank[order[r]] = r;
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) d2 += (rank[i] - i) * (rank[i] - i);
    return 1.0 - 6.0 * d2 / (n * (static_cast<double>(n) * n - 1));
}

}  // namespace

TEST_CASE("training configuration validation", "[generative]") {
    TrainConfig c;
    REQUIRE_NOTHROW(validate_train_config(c));
    c.steps = 0;  // a zero-step run is a legal way to get an initialized model
    REQUIRE_NOTHROW(validate_train_config(c));
    c.steps = -1;
    REQUIRE_THROWS_AS(validate_train_config(c), ConfigError);
    c = TrainConfig{};
    c.learning_rate = 0.0;
    REQUIRE_THROWS_AS(validate_train_config(c), ConfigError);
    c = TrainConfig{};
    c.batch_size = 0;
    REQUIRE_THROWS_AS(validate_train_config(c), ConfigError);
    c = TrainConfig{};
    c.disc_updates = 0;
    REQUIRE_THROWS_AS(validate_train_config(c), ConfigError);
    c = TrainConfig{};
    c.gen_updates = 0;
    REQUIRE_THROWS_AS(validate_train_config(c), ConfigError);
    c = TrainConfig{};
    c.lambda = -0.1;
    REQUIRE_THROWS_AS(validate_train_config(c), ConfigError);
    c = TrainConfig{};
    c.beta = -0.1;
    REQUIRE_THROWS_AS(validate_train_config(c), ConfigError);
}

TEST_CASE("network shapes follow the architecture spec", "[generative]") {
    Mat X(6, 2);
    X << 0, 0, 1, 0, 0, 1, 1, 1, 0.5, 0.5, 0.2, 0.8;
    Vec y(6);
    y << 1, 2, 3, 4, 5, 6;
    ArchSpec a = tiny_arch();
    a.latent_dim = 2;
    GenerativeModel m = train_generative_matrix(X, y, a, tiny_config(0, 0));
    REQUIRE(m.generator.input_width() == 4);   // 2 inputs + 2 latent
    REQUIRE(m.generator.output_width() == 1);
    REQUIRE(m.generator.layer_count() == 4);   // 3 hidden + output
    REQUIRE(m.encoder.input_width() == 3);     // 2 inputs + 1 target
    REQUIRE(m.encoder.output_width() == 2);
    REQUIRE(m.discriminator.input_width() == 3);
    REQUIRE(m.discriminator.output_width() == 1);
    REQUIRE(m.discriminator.layer_count() == 3);
    REQUIRE(m.dim() == 2);
    REQUIRE((m.x_lo - Vec::Zero(2)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((m.x_hi - Vec::Ones(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero-step training is reproducible by seed", "[generative]") {
    Mat X(4, 1);
    X << 0, 1, 2, 3;
    Vec y(4);
    y << 1, 2, 3, 2;
    GenerativeModel a = train_generative_matrix(X, y, tiny_arch(), tiny_config(0, 5));
    GenerativeModel b = train_generative_matrix(X, y, tiny_arch(), tiny_config(0, 5));
    GenerativeModel c = train_generative_matrix(X, y, tiny_arch(), tiny_config(0, 6));
    REQUIRE(same_params(mlp_pack(a.generator), mlp_pack(b.generator)));
    REQUIRE(same_params(mlp_pack(a.encoder), mlp_pack(b.encoder)));
    REQUIRE(same_params(mlp_pack(a.discriminator), mlp_pack(b.discriminator)));
    REQUIRE_FALSE(same_params(mlp_pack(a.generator), mlp_pack(c.generator)));
}

TEST_CASE("full training runs are bitwise deterministic", "[generative]") {
    Rng rng(7);
    Mat X(20, 1);
    Vec y(20);
    for (int i = 0; i < 20; ++i) {
        X(i, 0) = i / 19.0;
        y(i) = std::sin(X(i, 0)) + 0.1 * rng.normal();
    }
    GenerativeModel a = train_generative_matrix(X, y, tiny_arch(), tiny_config(300, 9));
    GenerativeModel b = train_generative_matrix(X, y, tiny_arch(), tiny_config(300, 9));
    REQUIRE(same_params(mlp_pack(a.generator), mlp_pack(b.generator)));
    REQUIRE(same_params(mlp_pack(a.encoder), mlp_pack(b.encoder)));
    REQUIRE(same_params(mlp_pack(a.discriminator), mlp_pack(b.discriminator)));
}

TEST_CASE("step counter covers both players in ratio order", "[generative]") {
    Mat X(6, 1);
    X << 0, 1, 2, 3, 4, 5;
    Vec y(6);
    y << 0, 1, 0, 1, 0, 1;
    // default ratio 2:1, so steps 0/1 train the discriminator and step 2 the
    // generator and encoder
    GenerativeModel init = train_generative_matrix(X, y, tiny_arch(), tiny_config(0, 3));
    GenerativeModel two = train_generative_matrix(X, y, tiny_arch(), tiny_config(2, 3));
    GenerativeModel three = train_generative_matrix(X, y, tiny_arch(), tiny_config(3, 3));

    REQUIRE(same_params(mlp_pack(two.generator), mlp_pack(init.generator)));
    REQUIRE(same_params(mlp_pack(two.encoder), mlp_pack(init.encoder)));
    REQUIRE_FALSE(same_params(mlp_pack(two.discriminator), mlp_pack(init.discriminator)));

    REQUIRE_FALSE(same_params(mlp_pack(three.generator), mlp_pack(init.generator)));
    REQUIRE_FALSE(same_params(mlp_pack(three.encoder), mlp_pack(init.encoder)));
    REQUIRE(same_params(mlp_pack(three.discriminator), mlp_pack(two.discriminator)));
}

TEST_CASE("small datasets train on the full batch", "[generative]") {
    Rng rng(11);
    Mat X(5, 2);
    Vec y(5);
    for (int i = 0; i < 5; ++i) {
        X(i, 0) = rng.uniform();
        X(i, 1) = rng.uniform();
        y(i) = rng.normal();
    }
    Rng brng(12);
    gen_detail::Batch b = gen_detail::draw_batch(X, y, 128, brng);
    REQUIRE(b.x.rows() == 2);
    REQUIRE(b.x.cols() == 5);
    REQUIRE((b.x - X.transpose()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((b.y.transpose() - y).cwiseAbs().maxCoeff() == 0.0);

    // subsampled batches contain only training rows
    gen_detail::Batch s = gen_detail::draw_batch(X, y, 3, brng);
    REQUIRE(s.x.cols() == 3);
    for (int j = 0; j < 3; ++j) {
        bool found = false;
        for (int i = 0; i < 5; ++i)
            if (s.x(0, j) == X(i, 0) && s.x(1, j) == X(i, 1) && s.y(0, j) == y(i)) found = true;
        REQUIRE(found);
    }
}

TEST_CASE("a constant generator has zero predictive variance", "[generative]") {
    GenerativeModel m = constant_model(1.5);
    Prediction p = predict_moments_vec(m, Vec::Zero(1), 500, 42);
    REQUIRE(p.mean == 1.5);
    REQUIRE(p.variance == 0.0);
    Vec draws = sample_generative_vec(m, Vec::Constant(1, 0.3), 50, 7);
    for (int i = 0; i < 50; ++i) REQUIRE(draws(i) == 1.5);
}

TEST_CASE("a latent pass-through generator reproduces the latent law", "[generative]") {
    GenerativeModel m = latent_identity_model();
    Prediction p = predict_moments_vec(m, Vec::Zero(1), 100000, 19);
    REQUIRE(std::abs(p.mean) < 0.02);
    REQUIRE(std::abs(p.variance - 1.0) < 0.02);
    REQUIRE(p.n_samples == 100000);
}

TEST_CASE("moments agree with their own draws", "[generative]") {
    GenerativeModel m = latent_identity_model();
    Vec draws = sample_generative_vec(m, Vec::Constant(1, 0.2), 1000, 23);
    Prediction p = predict_moments_vec(m, Vec::Constant(1, 0.2), 1000, 23);
    const double mean = draws.mean();
    const double var = (draws.array() - mean).square().sum() / 1000.0;
    REQUIRE(p.mean == Catch::Approx(mean).margin(1e-14));
    REQUIRE(p.variance == Catch::Approx(var).margin(1e-14));
}

TEST_CASE("sampling is reproducible by seed and query", "[generative]") {
    GenerativeModel m = latent_identity_model();
    Vec a = sample_generative_vec(m, Vec::Zero(1), 64, 5);
    Vec b = sample_generative_vec(m, Vec::Zero(1), 64, 5);
    Vec c = sample_generative_vec(m, Vec::Zero(1), 64, 6);
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("training learns a smooth conditional mean", "[generative]") {
    const int n = 40;
    Mat X(n, 1);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = static_cast<double>(i) / (n - 1);
        y(i) = std::sin(2.0 * M_PI * X(i, 0)) + 2.0;
    }
    GenerativeModel m = train_generative_matrix(X, y, tiny_arch(), tiny_config(15000, 1));
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        Prediction p = predict_moments_vec(m, Vec::Constant(1, x), 4000, 2);
        const double truth = std::sin(2.0 * M_PI * x) + 2.0;
        REQUIRE(std::abs(p.mean - truth) < 0.12);
    }
}

TEST_CASE("training tracks input-dependent spread", "[generative]") {
    const int n = 400;
    Rng rng(31);
    Mat X(n, 1);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = static_cast<double>(i) / (n - 1);
        y(i) = (0.05 + 0.5 * X(i, 0)) * rng.normal();
    }
    GenerativeModel m = train_generative_matrix(X, y, tiny_arch(), tiny_config(4000, 2));
    std::vector<double> sds;
    for (int k = 0; k < 9; ++k) {
        const double x = 0.1 + 0.1 * k;
        Prediction p = predict_moments_vec(m, Vec::Constant(1, x), 4000, 3);
        sds.push_back(std::sqrt(p.variance));
    }
    REQUIRE(spearman_against_index(sds) > 0.8);
}

TEST_CASE("a handful of noise-free points is fit tightly", "[generative]") {
    Mat X(7, 1);
    Vec y(7);
    for (int i = 0; i < 7; ++i) {
        X(i, 0) = 320.0 + 60.0 * i;
        y(i) = 700.0 - 0.8 * (X(i, 0) - 320.0) + 1e-4 * (X(i, 0) - 320.0) * (X(i, 0) - 320.0);
    }
    GenerativeModel m = train_generative_matrix(X, y, tiny_arch(), tiny_config(4000, 4));
    for (int i = 0; i < 7; ++i) {
        Prediction p = predict_moments_vec(m, X.row(i).transpose(), 2000, 5);
        REQUIRE(std::abs(p.mean - y(i)) / std::abs(y(i)) < 0.05);
    }
}

TEST_CASE("dataset front end drops constant inputs", "[generative]") {
    Dataset d;
    for (int i = 0; i < 8; ++i) {
        DataPoint p;
        p.pressure = 2.0;
        p.temperature = 400.0 + 50.0 * i;
        p.carbon_count = 12;
        p.density = 600.0 - 20.0 * i;
        d.points.push_back(p);
    }
    GenerativeModel m = train_generative(d, tiny_arch(), tiny_config(0, 1));
    REQUIRE(m.features == FeatureList{Feature::Temperature});
    REQUIRE(m.dim() == 1);
    REQUIRE_NOTHROW(sample_generative(m, 2.0, 500.0, 12, 4, 1));
    REQUIRE_NOTHROW(predict_moments(m, 2.0, 500.0, 12, 16, 1));
}

TEST_CASE("degenerate training inputs raise typed errors", "[generative]") {
    REQUIRE_THROWS_AS(train_generative(Dataset{}, tiny_arch(), tiny_config(0, 0)), EmptyDataset);
    Mat X = Mat::Ones(3, 1);  // constant column
    Vec y(3);
    y << 1, 2, 3;
    REQUIRE_THROWS_AS(train_generative_matrix(X, y, tiny_arch(), tiny_config(0, 0)), ZeroVariance);

    GenerativeModel m = latent_identity_model();
    REQUIRE_THROWS_AS(sample_generative_vec(m, Vec::Zero(2), 4, 0), DimensionMismatch);
    REQUIRE_THROWS_AS(sample_generative_vec(m, Vec::Zero(1), 0, 0), DimensionMismatch);
    REQUIRE_THROWS_AS(predict_moments_vec(m, Vec::Zero(1), 1, 0), DimensionMismatch);
    REQUIRE_THROWS_AS(sample_generative(m, 1, 2, 3, 4, 0), DimensionMismatch);  // no feature map
}
