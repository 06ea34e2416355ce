#include <cmath>
#include <catch2/catch_amalgamated.hpp>

#include "propsurro/synthdata.hpp"

using namespace propsurro;

TEST_CASE("surface evaluates to frozen reference values", "[synthdata]") {
    REQUIRE(oracle_density(3.0, 320.0, 12) ==
            Catch::Approx(744.5999999997268).margin(1e-9));
    REQUIRE(oracle_density(2.0, 700.0, 12) ==
            Catch::Approx(93.67980809409877).margin(1e-9));
    OracleParams hf = high_fidelity_variant({});
    REQUIRE(oracle_density(2.0, 700.0, 12, hf) ==
            Catch::Approx(53.296488084002895).margin(1e-9));
    REQUIRE(oracle_density(2.0, 680.0, 12, hf) ==
            Catch::Approx(63.36999572934286).margin(1e-9));
    REQUIRE(oracle_density(2.0, 660.0, 12, hf) ==
            Catch::Approx(165.6184901288497).margin(1e-9));
}

TEST_CASE("evaluation outside the table domain is rejected", "[synthdata]") {
    REQUIRE_THROWS_AS(oracle_density(0.5, 400.0, 8), OutOfDomain);
    REQUIRE_THROWS_AS(oracle_density(201.0, 400.0, 8), OutOfDomain);
    REQUIRE_THROWS_AS(oracle_density(10.0, 299.0, 8), OutOfDomain);
    REQUIRE_THROWS_AS(oracle_density(10.0, 951.0, 8), OutOfDomain);
    REQUIRE_THROWS_AS(oracle_density(10.0, 400.0, 6), OutOfDomain);
    REQUIRE_THROWS_AS(oracle_density(10.0, 400.0, 17), OutOfDomain);
    // closed boundaries evaluate
    REQUIRE(std::isfinite(oracle_density(1.0, 300.0, 7)));
    REQUIRE(std::isfinite(oracle_density(200.0, 950.0, 16)));
}

TEST_CASE("density decreases strictly with temperature", "[synthdata]") {
    Rng rng(21);
    for (int trial = 0; trial < 4000; ++trial) {
        const double p = rng.log_uniform(1.0, 200.0);
        const double T = rng.uniform(300.0, 949.5);
        const int C = 7 + static_cast<int>(rng.index(10));
        REQUIRE(oracle_density(p, T + 0.5, C) < oracle_density(p, T, C));
    }
}

TEST_CASE("density never falls as pressure rises", "[synthdata]") {
    Rng rng(22);
    for (int trial = 0; trial < 4000; ++trial) {
        const double p = rng.log_uniform(1.0, 180.0);
        const double T = rng.uniform(300.0, 950.0);
        const int C = 7 + static_cast<int>(rng.index(10));
        REQUIRE(oracle_density(p * 1.05, T, C) >= oracle_density(p, T, C));
    }
}

TEST_CASE("density never falls as the chain grows", "[synthdata]") {
    Rng rng(23);
    for (int trial = 0; trial < 4000; ++trial) {
        const double p = rng.log_uniform(1.0, 200.0);
        const double T = rng.uniform(300.0, 950.0);
        const int C = 7 + static_cast<int>(rng.index(9));
        REQUIRE(oracle_density(p, T, C + 1) >= oracle_density(p, T, C));
    }
}

TEST_CASE("fidelity variants agree deep in the liquid branch", "[synthdata]") {
    OracleParams hf = high_fidelity_variant({});
    for (double p : standard_pressures())
        for (int C : standard_carbons()) {
            const double lo = oracle_density(p, 320.0, C);
            const double hi = oracle_density(p, 320.0, C, hf);
            REQUIRE(std::abs(hi - lo) < 1e-6 * lo);
        }
}

TEST_CASE("fidelity variants separate across the transition", "[synthdata]") {
    OracleParams hf = high_fidelity_variant({});
    for (double T : {660.0, 680.0, 700.0}) {
        const double lo = oracle_density(2.0, T, 12);
        const double hi = oracle_density(2.0, T, 12, hf);
        REQUIRE(hi < lo);
        REQUIRE(std::abs(lo - hi) / hi > 0.05);
    }
}

TEST_CASE("variant knobs land where requested", "[synthdata]") {
    OracleParams hf = high_fidelity_variant({}, -15.0, 0.5);
    REQUIRE(hf.center_shift == -15.0);
    REQUIRE(hf.width_scale == 0.5);
    REQUIRE(hf.liquid_base == OracleParams{}.liquid_base);
}

TEST_CASE("grid generation covers the full cartesian product", "[synthdata]") {
    Dataset d = generate_table(standard_pressures(), standard_temperatures(), standard_carbons());
    REQUIRE(d.size() == 8 * 30 * 5);
    REQUIRE(standard_temperatures().size() == 30);
    REQUIRE(standard_temperatures().front() == 320.0);
    REQUIRE(standard_temperatures().back() == 900.0);
    for (const DataPoint& p : d.points) {
        REQUIRE(p.fidelity == Fidelity::Low);
        REQUIRE(p.density == oracle_density(p.pressure, p.temperature, p.carbon_count));
    }
}

TEST_CASE("grid noise is reproducible by seed", "[synthdata]") {
    OracleParams o;
    o.noise_sd = 2.0;
    o.seed = 77;
    Dataset a = generate_table({3, 10}, {400, 500, 600}, {8, 12}, o);
    Dataset b = generate_table({3, 10}, {400, 500, 600}, {8, 12}, o);
    o.seed = 78;
    Dataset c = generate_table({3, 10}, {400, 500, 600}, {8, 12}, o);

    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a.points[i].density == b.points[i].density);
        const double clean = oracle_density(a.points[i].pressure, a.points[i].temperature,
                                            a.points[i].carbon_count);
        if (a.points[i].density != clean) differs = true;
        if (a.points[i].density != c.points[i].density) differs = true;
    }
    REQUIRE(differs);
}
