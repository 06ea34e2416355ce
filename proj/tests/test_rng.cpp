#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "propsurro/rng.hpp"

using namespace propsurro;

TEST_CASE("same seed reproduces the draw sequence", "[rng]") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a.uniform() == b.uniform());
        REQUIRE(a.normal() == b.normal());
    }
}

TEST_CASE("different seeds give different sequences", "[rng]") {
    Rng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 50; ++i)
        if (a.uniform() == b.uniform()) ++equal;
    REQUIRE(equal < 5);
}

TEST_CASE("uniform draws stay inside their interval", "[rng]") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        double v = rng.uniform(-2.0, 5.0);
        REQUIRE(v >= -2.0);
        REQUIRE(v <= 5.0);
    }
}

TEST_CASE("log_uniform covers the range in log space", "[rng]") {
    Rng rng(4);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 2000; ++i) {
        double v = rng.log_uniform(0.01, 100.0);
        REQUIRE(v >= 0.01);
        REQUIRE(v <= 100.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    REQUIRE(lo < 0.1);
    REQUIRE(hi > 10.0);
}

TEST_CASE("index stays below the bound", "[rng]") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) REQUIRE(rng.index(7) < 7);
}

TEST_CASE("permutation is a bijection of 0..n-1", "[rng]") {
    Rng rng(6);
    auto perm = rng.permutation(100);
    REQUIRE(perm.size() == 100);
    auto sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 100; ++i) REQUIRE(sorted[i] == i);
    Rng rng2(6);
    REQUIRE(rng2.permutation(100) == perm);
}

TEST_CASE("permutation is not the identity for moderate n", "[rng]") {
    Rng rng(7);
    auto perm = rng.permutation(50);
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < 50; ++i)
        if (perm[i] == i) ++fixed;
    REQUIRE(fixed < 10);
}

TEST_CASE("mix_seed is deterministic and separates items", "[rng]") {
    REQUIRE(mix_seed(1, 2) == mix_seed(1, 2));
    REQUIRE(mix_seed(1, 2) != mix_seed(1, 3));
    REQUIRE(mix_seed(1, 2) != mix_seed(2, 2));
    Rng a(mix_seed(9, 0)), b(mix_seed(9, 1));
    int equal = 0;
    for (int i = 0; i < 50; ++i)
        if (a.uniform() == b.uniform()) ++equal;
    REQUIRE(equal < 5);
}

TEST_CASE("derive yields a reproducible sub-stream", "[rng]") {
    Rng a(11), b(11);
    Rng da = a.derive(3), db = b.derive(3);
    for (int i = 0; i < 20; ++i) REQUIRE(da.uniform() == db.uniform());
}
