#include <doctest.h>

#include "vcir/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace vcir;

TEST_CASE("gaussian draws are pure functions of (seed, stream, counter)") {
    const double a = gaussian(42, 7, 1000);
    const double b = gaussian(42, 7, 1000);
    CHECK(a == b);
    CHECK(gaussian(42, 7, 1001) != a);
    CHECK(gaussian(42, 8, 1000) != a);
    CHECK(gaussian(43, 7, 1000) != a);
}

TEST_CASE("uniform pairs live in (0,1]") {
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto u = uniform_pair(123, 5, i);
        CHECK(u[0] > 0.0);
        CHECK(u[0] <= 1.0);
        CHECK(u[1] > 0.0);
        CHECK(u[1] <= 1.0);
    }
}

TEST_CASE("gaussian stream has sane moments") {
    const std::size_t n = 200000;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = gaussian(2024, 0, i);
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    const double dn = static_cast<double>(n);
    CHECK(std::abs(s1 / dn) < 0.01);
    CHECK(s2 / dn == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(s3 / dn) < 0.03);
    CHECK(s4 / dn == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("philox blocks do not collide across nearby counters") {
    std::set<std::array<std::uint32_t, 4>> seen;
    for (std::uint64_t c = 0; c < 4096; ++c) seen.insert(philox::block(1, {static_cast<std::uint32_t>(c), 0, 0, 0}));
    CHECK(seen.size() == 4096);
}
