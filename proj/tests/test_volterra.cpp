#include <doctest.h>

#include "vcir/errors.hpp"
#include "vcir/special.hpp"
#include "vcir/volterra.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace vcir;

namespace {

// Exact cell averages of the fractional resolvent from the closed form
// E_beta(t) = t^{a-1} E_{a,a}(beta t^a), whose antiderivative is
// t^a E_{a,a+1}(beta t^a).
double fractional_cell_average(double a, double beta, double t0, double t1) {
    auto F = [&](double t) {
        return t == 0.0 ? 0.0 : std::pow(t, a) * mittag_leffler(a, a + 1.0, beta * std::pow(t, a));
    };
    return (F(t1) - F(t0)) / (t1 - t0);
}

double classical_cell_average(double beta, double t0, double t1) {
    return (std::exp(beta * t0) - std::exp(beta * t1)) / (std::abs(beta) * (t1 - t0));
}

} // namespace

TEST_CASE("resolvent table shape and invariants") {
    const auto k = KernelSpec::fractional(0.75);
    const auto table = resolvent_second_kind(k, -1.0, 1e-2, 400);
    REQUIRE(table.cells() == 400);
    REQUIRE(table.cum_int.size() == 401);
    CHECK(table.script_e[0] == 1.0);
    for (std::size_t i = 0; i < table.cells(); ++i) {
        CHECK(table.e_beta[i] >= 0.0);
        if (i > 0) CHECK(table.e_beta[i] <= table.e_beta[i - 1] * (1.0 + 1e-12));
        CHECK(table.cum_int[i + 1] >= table.cum_int[i]);
        CHECK(table.cum_int_sq[i + 1] >= table.cum_int_sq[i]);
        CHECK(std::abs(table.script_e[i + 1] - (1.0 + -1.0 * table.cum_int[i + 1])) < 1e-12);
    }
}

TEST_CASE("classical resolvent: alpha = 1 gives exponential cell averages") {
    const auto k = KernelSpec::fractional(1.0);
    const double beta = -1.0, dt = 1e-3;
    const auto table = resolvent_second_kind(k, beta, dt, 2000);
    CHECK(table.e_beta[0] == doctest::Approx((1.0 - std::exp(-dt)) / dt).epsilon(1e-7));
    for (std::size_t i : {std::size_t(0), std::size_t(500), std::size_t(1999)}) {
        const double expect = classical_cell_average(beta, i * dt, (i + 1) * dt);
        CHECK(table.e_beta[i] == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("fractional resolvent matches the Mittag-Leffler closed form") {
    for (double a : {0.6, 0.75, 0.95}) {
        const auto k = KernelSpec::fractional(a);
        const double beta = -1.0, dt = 2e-3;
        const auto table = resolvent_second_kind(k, beta, dt, 1000);
        double worst = 0.0;
        for (std::size_t i = 1; i < table.cells(); i += 7) {
            const double expect = fractional_cell_average(a, beta, i * dt, (i + 1) * dt);
            worst = std::max(worst, std::abs(table.e_beta[i] - expect) / expect);
        }
        CHECK(worst < 2e-3);
    }
}

TEST_CASE("halving the step contracts the closed-form error by at least 1.8") {
    const double a = 0.75, beta = -1.0;
    const auto k = KernelSpec::fractional(a);
    // compare over a fixed region: under refinement the first cells move
    // toward the singularity, where the attainable rate degrades to dt^alpha
    auto max_err = [&](double dt, std::size_t n) {
        const auto table = resolvent_second_kind(k, beta, dt, n);
        double worst = 0.0;
        for (std::size_t i = 1; i < table.cells(); ++i) {
            if (static_cast<double>(i) * dt < 0.02) continue;
            const double expect = fractional_cell_average(a, beta, i * dt, (i + 1) * dt);
            worst = std::max(worst, std::abs(table.e_beta[i] - expect) / expect);
        }
        return worst;
    };
    const double coarse = max_err(4e-3, 500);
    const double fine = max_err(2e-3, 1000);
    CHECK(coarse / fine >= 1.8);
    CHECK(coarse < 1.0 * std::pow(4e-3, std::min(a, 1.0))); // C * dt^{min(alpha,1)} with C = 1
}

TEST_CASE("exponential-sum tail integral reproduces 1/(1/|K| + |beta|)") {
    const auto k = KernelSpec::exponential_sum({1.0}, {1.0});
    const auto tails = resolvent_tail_integrals(k, -2.0, 1e-8);
    CHECK(tails.int_e == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
    // E_beta(t) = e^{-3t} here, so the squared integral is 1/6
    CHECK(tails.int_e_sq == doctest::Approx(1.0 / 6.0).epsilon(1e-4));
}

TEST_CASE("fractional squared tail integral matches C_alpha |beta|^{1/alpha-2}") {
    for (double a : {0.7, 0.9}) {
        for (double beta : {-0.5, -2.0}) {
            const auto k = KernelSpec::fractional(a);
            const auto tails = resolvent_tail_integrals(k, beta, 1e-5);
            const double target = c_alpha(a) * std::pow(std::abs(beta), 1.0 / a - 2.0);
            CHECK(std::abs(tails.int_e_sq - target) * std::pow(std::abs(beta), 2.0 - 1.0 / a) < 1e-3);
        }
    }
}

TEST_CASE("theoretical moments") {
    const auto frac = KernelSpec::fractional(0.95);
    ModelParams p{1.0, 1.2, -1.0, 0.6};
    const auto [m1, m2] = theoretical_moments(p, frac);
    CHECK(m1 == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(m2 == doctest::Approx(1.44 + 0.432 * c_alpha(0.95)).epsilon(1e-10));

    // finite-mass kernel: m1 = (x0 + |K| b)/(1 + |K| |beta|)
    const auto ek = KernelSpec::exponential_sum({1.0}, {1.0});
    ModelParams q{0.0, 1.0, -1.0, 0.5};
    CHECK(theoretical_moments(q, ek).first == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mean and variance against the classical CIR closed forms") {
    const auto k = KernelSpec::fractional(1.0);
    ModelParams p{1.0, 1.2, -1.0, 0.6};
    const auto table = resolvent_second_kind(k, p.beta, 1e-3, 6000);
    const auto [mean1, var1] = mean_variance_at(p, k, 1.0, table);
    CHECK(mean1 == doctest::Approx(std::exp(-1.0) + 1.2 * (1.0 - std::exp(-1.0))).epsilon(1e-6));
    // kappa = |beta|, theta = b/|beta|
    const double kap = 1.0, th = 1.2, s2 = 0.36, t = 1.0;
    const double var_exact = p.x0 * s2 / kap * (std::exp(-kap * t) - std::exp(-2.0 * kap * t)) +
                             th * s2 / (2.0 * kap) * (1.0 - std::exp(-kap * t)) * (1.0 - std::exp(-kap * t));
    CHECK(var1 == doctest::Approx(var_exact).epsilon(1e-4));

    const auto [mean_far, var_far] = mean_variance_at(p, k, 6.0, table);
    CHECK(mean_far == doctest::Approx(1.2).epsilon(1e-2)); // mean -> m1
    CHECK(var_far > 0.0);

    ModelParams det = p;
    det.sigma = 0.0;
    CHECK(mean_variance_at(det, k, 2.0, table).second == 0.0);

    CHECK_THROWS_AS(mean_variance_at(p, k, 100.0, table), std::out_of_range);
}

TEST_CASE("fractional l1 mass identity") {
    const auto k = KernelSpec::fractional(0.8);
    for (double T : {0.3, 1.0, 7.0}) {
        CHECK(l1_mass(k, T) == doctest::Approx(std::pow(T, 0.8) / std::tgamma(1.8)).epsilon(1e-13));
    }
}

TEST_CASE("parameter validation") {
    ModelParams bad{1.0, 1.2, 0.5, 0.6};
    CHECK_THROWS_AS(bad.validate(), config_error);
    CHECK_THROWS_AS(resolvent_second_kind(KernelSpec::fractional(0.8), 1.0, 1e-2, 10),
                    std::invalid_argument);
}
