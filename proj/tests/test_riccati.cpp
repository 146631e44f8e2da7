#include <doctest.h>

#include "vcir/errors.hpp"
#include "vcir/rng.hpp"
#include "vcir/volterra.hpp"

#include <cmath>
#include <vector>

using namespace vcir;

namespace {

// Classical Riccati ODE V' = beta V - sigma^2 V^2 / 2, V(0) = u, solved via
// the linear equation for 1/V (Bernoulli).
double cir_riccati_exact(double u, double beta, double sigma, double t) {
    const double ab = std::abs(beta);
    return u * std::exp(beta * t) / (1.0 + u * sigma * sigma * (1.0 - std::exp(beta * t)) / (2.0 * ab));
}

// E[exp(-u X_t)] for the classical CIR process: exp(-x0 V(t) - b Int_0^t V).
double cir_laplace_exact(const ModelParams& p, double u, double t) {
    const double ab = std::abs(p.beta);
    const double w = 1.0 + u * p.sigma * p.sigma * (1.0 - std::exp(p.beta * t)) / (2.0 * ab);
    const double int_v = p.sigma > 0.0 ? 2.0 / (p.sigma * p.sigma) * std::log(w)
                                       : u * (1.0 - std::exp(p.beta * t)) / ab;
    return std::exp(-p.x0 * cir_riccati_exact(u, p.beta, p.sigma, t) - p.b * int_v);
}

} // namespace

TEST_CASE("riccati with zero total mass is identically zero") {
    const auto k = KernelSpec::fractional(0.8);
    ModelParams p{1.0, 1.2, -1.0, 0.6};
    AtomicMeasure mu;
    mu.atoms.push_back({0.5, 0.0});
    const auto V = riccati_solve(k, p, mu, 0.01, 200);
    for (double v : V) CHECK(v == 0.0);
}

TEST_CASE("classical kernel reduces the Riccati equation to the Bernoulli ODE") {
    const auto k = KernelSpec::fractional(1.0);
    ModelParams p{1.0, 1.2, -1.0, 0.3};
    AtomicMeasure mu;
    mu.atoms.push_back({0.0, 1.0});
    const double dt = 1e-3;
    const auto V = riccati_solve(k, p, mu, dt, 1000);
    double worst = 0.0;
    for (std::size_t j = 0; j < V.size(); j += 13) {
        const double mid = (static_cast<double>(j) + 0.5) * dt;
        worst = std::max(worst, std::abs(V[j] - cir_riccati_exact(1.0, p.beta, p.sigma, mid)));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("riccati sandwich 0 <= V <= sum u_j E_beta(. - s_j) for random measures") {
    const auto k = KernelSpec::fractional(0.8);
    ModelParams p{1.0, 1.2, -1.0, 0.8};
    const double dt = 5e-3;
    const std::size_t n = 400;
    const auto table = resolvent_second_kind(k, p.beta, dt, n);
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        AtomicMeasure mu;
        const auto n_atoms = 1 + static_cast<std::size_t>(uniform_pair(7, trial, 0)[0] * 3.0);
        for (std::size_t a = 0; a < n_atoms; ++a) {
            const auto u = uniform_pair(7, trial, a + 1);
            const auto node = static_cast<std::size_t>(u[0] * static_cast<double>(n / 2));
            mu.atoms.push_back({static_cast<double>(node) * dt, 2.0 * u[1]});
        }
        const auto V = riccati_solve(k, p, mu, dt, n);
        for (std::size_t j = 0; j < n; ++j) {
            double bound = 0.0;
            for (const auto& atom : mu.atoms) {
                const auto idx = static_cast<std::size_t>(std::llround(atom.location / dt));
                if (j >= idx) bound += atom.weight * table.e_beta[j - idx];
            }
            CHECK(V[j] >= -1e-10);
            CHECK(V[j] <= bound * (1.0 + 1e-6) + 1e-9);
        }
    }
}

TEST_CASE("laplace_fdd basics") {
    const auto k = KernelSpec::fractional(0.8);
    ModelParams p{1.0, 1.2, -1.0, 0.6};
    const double times[2] = {1.0, 2.0};
    const double zeros[2] = {0.0, 0.0};
    CHECK(laplace_fdd(k, p, times, zeros, 1e-3) == 1.0);

    // nonincreasing in each weight, values in (0, 1]
    double prev = 1.0;
    for (double u : {0.25, 0.5, 1.0, 2.0}) {
        const double w[2] = {u, 0.5};
        const double v = laplace_fdd(k, p, times, w, 2e-3);
        CHECK(v > 0.0);
        CHECK(v <= prev + 1e-12);
        prev = v;
    }

    const double bad_times[2] = {2.0, 1.0};
    const double w[2] = {1.0, 1.0};
    CHECK_THROWS_AS(laplace_fdd(k, p, bad_times, w, 1e-3), std::invalid_argument);
}

TEST_CASE("laplace_fdd matches the classical CIR transform for any x0") {
    const auto k = KernelSpec::fractional(1.0);
    for (double x0 : {1.0, 2.5}) {
        ModelParams p{x0, 1.2, -1.0, 0.3};
        for (double u : {0.5, 1.0, 3.0}) {
            const double t[1] = {1.0};
            const double w[1] = {u};
            const double got = laplace_fdd(k, p, t, w, 5e-4);
            CHECK(got == doctest::Approx(cir_laplace_exact(p, u, 1.0)).epsilon(2e-5));
        }
    }
}

TEST_CASE("laplace_fdd first order expansion reproduces the mean for x0 != 1") {
    const auto k = KernelSpec::fractional(0.75);
    ModelParams p{1.7, 1.2, -1.0, 0.6};
    const double dt = 1e-3;
    const auto table = resolvent_second_kind(k, p.beta, dt, 1000);
    const double mean = mean_variance_at(p, k, 1.0, table).first;
    const double t[1] = {1.0};
    const double u = 1e-5;
    const double w[1] = {u};
    const double lap = laplace_fdd(k, p, t, w, dt);
    CHECK((1.0 - lap) / u == doctest::Approx(mean).epsilon(1e-3));
}

TEST_CASE("stationary laplace: classical kernel gives the Gamma law, x0-free") {
    const auto k = KernelSpec::fractional(1.0);
    const double u = 1.0;
    const double expect = std::pow(1.0 + 0.09 * u / 2.0, -2.0 * 1.2 / 0.09);
    for (double x0 : {1.0, 2.5}) {
        ModelParams p{x0, 1.2, -1.0, 0.3};
        CHECK(stationary_laplace(k, p, u, 1e-8, 1e-3) == doctest::Approx(expect).epsilon(1e-4));
    }
    ModelParams p{1.0, 1.2, -1.0, 0.3};
    CHECK(stationary_laplace(k, p, 0.0, 1e-8) == 1.0);
}

TEST_CASE("stationary laplace derivative at zero equals the first stationary moment") {
    // the stopping bound scales with u, so the tolerance does too
    const auto frac = KernelSpec::fractional(0.8);
    ModelParams p{1.0, 1.2, -1.0, 0.8};
    const double u = 1e-5;
    const double lap = stationary_laplace(frac, p, u, 1e-7, 5e-3);
    CHECK((1.0 - lap) / u == doctest::Approx(theoretical_moments(p, frac).first).epsilon(1e-3));

    // finite-mass kernel keeps its genuine x0 dependence
    const auto ek = KernelSpec::exponential_sum({1.0}, {1.0});
    ModelParams q{2.0, 1.0, -1.0, 0.5};
    const double lap2 = stationary_laplace(ek, q, u, 1e-10, 1e-3);
    CHECK((1.0 - lap2) / u == doctest::Approx(theoretical_moments(q, ek).first).epsilon(1e-3));
}

TEST_CASE("factorization gap against the stationary product shrinks along lags") {
    const auto k = KernelSpec::fractional(0.8);
    ModelParams p{1.0, 1.2, -1.0, 0.8};
    const double dt = 2e-3;
    // the stopping bound decays like T^{-alpha}; the tail-corrected value is
    // far more accurate than the bound itself
    const double stat = stationary_laplace(k, p, 1.0, 2e-2, 5e-3);
    double prev = 1.0;
    for (double lag : {5.0, 10.0, 20.0, 40.0}) {
        const double t[2] = {lag, 2.0 * lag};
        const double w[2] = {1.0, 1.0};
        const double gap = std::abs(laplace_fdd(k, p, t, w, dt) - stat * stat);
        CHECK(gap <= prev * (1.0 + 1e-9));
        prev = gap;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("atoms snap to the nearest node within half a cell") {
    const auto k = KernelSpec::fractional(0.8);
    ModelParams p{1.0, 1.2, -1.0, 0.6};
    AtomicMeasure off;
    off.atoms.push_back({0.0503, 1.0}); // grid step 0.1: snaps to node 1
    AtomicMeasure on;
    on.atoms.push_back({0.1, 1.0});
    const auto a = riccati_solve(k, p, off, 0.1, 50);
    const auto b = riccati_solve(k, p, on, 0.1, 50);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
