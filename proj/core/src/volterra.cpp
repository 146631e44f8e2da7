#include "vcir/volterra.hpp"
#include "vcir/errors.hpp"
#include "vcir/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vcir {

void ModelParams::validate() const {
    if (!(x0 >= 0.0)) throw config_error("x0 must be nonnegative");
    if (!(b >= 0.0)) throw config_error("b must be nonnegative");
    if (!(beta < 0.0)) throw config_error("beta must be negative (ergodic regime)");
    if (!(sigma >= 0.0)) throw config_error("sigma must be nonnegative");
}

double AtomicMeasure::total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
}

void AtomicMeasure::validate() const {
    for (const auto& a : atoms) {
        if (!(a.location >= 0.0)) throw config_error("atom locations must be nonnegative");
        if (!(a.weight >= 0.0)) throw config_error("atom weights must be nonnegative");
    }
}

namespace {

// Product-integration weights for the cell-averaged scheme. With
// J(t) = Int_0^t (t-s)K(s)ds,
//   D(0) = J(dt),  D(i) = J((i+1)dt) - 2 J(i dt) + J((i-1)dt),
// so that Int_{cell k} Int_0^t K(t-s) f(s) ds dt = sum_j f_j D(k-j) for
// piecewise-constant f. The second difference is formed in long double.
std::vector<double> convolution_weights(const KernelSpec& k, double dt, std::size_t n) {
    std::vector<long double> J(n + 2);
    for (std::size_t i = 0; i < n + 2; ++i)
        J[i] = k.second_antiderivative_l(static_cast<long double>(i) * static_cast<long double>(dt));
    std::vector<double> D(n);
    if (n > 0) D[0] = static_cast<double>(J[1]);
    for (std::size_t i = 1; i < n; ++i)
        D[i] = static_cast<double>(J[i + 1] - 2.0L * J[i] + J[i - 1]);
    return D;
}

// dt * (cell averages of K): A(i) = Int_{i dt}^{(i+1) dt} K.
std::vector<double> cell_integrals(const KernelSpec& k, double dt, std::size_t n) {
    std::vector<double> A(n);
    double prev = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double cur = k.integral(static_cast<double>(i) * dt);
        A[i - 1] = cur - prev;
        prev = cur;
    }
    return A;
}

// Grows a resolvent solve cell by cell; weights and kernel cells are
// extended on demand so the table can be continued cheaply.
struct ResolventSolver {
    const KernelSpec& kernel;
    double beta;
    double dt;
    std::vector<double> D;    // convolution weights
    std::vector<double> A;    // cell integrals of K
    std::vector<double> E;    // cell averages of E_beta

    ResolventSolver(const KernelSpec& k, double beta_, double dt_) : kernel(k), beta(beta_), dt(dt_) {}

    void extend(std::size_t n_target) {
        if (n_target <= E.size()) return;
        if (D.size() < n_target) {
            D = convolution_weights(kernel, dt, n_target);
            A = cell_integrals(kernel, dt, n_target);
        }
        const double denom = dt - beta * D[0];
        for (std::size_t k = E.size(); k < n_target; ++k) {
            double acc = 0.0;
            // sum_{j<k} E_j D(k-j), split into four lanes for a fixed
            // vectorizable reduction order
            const std::size_t m = k;
            double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
            std::size_t j = 0;
            for (; j + 4 <= m; j += 4) {
                a0 += E[j] * D[k - j];
                a1 += E[j + 1] * D[k - j - 1];
                a2 += E[j + 2] * D[k - j - 2];
                a3 += E[j + 3] * D[k - j - 3];
            }
            for (; j < m; ++j) a0 += E[j] * D[k - j];
            acc = (a0 + a1) + (a2 + a3);
            E.push_back((A[k] + beta * acc) / denom);
        }
    }

    // Int_cell E^2 per cell. Near the kernel singularity E tracks K, so the
    // cell is modelled as (Ebar/Kbar)^2 Int_cell K^2; once K is flat within
    // 5% per cell a linear-reconstruction correction is enough.
    std::vector<double> squared_cells() const {
        const std::size_t n = E.size();
        std::vector<double> out(n);
        double prevK2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double curK2 = kernel.squared_integral(static_cast<double>(j + 1) * dt);
            const double cellK2 = curK2 - prevK2;
            prevK2 = curK2;
            const bool steep = j + 1 < n && A[j] > 1.05 * A[j + 1];
            if (A[j] <= 0.0 || E[j] <= 0.0) {
                out[j] = 0.0; // far exponential tail underflow
            } else if (steep || j == 0) {
                const double ratio = E[j] / (A[j] / dt);
                out[j] = cellK2 * ratio * ratio;
            } else {
                double slope = 0.0;
                if (j + 1 < n)
                    slope = (E[j + 1] - E[j - 1]) / (2.0 * dt);
                else if (j >= 1)
                    slope = (E[j] - E[j - 1]) / dt;
                out[j] = dt * (E[j] * E[j] + slope * slope * dt * dt / 12.0);
            }
        }
        return out;
    }
};

ResolventTable assemble_table(const ResolventSolver& solver, double beta) {
    ResolventTable t;
    t.grid_step = solver.dt;
    t.e_beta = solver.E;
    t.e_sq_cell = solver.squared_cells();
    const std::size_t n = t.e_beta.size();
    t.cum_int.assign(n + 1, 0.0);
    t.cum_int_sq.assign(n + 1, 0.0);
    t.script_e.assign(n + 1, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        t.cum_int[k + 1] = t.cum_int[k] + solver.dt * t.e_beta[k];
        t.cum_int_sq[k + 1] = t.cum_int_sq[k] + t.e_sq_cell[k];
        t.script_e[k + 1] = 1.0 + beta * t.cum_int[k + 1];
    }
    return t;
}

double default_resolvent_step(const KernelSpec& k, double beta) {
    if (k.type() == KernelType::Fractional && k.alpha() < 1.0)
        return 1.5e-3 / std::pow(std::abs(beta), 1.0 / k.alpha());
    return 1e-3 / std::max(1.0, std::abs(beta));
}

} // namespace

ResolventTable resolvent_second_kind(const KernelSpec& k, double beta, double grid_step,
                                     std::size_t n_steps) {
    if (!(beta < 0.0)) throw std::invalid_argument("resolvent_second_kind requires beta < 0");
    if (!(grid_step > 0.0) || n_steps < 1)
        throw std::invalid_argument("resolvent_second_kind requires grid_step > 0 and n_steps >= 1");
    ResolventSolver solver(k, beta, grid_step);
    solver.extend(n_steps);
    return assemble_table(solver, beta);
}

TailIntegrals resolvent_tail_integrals(const KernelSpec& k, double beta, double tol,
                                       double grid_step) {
    if (!(beta < 0.0)) throw std::invalid_argument("resolvent_tail_integrals requires beta < 0");
    if (!(tol > 0.0)) throw std::invalid_argument("resolvent_tail_integrals requires tol > 0");
    const double dt = grid_step > 0.0 ? grid_step : default_resolvent_step(k, beta);
    const double mass = k.integral(std::numeric_limits<double>::infinity());
    const double int_e_exact = 1.0 / ((std::isinf(mass) ? 0.0 : 1.0 / mass) + std::abs(beta));

    ResolventSolver solver(k, beta, dt);
    std::size_t n = std::max<std::size_t>(64, static_cast<std::size_t>(8.0 / (std::abs(beta) * dt)));
    const std::size_t n_cap = 400000;
    double cum_e = 0.0;
    std::size_t consumed = 0;
    while (true) {
        solver.extend(n);
        for (; consumed < solver.E.size(); ++consumed) cum_e += dt * solver.E[consumed];
        const double tail = solver.E.back() * std::max(0.0, int_e_exact - cum_e);
        if (tail < tol) break;
        if (n >= n_cap)
            throw numerical_error("resolvent_tail_integrals: tail tolerance " + std::to_string(tol) +
                                  " not reached within " + std::to_string(n_cap) + " cells");
        n = std::min(n_cap, n * 2);
    }
    TailIntegrals out;
    const auto sq = solver.squared_cells();
    double cum_sq = 0.0;
    for (double v : sq) cum_sq += v;
    out.int_e = cum_e;
    out.int_e_sq = cum_sq;
    out.horizon = dt * static_cast<double>(solver.E.size());
    return out;
}

std::pair<double, double> theoretical_moments(const ModelParams& p, const KernelSpec& k) {
    p.validate();
    const double mass = k.integral(std::numeric_limits<double>::infinity());
    const double m1 = std::isinf(mass) ? p.b / std::abs(p.beta)
                                       : (p.x0 + mass * p.b) / (1.0 + mass * std::abs(p.beta));
    double int_e_sq;
    if (k.type() == KernelType::Fractional) {
        int_e_sq = c_alpha(k.alpha()) * std::pow(std::abs(p.beta), 1.0 / k.alpha() - 2.0);
    } else {
        int_e_sq = resolvent_tail_integrals(k, p.beta, 1e-7).int_e_sq;
    }
    const double m2 = m1 * m1 + m1 * p.sigma * p.sigma * int_e_sq;
    return {m1, m2};
}

std::pair<double, double> mean_variance_at(const ModelParams& p, const KernelSpec& k, double t,
                                           const ResolventTable& table) {
    (void)k;
    const double dt = table.grid_step;
    const auto kt = static_cast<std::size_t>(std::llround(t / dt));
    if (t < 0.0 || kt > table.cells())
        throw std::out_of_range("mean_variance_at: t beyond table horizon");
    auto mean_at = [&](std::size_t i) { return table.script_e[i] * p.x0 + p.b * table.cum_int[i]; };
    const double mean = mean_at(kt);
    double var = 0.0;
    for (std::size_t j = 0; j < kt; ++j) {
        const double m_mid = 0.5 * (mean_at(kt - j) + mean_at(kt - j - 1));
        var += table.e_sq_cell[j] * m_mid;
    }
    var *= p.sigma * p.sigma;
    return {mean, var};
}

namespace {

struct RiccatiSolution {
    std::vector<double> V;      // cell averages
    std::vector<double> R;      // R(V) per cell
    double max_v = 0.0;
};

RiccatiSolution riccati_cells(const KernelSpec& k, const ModelParams& p,
                              const std::vector<std::pair<std::size_t, double>>& atoms, double dt,
                              std::size_t n_start, std::size_t n_target, RiccatiSolution sol,
                              std::vector<double>& D, std::vector<double>& A) {
    if (D.size() < n_target) {
        D = convolution_weights(k, dt, n_target);
        A = cell_integrals(k, dt, n_target);
    }
    const double half_s2 = 0.5 * p.sigma * p.sigma;
    auto R_of = [&](double x) { return p.beta * x - half_s2 * x * x; };
    sol.V.reserve(n_target);
    sol.R.reserve(n_target);
    for (std::size_t kk = n_start; kk < n_target; ++kk) {
        double F = 0.0;
        for (const auto& [idx, w] : atoms)
            if (kk >= idx) F += w * A[kk - idx];
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        std::size_t j = 0;
        for (; j + 4 <= kk; j += 4) {
            a0 += sol.R[j] * D[kk - j];
            a1 += sol.R[j + 1] * D[kk - j - 1];
            a2 += sol.R[j + 2] * D[kk - j - 2];
            a3 += sol.R[j + 3] * D[kk - j - 3];
        }
        for (; j < kk; ++j) a0 += sol.R[j] * D[kk - j];
        const double hist = F + (a0 + a1) + (a2 + a3);
        const double pred = (hist + (kk > 0 ? sol.R[kk - 1] : 0.0) * D[0]) / dt;
        const double v = (hist + R_of(pred) * D[0]) / dt;
        if (v < -1e-10)
            throw numerical_error("riccati_solve: negative iterate V=" + std::to_string(v) +
                                  " at t=" + std::to_string(static_cast<double>(kk) * dt) +
                                  "; reduce grid_step");
        sol.V.push_back(v);
        sol.R.push_back(R_of(v));
        sol.max_v = std::max(sol.max_v, v);
    }
    return sol;
}

std::vector<std::pair<std::size_t, double>> snap_atoms(const AtomicMeasure& mu, double dt) {
    std::vector<std::pair<std::size_t, double>> snapped;
    for (const auto& a : mu.atoms) {
        const auto idx = static_cast<std::size_t>(std::llround(a.location / dt));
        if (std::abs(a.location - static_cast<double>(idx) * dt) > 0.5 * dt + 1e-12)
            throw std::invalid_argument("riccati_solve: atom at " + std::to_string(a.location) +
                                        " does not lie on the grid");
        if (a.weight != 0.0) snapped.emplace_back(idx, a.weight);
    }
    return snapped;
}

} // namespace

std::vector<double> riccati_solve(const KernelSpec& k, const ModelParams& p, const AtomicMeasure& mu,
                                  double grid_step, std::size_t n_steps) {
    p.validate();
    mu.validate();
    if (!(grid_step > 0.0) || n_steps < 1)
        throw std::invalid_argument("riccati_solve requires grid_step > 0 and n_steps >= 1");
    const auto atoms = snap_atoms(mu, grid_step);
    std::vector<double> D, A;
    auto sol = riccati_cells(k, p, atoms, grid_step, 0, n_steps, {}, D, A);
    return std::move(sol.V);
}

double laplace_fdd(const KernelSpec& k, const ModelParams& p, std::span<const double> times,
                   std::span<const double> u, double grid_step) {
    p.validate();
    if (times.empty() || times.size() != u.size())
        throw std::invalid_argument("laplace_fdd requires matching non-empty times and weights");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0)) throw std::invalid_argument("laplace_fdd requires positive times");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw std::invalid_argument("laplace_fdd requires strictly ascending times");
        if (!(u[i] >= 0.0)) throw std::invalid_argument("laplace_fdd requires nonnegative weights");
    }
    const double t_n = times.back();
    const auto n_steps = static_cast<std::size_t>(std::llround(t_n / grid_step));
    if (n_steps < 1) throw std::invalid_argument("laplace_fdd: horizon shorter than one grid step");

    AtomicMeasure mu;
    double total = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        mu.atoms.push_back({t_n - times[i], u[i]});
        total += u[i];
    }
    if (total == 0.0) return 1.0;
    const auto atoms = snap_atoms(mu, grid_step);
    std::vector<double> D, A;
    const auto sol = riccati_cells(k, p, atoms, grid_step, 0, n_steps, {}, D, A);
    double int_v = 0.0, int_r = 0.0;
    for (std::size_t j = 0; j < sol.V.size(); ++j) {
        int_v += sol.V[j];
        int_r += sol.R[j];
    }
    int_v *= grid_step;
    int_r *= grid_step;
    return std::exp(-p.x0 * total - p.x0 * int_r - p.b * int_v);
}

double stationary_laplace(const KernelSpec& k, const ModelParams& p, double u, double tol,
                          double grid_step) {
    p.validate();
    if (!(u >= 0.0)) throw std::invalid_argument("stationary_laplace requires u >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("stationary_laplace requires tol > 0");
    if (u == 0.0) return 1.0;
    const double dt = grid_step > 0.0 ? grid_step : default_resolvent_step(k, p.beta);

    const double mass = k.integral(std::numeric_limits<double>::infinity());
    const double int_e_exact = 1.0 / ((std::isinf(mass) ? 0.0 : 1.0 / mass) + std::abs(p.beta));
    const double horizon_cap = 1e4 / std::abs(p.beta);

    AtomicMeasure mu;
    mu.atoms.push_back({0.0, u});
    const auto atoms = snap_atoms(mu, dt);

    ResolventSolver res(k, p.beta, dt);
    RiccatiSolution sol;
    std::vector<double> D, A;
    std::size_t n = std::max<std::size_t>(64, static_cast<std::size_t>(4.0 / (std::abs(p.beta) * dt)));
    const std::size_t cell_cap = 300000;
    double cum_e = 0.0;
    std::size_t consumed = 0;
    double tail_e = 0.0;
    while (true) {
        res.extend(n);
        const std::size_t start = sol.V.size();
        sol = riccati_cells(k, p, atoms, dt, start, n, std::move(sol), D, A);
        for (; consumed < res.E.size(); ++consumed) cum_e += dt * res.E[consumed];
        tail_e = std::max(0.0, int_e_exact - cum_e);
        const double bound =
            (p.x0 * (std::abs(p.beta) + 0.5 * p.sigma * p.sigma * sol.max_v) + p.b) * u * tail_e;
        if (bound < tol) break;
        if (static_cast<double>(n) * dt >= horizon_cap || 2 * n > cell_cap)
            throw numerical_error("stationary_laplace: tail bound " + std::to_string(bound) +
                                  " did not reach tol " + std::to_string(tol) +
                                  " before the horizon cap " + std::to_string(horizon_cap));
        n *= 2;
    }
    double int_v = 0.0, int_r = 0.0, int_v_sq = 0.0;
    for (std::size_t j = 0; j < sol.V.size(); ++j) {
        int_v += sol.V[j];
        int_r += sol.R[j];
        int_v_sq += sol.V[j] * sol.V[j];
    }
    int_v *= dt;
    int_r *= dt;
    int_v_sq *= dt;
    // Beyond the horizon V(t) ~ c_eff E_beta(t) with the nonlinearity
    // exhausted, so the remaining integrals are c_eff * tail_e up to terms
    // an order smaller; this sharpens the truncated value well inside the
    // stopping bound.
    const double c_eff = u - 0.5 * p.sigma * p.sigma * int_v_sq;
    int_v += c_eff * tail_e;
    int_r += p.beta * c_eff * tail_e;
    return std::exp(-p.x0 * u - p.x0 * int_r - p.b * int_v);
}

} // namespace vcir
