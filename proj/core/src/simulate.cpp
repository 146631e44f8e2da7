#include "vcir/simulate.hpp"
#include "vcir/errors.hpp"
#include "vcir/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vcir {

void Grid::validate() const {
    if (!(step > 0.0)) throw config_error("grid step must be positive");
    if (n_steps < 1) throw config_error("grid needs at least one step");
}

Path simulate_path(const ModelParams& p, const KernelSpec& k, const Grid& g, std::uint64_t seed,
                   std::uint64_t stream, EulerWeightRule rule) {
    p.validate();
    g.validate();
    const std::size_t n = g.n_steps;
    const double dt = g.step;
    const double sqdt = std::sqrt(dt);

    std::vector<double> w(n);
    if (rule == EulerWeightRule::PointEvaluation) {
        for (std::size_t l = 0; l < n; ++l) w[l] = k.eval(static_cast<double>(l + 1) * dt);
    } else {
        double prev = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double cur = k.integral(static_cast<double>(l + 1) * dt);
            w[l] = (cur - prev) / dt;
            prev = cur;
        }
    }

    Path path{g, std::vector<double>(n + 1), p, k, seed};
    auto& X = path.values;
    X[0] = p.x0;
    std::vector<double> drift(n), diff(n);
    for (std::size_t step_k = 0; step_k < n; ++step_k) {
        drift[step_k] = p.b + p.beta * X[step_k];
        diff[step_k] = std::sqrt(X[step_k]) * gaussian(seed, stream, step_k);
        // S1 = sum_{i<=k} w[k-i] drift[i], S2 likewise; four fixed lanes
        double s1a = 0.0, s1b = 0.0, s1c = 0.0, s1d = 0.0;
        double s2a = 0.0, s2b = 0.0, s2c = 0.0, s2d = 0.0;
        const std::size_t m = step_k + 1;
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) {
            s1a += w[step_k - i] * drift[i];
            s2a += w[step_k - i] * diff[i];
            s1b += w[step_k - i - 1] * drift[i + 1];
            s2b += w[step_k - i - 1] * diff[i + 1];
            s1c += w[step_k - i - 2] * drift[i + 2];
            s2c += w[step_k - i - 2] * diff[i + 2];
            s1d += w[step_k - i - 3] * drift[i + 3];
            s2d += w[step_k - i - 3] * diff[i + 3];
        }
        for (; i < m; ++i) {
            s1a += w[step_k - i] * drift[i];
            s2a += w[step_k - i] * diff[i];
        }
        const double s1 = (s1a + s1b) + (s1c + s1d);
        const double s2 = (s2a + s2b) + (s2c + s2d);
        X[step_k + 1] = std::abs(p.x0 + dt * s1 + p.sigma * sqdt * s2);
    }
    return path;
}

std::vector<double> coarsen(const Path& path, std::size_t n_coarse) {
    const std::size_t n = path.grid.n_steps;
    if (n_coarse == 0 || n % n_coarse != 0)
        throw std::domain_error("coarsen: n_coarse must divide the path step count");
    const std::size_t stride = n / n_coarse;
    std::vector<double> out(n_coarse);
    for (std::size_t j = 0; j < n_coarse; ++j) out[j] = path.values[j * stride];
    return out;
}

std::vector<double> z_process(const Path& path, const KernelSpec& k, std::size_t m_steps,
                              const std::vector<double>& cell_masses) {
    const std::size_t n = path.grid.n_steps;
    if (m_steps == 0 || n % m_steps != 0)
        throw std::domain_error("z_process: m_steps must divide the path step count");
    if (cell_masses.size() < m_steps)
        throw std::invalid_argument("z_process: need at least m_steps cell masses");
    const std::size_t stride = n / m_steps;
    const double kappa = k.zero_plus_inverse();
    const double x0 = path.params.x0;

    std::vector<double> xs(m_steps + 1);
    for (std::size_t j = 0; j <= m_steps; ++j) xs[j] = path.values[j * stride] - x0;

    std::vector<double> Z(m_steps + 1, 0.0);
    for (std::size_t j = 1; j <= m_steps; ++j) {
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        std::size_t i = 0;
        for (; i + 4 <= j; i += 4) {
            a0 += cell_masses[i] * xs[j - i];
            a1 += cell_masses[i + 1] * xs[j - i - 1];
            a2 += cell_masses[i + 2] * xs[j - i - 2];
            a3 += cell_masses[i + 3] * xs[j - i - 3];
        }
        for (; i < j; ++i) a0 += cell_masses[i] * xs[j - i];
        Z[j] = kappa * xs[j] + (a0 + a1) + (a2 + a3);
    }
    return Z;
}

std::vector<double> z_process(const Path& path, const KernelSpec& k, std::size_t m_steps) {
    const std::size_t n = path.grid.n_steps;
    if (m_steps == 0 || n % m_steps != 0)
        throw std::domain_error("z_process: m_steps must divide the path step count");
    const double step = path.grid.horizon() / static_cast<double>(m_steps);
    return z_process(path, k, m_steps, first_kind_cell_masses(k, step, m_steps));
}

} // namespace vcir
