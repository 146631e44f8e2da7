#include "vcir/estimate.hpp"
#include "vcir/errors.hpp"
#include "vcir/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vcir {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EstimateReport degenerate_report(EstimatorKind kind) {
    EstimateReport r;
    r.kind = kind;
    r.degenerate = true;
    r.b_hat = kNaN;
    r.beta_hat = kNaN;
    return r;
}
} // namespace

Matrix2 Matrix2::sqrt() const {
    if (!positive_definite()) throw std::domain_error("Matrix2::sqrt requires a positive definite matrix");
    const double s = std::sqrt(det());
    const double t = std::sqrt(a11 + a22 + 2.0 * s);
    return {(a11 + s) / t, a12 / t, (a22 + s) / t};
}

ObservationSet ObservationSet::from_path(const Path& path, double obs_step, double factor,
                                         double sigma_known) {
    const double horizon = path.grid.horizon();
    const auto n = static_cast<std::size_t>(std::llround(horizon / obs_step));
    const double fine_step = obs_step / factor;
    const auto m = static_cast<std::size_t>(std::llround(horizon / fine_step));
    const double coarse_step = horizon / static_cast<double>(n);
    const double f_step = horizon / static_cast<double>(m);
    return from_path(path, obs_step, factor, sigma_known,
                     first_kind_cell_masses(path.kernel, f_step, m),
                     first_kind_cell_masses(path.kernel, coarse_step, n));
}

ObservationSet ObservationSet::from_path(const Path& path, double obs_step, double factor,
                                         double sigma_known, const std::vector<double>& fine_masses,
                                         const std::vector<double>& coarse_masses) {
    if (!(obs_step > 0.0)) throw config_error("observation step must be positive");
    if (!(factor >= 1.0)) throw config_error("factor m/n must be >= 1");
    const double horizon = path.grid.horizon();
    const auto n = static_cast<std::size_t>(std::llround(horizon / obs_step));
    if (n < 2 || std::abs(static_cast<double>(n) * obs_step - horizon) > 1e-9 * horizon)
        throw config_error("observation step must divide the path horizon");
    const double fine_step = obs_step / factor;
    const auto m = static_cast<std::size_t>(std::llround(horizon / fine_step));
    if (std::abs(static_cast<double>(m) * fine_step - horizon) > 1e-9 * horizon)
        throw config_error("factor must produce a whole number of fine cells");
    if (m % n != 0) throw config_error("fine partition must refine the coarse partition");
    if (path.grid.n_steps % m != 0)
        throw config_error("simulation grid must refine the fine partition P_m");

    ObservationSet obs;
    obs.x_coarse = coarsen(path, n);
    obs.z_fine = z_process(path, path.kernel, m, fine_masses);
    obs.z_coarse = z_process(path, path.kernel, n, coarse_masses);
    obs.n_partition = Grid{horizon / static_cast<double>(n), n};
    obs.m_partition = Grid{horizon / static_cast<double>(m), m};
    obs.sigma = sigma_known;
    obs.kernel = path.kernel;
    obs.x0 = path.params.x0;
    return obs;
}

void ObservationSet::validate() const {
    if (x_coarse.size() != n_partition.n_steps)
        throw config_error("x_coarse must hold one value per coarse cell");
    if (z_fine.size() != m_partition.n_steps + 1)
        throw config_error("z_fine must hold one value per fine node");
    if (z_coarse.size() != n_partition.n_steps + 1)
        throw config_error("z_coarse must hold one value per coarse node");
    if (m_partition.n_steps % n_partition.n_steps != 0)
        throw config_error("P_m must refine P_n");
    for (double x : x_coarse)
        if (!(x >= 0.0)) throw config_error("observations must be nonnegative");
}

EstimateReport mom_estimate(std::span<const double> x_samples, double sigma, double alpha) {
    if (x_samples.size() < 2) throw std::invalid_argument("mom_estimate needs at least 2 samples");
    if (!(sigma > 0.0)) throw std::invalid_argument("mom_estimate requires sigma > 0");
    if (!(alpha > 0.5 && alpha <= 1.0)) throw std::invalid_argument("mom_estimate requires alpha in (1/2,1]");
    double m1 = 0.0, m2 = 0.0;
    for (double x : x_samples) {
        m1 += x;
        m2 += x * x;
    }
    m1 /= static_cast<double>(x_samples.size());
    m2 /= static_cast<double>(x_samples.size());
    const double var = m2 - m1 * m1;
    if (!(m1 > 1e-12) || !(var > 1e-12 * std::max(1.0, m2))) return degenerate_report(EstimatorKind::MoM);
    const double ratio = c_alpha(alpha) * sigma * sigma * m1 / var;
    const double r = std::pow(ratio, alpha / (2.0 * alpha - 1.0));
    EstimateReport rep;
    rep.kind = EstimatorKind::MoM;
    rep.b_hat = m1 * r;
    rep.beta_hat = -r;
    return rep;
}

namespace {

struct Sums {
    double t_n;
    double S_X;
    double S_inv;
    double S_dZ;
    double Z_T;
    bool zero_observation;
};

Sums observation_sums(const ObservationSet& obs) {
    obs.validate();
    const std::size_t n = obs.n_partition.n_steps;
    const double dt = obs.n_partition.step;
    const std::size_t stride = obs.m_partition.n_steps / n;
    Sums s{obs.n_partition.horizon(), 0.0, 0.0, 0.0, obs.z_coarse.back(), false};
    for (std::size_t j = 0; j < n; ++j) {
        const double x = obs.x_coarse[j];
        if (x <= 0.0) {
            s.zero_observation = true;
            return s;
        }
        s.S_X += x * dt;
        s.S_inv += dt / x;
        s.S_dZ += (obs.z_fine[(j + 1) * stride] - obs.z_fine[j * stride]) / x;
    }
    return s;
}

} // namespace

EstimateReport mle_joint(const ObservationSet& obs) {
    const Sums s = observation_sums(obs);
    if (s.zero_observation) return degenerate_report(EstimatorKind::MLEJoint);
    const double D = s.t_n * s.t_n - s.S_X * s.S_inv;
    if (std::abs(D) < 1e-10 * s.t_n * s.t_n) return degenerate_report(EstimatorKind::MLEJoint);
    EstimateReport rep;
    rep.kind = EstimatorKind::MLEJoint;
    rep.b_hat = (s.t_n * s.Z_T - s.S_X * s.S_dZ) / D;
    rep.beta_hat = (s.t_n * s.S_dZ - s.Z_T * s.S_inv) / D;
    return rep;
}

EstimateReport mle_beta_known_b(const ObservationSet& obs, double b) {
    obs.validate();
    const std::size_t n = obs.n_partition.n_steps;
    const double dt = obs.n_partition.step;
    double S_X = 0.0;
    for (std::size_t j = 0; j < n; ++j) S_X += obs.x_coarse[j] * dt;
    if (!(S_X > 1e-12)) return degenerate_report(EstimatorKind::MLEBetaOnly);
    EstimateReport rep;
    rep.kind = EstimatorKind::MLEBetaOnly;
    rep.b_hat = b;
    rep.beta_hat = (obs.z_coarse.back() - obs.n_partition.horizon() * b) / S_X;
    return rep;
}

EstimateReport mle_b_known_beta(const ObservationSet& obs, double beta) {
    const Sums s = observation_sums(obs);
    if (s.zero_observation || !(s.S_inv > 1e-12)) return degenerate_report(EstimatorKind::MLEbOnly);
    EstimateReport rep;
    rep.kind = EstimatorKind::MLEbOnly;
    rep.b_hat = (s.S_dZ - beta * s.t_n) / s.S_inv;
    rep.beta_hat = beta;
    return rep;
}

FisherEstimate fisher_info(const ModelParams& p, const KernelSpec& k, int mc_paths, double horizon,
                           double step, std::uint64_t seed) {
    p.validate();
    if (mc_paths < 1) throw std::invalid_argument("fisher_info requires mc_paths >= 1");
    const auto n = static_cast<std::size_t>(std::llround(horizon / step));
    if (n < 2) throw std::invalid_argument("fisher_info: horizon too short for the step");
    Grid g{step, n};
    FisherEstimate out;
    std::vector<double> averages;
    averages.reserve(static_cast<std::size_t>(mc_paths));
    std::uint64_t next_extra = static_cast<std::uint64_t>(mc_paths);
    for (int j = 0; j < mc_paths; ++j) {
        std::uint64_t stream = static_cast<std::uint64_t>(j);
        for (;;) {
            const Path path = simulate_path(p, k, g, seed, stream);
            bool zero = false;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (path.values[i] == 0.0) {
                    zero = true;
                    break;
                }
                acc += 1.0 / path.values[i];
            }
            if (!zero) {
                averages.push_back(acc * step / horizon);
                break;
            }
            ++out.rejected_paths;
            if (out.rejected_paths > 4 * mc_paths)
                throw numerical_error("fisher_info: too many paths hit zero; boundary assumption violated");
            stream = next_extra++;
        }
    }
    double mean = 0.0;
    for (double a : averages) mean += a;
    mean /= static_cast<double>(averages.size());
    double var = 0.0;
    for (double a : averages) var += (a - mean) * (a - mean);
    var = averages.size() > 1 ? var / static_cast<double>(averages.size() - 1) : 0.0;
    out.reciprocal_moment = mean;
    out.std_error = std::sqrt(var / static_cast<double>(averages.size()));
    out.info = {mean, 1.0, theoretical_moments(p, k).first};
    return out;
}

std::array<double, 2> standardize_errors(const EstimateReport& report, const ModelParams& truth,
                                         const Matrix2& fisher, double horizon) {
    if (report.degenerate) throw std::invalid_argument("standardize_errors: degenerate report");
    if (!fisher.positive_definite())
        throw std::domain_error("standardize_errors: Fisher matrix must be positive definite");
    if (!(truth.sigma > 0.0)) throw std::invalid_argument("standardize_errors requires sigma > 0");
    const Matrix2 root = fisher.sqrt();
    const double eb = report.b_hat - truth.b;
    const double ebeta = report.beta_hat - truth.beta;
    const double scale = std::sqrt(horizon) / truth.sigma;
    return {scale * (root.a11 * eb + root.a12 * ebeta), scale * (root.a12 * eb + root.a22 * ebeta)};
}

} // namespace vcir
