#include "vcir/experiments.hpp"
#include "vcir/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace vcir {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const auto workers = static_cast<unsigned>(
        std::min<std::size_t>(count, threads > 0 ? static_cast<std::size_t>(threads) : hw));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev_of(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Exact middle element for odd counts, midpoint interpolation for even.
double median_of(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730951); }

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream f(path, std::ios::binary); // fixed newline policy across platforms
    if (!f) throw config_error("cannot open output file " + path);
    return f;
}

struct PathResults {
    EstimateReport joint, mom, b_only, beta_only;
};

} // namespace

void ExperimentConfig::validate() const {
    params.validate();
    if (!(horizon > 0.0)) throw config_error("horizon must be positive");
    if (!(sim_step > 0.0) || !(obs_step > 0.0)) throw config_error("steps must be positive");
    if (!(factor >= 1.0)) throw config_error("factor must be >= 1");
    if (n_paths < 1) throw config_error("n_paths must be >= 1");
    const double fine = obs_step / factor;
    const double ratio = fine / sim_step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0 - 1e-9)
        throw config_error("sim_step must divide obs_step/factor so P_m nodes lie on the simulation grid");
    const double n_obs = horizon / obs_step;
    if (std::abs(n_obs - std::round(n_obs)) > 1e-6) throw config_error("obs_step must divide horizon");
    if (estimators.empty()) throw config_error("at least one estimator must be requested");
}

std::array<NormalityStats, 2> normality_diagnostics(
    std::span<const std::array<double, 2>> standardized) {
    if (standardized.size() < 30)
        throw std::invalid_argument("normality_diagnostics requires at least 30 samples");
    std::array<NormalityStats, 2> out;
    for (int c = 0; c < 2; ++c) {
        std::vector<double> v(standardized.size());
        for (std::size_t i = 0; i < standardized.size(); ++i) v[i] = standardized[i][c];
        const double n = static_cast<double>(v.size());
        const double mu = mean_of(v);
        double m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (double x : v) {
            const double d = x - mu;
            m2 += d * d;
            m3 += d * d * d;
            m4 += d * d * d * d;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        NormalityStats s;
        s.count = static_cast<int>(v.size());
        s.mean = mu;
        s.stddev = stddev_of(v, mu);
        s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
        s.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
        std::sort(v.begin(), v.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double F = normal_cdf(v[i]);
            ks = std::max(ks, std::max(std::abs(static_cast<double>(i + 1) / n - F),
                                       std::abs(F - static_cast<double>(i) / n)));
        }
        s.ks = ks;
        for (double x : v) {
            const int bin = static_cast<int>(std::floor((x + 4.0) / 8.0 * 30.0));
            if (bin >= 0 && bin < 30) ++s.bins[static_cast<std::size_t>(bin)];
        }
        out[static_cast<std::size_t>(c)] = s;
    }
    return out;
}

ExperimentSummary run_mc_table(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const auto n_sim = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.sim_step));
    const Grid grid{cfg.horizon / static_cast<double>(n_sim), n_sim};
    const auto n_obs = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.obs_step));
    const double fine_step = cfg.obs_step / cfg.factor;
    const auto m_obs = static_cast<std::size_t>(std::llround(cfg.horizon / fine_step));

    const auto fine_masses = first_kind_cell_masses(cfg.kernel, grid.horizon() / static_cast<double>(m_obs), m_obs);
    const auto coarse_masses =
        first_kind_cell_masses(cfg.kernel, grid.horizon() / static_cast<double>(n_obs), n_obs);

    auto wants = [&](EstimatorKind k) {
        return std::find(cfg.estimators.begin(), cfg.estimators.end(), k) != cfg.estimators.end();
    };
    const bool want_joint = wants(EstimatorKind::MLEJoint);
    const bool want_mom = wants(EstimatorKind::MoM);
    const bool want_b = wants(EstimatorKind::MLEbOnly);
    const bool want_beta = wants(EstimatorKind::MLEBetaOnly);
    if (want_mom && cfg.kernel.type() != KernelType::Fractional)
        throw config_error("method of moments is defined for the fractional kernel only");

    std::vector<PathResults> results(static_cast<std::size_t>(cfg.n_paths));
    parallel_for(results.size(), cfg.threads, [&](std::size_t i) {
        const Path path =
            simulate_path(cfg.params, cfg.kernel, grid, cfg.base_seed + i, i, cfg.weight_rule);
        const auto obs =
            ObservationSet::from_path(path, cfg.obs_step, cfg.factor, cfg.params.sigma, fine_masses, coarse_masses);
        PathResults r;
        if (want_joint) r.joint = mle_joint(obs);
        if (want_mom) r.mom = mom_estimate(obs.x_coarse, cfg.params.sigma, cfg.kernel.alpha());
        if (want_b) r.b_only = mle_b_known_beta(obs, cfg.params.beta);
        if (want_beta) r.beta_only = mle_beta_known_b(obs, cfg.params.b);
        results[i] = r;
    });

    ExperimentSummary summary;
    auto add_rows = [&](const std::string& b_name, const std::string& beta_name,
                        auto member, bool b_row, bool beta_row) {
        std::vector<double> bs, betas;
        int degenerate = 0;
        for (const auto& r : results) {
            const EstimateReport& rep = r.*member;
            if (rep.degenerate) {
                ++degenerate;
                continue;
            }
            bs.push_back(rep.b_hat);
            betas.push_back(rep.beta_hat);
        }
        auto make = [&](const std::string& name, std::vector<double>& v) {
            SummaryRow row;
            row.estimator = name;
            row.count = static_cast<int>(v.size());
            row.degenerate = degenerate;
            if (!v.empty()) {
                row.mean = mean_of(v);
                row.median = median_of(v);
                row.stddev = stddev_of(v, row.mean);
            } else {
                row.mean = row.median = row.stddev = kNaN;
            }
            summary.rows.push_back(row);
        };
        if (b_row) make(b_name, bs);
        if (beta_row) make(beta_name, betas);
    };
    if (want_joint) add_rows("b_mle", "beta_mle", &PathResults::joint, true, true);
    if (want_mom) add_rows("b_mom", "beta_mom", &PathResults::mom, true, true);
    if (want_b) add_rows("b_mle_known_beta", "", &PathResults::b_only, true, false);
    if (want_beta) add_rows("", "beta_mle_known_b", &PathResults::beta_only, false, true);

    bool all_degenerate = true;
    for (const auto& row : summary.rows)
        if (row.count > 0) all_degenerate = false;
    if (all_degenerate) throw degenerate_error("run_mc_table: every path was degenerate for every estimator");

    if (want_joint) {
        const auto fisher = fisher_info(cfg.params, cfg.kernel, cfg.fisher_paths, cfg.horizon,
                                        cfg.obs_step, cfg.base_seed + static_cast<std::uint64_t>(cfg.n_paths));
        summary.fisher = fisher;
        for (const auto& r : results) {
            if (r.joint.degenerate) continue;
            summary.standardized_errors.push_back(
                standardize_errors(r.joint, cfg.params, fisher.info, cfg.horizon));
        }
        if (summary.standardized_errors.size() >= 30)
            summary.normality = normality_diagnostics(summary.standardized_errors);
    }

    summary.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_table_csv(cfg.out_dir + "/table.csv", summary);
        if (summary.normality) write_normality_csv(cfg.out_dir + "/normality.csv", *summary.normality);
    }
    return summary;
}

LlnResult lln_check(const ExperimentConfig& cfg, TimeAverageKind f) {
    cfg.validate();
    const auto n_sim = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.sim_step));
    const Grid grid{cfg.horizon / static_cast<double>(n_sim), n_sim};
    const Path path = simulate_path(cfg.params, cfg.kernel, grid, cfg.base_seed, 0, cfg.weight_rule);

    double target = 0.0;
    switch (f) {
        case TimeAverageKind::Identity:
            target = theoretical_moments(cfg.params, cfg.kernel).first;
            break;
        case TimeAverageKind::Square:
            target = theoretical_moments(cfg.params, cfg.kernel).second;
            break;
        case TimeAverageKind::Reciprocal:
            target = fisher_info(cfg.params, cfg.kernel, cfg.fisher_paths, cfg.horizon, cfg.obs_step,
                                 cfg.base_seed + 1)
                         .reciprocal_moment;
            break;
    }

    LlnResult result;
    auto& rows = result.rows;
    for (int j = 6; j >= 0; --j) {
        const double T = cfg.horizon / static_cast<double>(1 << j);
        const auto nT = static_cast<std::size_t>(std::llround(T / grid.step));
        if (nT < 16) continue;
        double acc = 0.0;
        for (std::size_t i = 0; i < nT; ++i) {
            const double x = path.values[i];
            switch (f) {
                case TimeAverageKind::Identity: acc += x; break;
                case TimeAverageKind::Square: acc += x * x; break;
                case TimeAverageKind::Reciprocal:
                    if (x == 0.0) { ++result.zero_observations; continue; }
                    acc += 1.0 / x;
                    break;
            }
        }
        rows.push_back({T, acc * grid.step / T, target});
    }
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_lln_csv(cfg.out_dir + "/lln.csv", rows);
    }
    return result;
}

std::vector<IndependenceRow> independence_check(const ExperimentConfig& cfg, double u1, double u2,
                                                std::span<const double> lags) {
    cfg.validate();
    if (!(u1 >= 0.0 && u2 >= 0.0)) throw std::invalid_argument("independence_check requires u1, u2 >= 0");
    if (lags.empty()) throw std::invalid_argument("independence_check requires at least one lag");
    double max_lag = 0.0;
    for (double L : lags) {
        if (!(L > 0.0)) throw std::invalid_argument("lags must be positive");
        max_lag = std::max(max_lag, L);
    }
    const double horizon = 2.0 * max_lag;
    const auto n_sim = static_cast<std::size_t>(std::llround(horizon / cfg.sim_step));
    const Grid grid{horizon / static_cast<double>(n_sim), n_sim};

    std::vector<std::array<std::size_t, 2>> idx;
    for (double L : lags) {
        const auto i1 = static_cast<std::size_t>(std::llround(L / grid.step));
        const auto i2 = static_cast<std::size_t>(std::llround(2.0 * L / grid.step));
        if (std::abs(static_cast<double>(i1) * grid.step - L) > 1e-9)
            throw config_error("lag " + std::to_string(L) + " does not lie on the simulation grid");
        idx.push_back({i1, i2});
    }

    // Monte Carlo joint and marginals, stored per path for ordered reduction.
    const auto N = static_cast<std::size_t>(cfg.n_paths);
    std::vector<std::array<double, 3>> samples(N * lags.size());
    parallel_for(N, cfg.threads, [&](std::size_t i) {
        const Path path =
            simulate_path(cfg.params, cfg.kernel, grid, cfg.base_seed + i, i, cfg.weight_rule);
        for (std::size_t l = 0; l < lags.size(); ++l) {
            const double xt = path.values[idx[l][0]];
            const double xs = path.values[idx[l][1]];
            samples[i * lags.size() + l] = {std::exp(-u1 * xt - u2 * xs), std::exp(-u1 * xt),
                                            std::exp(-u2 * xs)};
        }
    });

    // Affine-transform marginals from one solve per weight over [0, horizon].
    const double rdt = 2e-3;
    const auto nr = static_cast<std::size_t>(std::llround(horizon / rdt));
    AtomicMeasure m1;
    m1.atoms.push_back({0.0, u1});
    AtomicMeasure m2;
    m2.atoms.push_back({0.0, u2});
    const auto V1 = u1 > 0.0 ? riccati_solve(cfg.kernel, cfg.params, m1, rdt, nr) : std::vector<double>(nr, 0.0);
    const auto V2 = u2 > 0.0 ? riccati_solve(cfg.kernel, cfg.params, m2, rdt, nr) : std::vector<double>(nr, 0.0);
    const double half_s2 = 0.5 * cfg.params.sigma * cfg.params.sigma;
    auto marginal = [&](const std::vector<double>& V, double u, double t) {
        const auto nt = static_cast<std::size_t>(std::llround(t / rdt));
        double iv = 0.0, ir = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
            iv += V[j];
            ir += cfg.params.beta * V[j] - half_s2 * V[j] * V[j];
        }
        return std::exp(-cfg.params.x0 * u - cfg.params.x0 * rdt * ir - cfg.params.b * rdt * iv);
    };

    std::vector<IndependenceRow> rows;
    for (std::size_t l = 0; l < lags.size(); ++l) {
        const double L = lags[l];
        double sg = 0.0, sa = 0.0, sc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const auto& s = samples[i * lags.size() + l];
            sg += s[0];
            sa += s[1];
            sc += s[2];
        }
        const double g = sg / static_cast<double>(N);
        const double a = sa / static_cast<double>(N);
        const double c = sc / static_cast<double>(N);
        // delta method on h = g - c_bar a - a_bar c
        double vh = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const auto& s = samples[i * lags.size() + l];
            const double h = s[0] - c * s[1] - a * s[2];
            const double hb = g - c * a - a * c;
            vh += (h - hb) * (h - hb);
        }
        vh /= static_cast<double>(N - 1);

        const double times[2] = {L, 2.0 * L};
        const double weights[2] = {u1, u2};
        const double joint = laplace_fdd(cfg.kernel, cfg.params, times, weights, rdt);
        const double prod = marginal(V1, u1, L) * marginal(V2, u2, 2.0 * L);

        IndependenceRow row;
        row.lag = L;
        row.gap_mc = std::abs(g - a * c);
        row.gap_riccati = std::abs(joint - prod);
        row.mc_se = std::sqrt(vh / static_cast<double>(N));
        rows.push_back(row);
    }
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        write_independence_csv(cfg.out_dir + "/independence.csv", rows);
    }
    return rows;
}

void write_table_csv(const std::string& path, const ExperimentSummary& summary) {
    auto f = open_csv(path);
    f << "estimator,count,mean,median,std,degenerate\n";
    for (const auto& r : summary.rows)
        f << r.estimator << ',' << r.count << ',' << fmt(r.mean) << ',' << fmt(r.median) << ','
          << fmt(r.stddev) << ',' << r.degenerate << '\n';
}

void write_normality_csv(const std::string& path, const std::array<NormalityStats, 2>& stats) {
    auto f = open_csv(path);
    f << "component,field,value\n";
    const char* names[2] = {"b", "beta"};
    for (int c = 0; c < 2; ++c) {
        const auto& s = stats[static_cast<std::size_t>(c)];
        f << names[c] << ",count," << s.count << '\n';
        f << names[c] << ",mean," << fmt(s.mean) << '\n';
        f << names[c] << ",std," << fmt(s.stddev) << '\n';
        f << names[c] << ",skewness," << fmt(s.skewness) << '\n';
        f << names[c] << ",excess_kurtosis," << fmt(s.excess_kurtosis) << '\n';
        f << names[c] << ",ks," << fmt(s.ks) << '\n';
        for (int bin = 0; bin < 30; ++bin) {
            char label[16];
            std::snprintf(label, sizeof label, "bin_%02d", bin);
            f << names[c] << ',' << label << ',' << s.bins[static_cast<std::size_t>(bin)] << '\n';
        }
    }
}

void write_lln_csv(const std::string& path, std::span<const LlnRow> rows) {
    auto f = open_csv(path);
    f << "T,average,target\n";
    for (const auto& r : rows) f << fmt(r.horizon) << ',' << fmt(r.average) << ',' << fmt(r.target) << '\n';
}

void write_independence_csv(const std::string& path, std::span<const IndependenceRow> rows) {
    auto f = open_csv(path);
    f << "lag,gap_mc,gap_riccati\n";
    for (const auto& r : rows) f << fmt(r.lag) << ',' << fmt(r.gap_mc) << ',' << fmt(r.gap_riccati) << '\n';
}

} // namespace vcir
