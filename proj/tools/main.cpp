#include <CLI11.hpp>

#include "cli_config.hpp"
#include "toml_lite.hpp"

#include "vcir/errors.hpp"
#include "vcir/estimate.hpp"
#include "vcir/experiments.hpp"
#include "vcir/simulate.hpp"
#include "vcir/volterra.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace vcir;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open output file " + path.string());
    return f;
}

struct FlagBindings {
    double alpha = 0.95, beta = -1.0, b = 1.2, sigma = 0.6, x0 = 1.0;
    double horizon = 500.0, dt = 0.0, dt_obs = 0.0, factor = 1.0, tol = 1e-6;
    double u1 = 1.0, u2 = 1.0, t = 1.0, eta = 0.7;
    int paths = 200, threads = 0, seed = 1, fisher_paths = 32, n_max = 1000;
    std::string config_path, out_dir, estimators, f_kind = "identity", mesh_rule = "power";
    std::string euler_weights = "point";
    std::string path_csv;
    std::vector<double> u_list, times, lags;
    bool with_z = false, stationary = false;
};

// Flags shared by every subcommand; config values load first, flags override.
void add_common_flags(CLI::App* cmd, FlagBindings& fb) {
    cmd->add_option("--config", fb.config_path, "TOML config file");
    cmd->add_option("--threads", fb.threads, "worker thread cap (0 = hardware)");
    cmd->add_option("--seed", fb.seed, "base seed");
    cmd->add_option("--out", fb.out_dir, "output directory");
    cmd->add_option("--alpha", fb.alpha, "fractional kernel exponent in (1/2, 1]");
    cmd->add_option("--beta", fb.beta, "mean reversion (negative)");
    cmd->add_option("--b", fb.b, "drift level (nonnegative)");
    cmd->add_option("--sigma", fb.sigma, "volatility");
    cmd->add_option("--x0", fb.x0, "initial state");
    cmd->add_option("--horizon", fb.horizon, "time horizon T");
    cmd->add_option("--dt", fb.dt, "simulation / solver grid step");
    cmd->add_option("--dt-obs", fb.dt_obs, "observation step of P_n");
    cmd->add_option("--factor", fb.factor, "ratio m(n)/n of the fine partition");
    cmd->add_option("--paths", fb.paths, "number of Monte Carlo paths");
}

cli::Options collect(const CLI::App* cmd, const FlagBindings& fb) {
    cli::Options opt;
    if (!fb.config_path.empty()) opt.merge_config(tomllite::parse_file(fb.config_path), fb.config_path);
    auto set_if = [&](const char* flag, auto&& apply) {
        const auto* o = cmd->get_option_no_throw(flag);
        if (o && o->count() > 0) apply();
    };
    set_if("--alpha", [&] { opt.alpha = fb.alpha; opt.kernel_type = "fractional"; });
    set_if("--beta", [&] { opt.beta = fb.beta; });
    set_if("--b", [&] { opt.b = fb.b; });
    set_if("--sigma", [&] { opt.sigma = fb.sigma; });
    set_if("--x0", [&] { opt.x0 = fb.x0; });
    set_if("--horizon", [&] { opt.horizon = fb.horizon; });
    set_if("--dt", [&] { opt.dt = fb.dt; });
    set_if("--dt-obs", [&] { opt.dt_obs = fb.dt_obs; });
    set_if("--factor", [&] { opt.factor = fb.factor; });
    set_if("--paths", [&] { opt.paths = fb.paths; });
    set_if("--threads", [&] { opt.threads = fb.threads; });
    set_if("--seed", [&] { opt.seed = static_cast<std::uint64_t>(fb.seed); });
    set_if("--out", [&] { opt.out_dir = fb.out_dir; });
    set_if("--fisher-paths", [&] { opt.fisher_paths = fb.fisher_paths; });
    set_if("--tol", [&] { opt.tol = fb.tol; });
    set_if("--u", [&] { opt.u_list = fb.u_list; });
    set_if("--times", [&] { opt.times = fb.times; });
    set_if("--lags", [&] { opt.lags = fb.lags; });
    set_if("--u1", [&] { opt.u1 = fb.u1; });
    set_if("--u2", [&] { opt.u2 = fb.u2; });
    set_if("--t", [&] { opt.t_single = fb.t; });
    set_if("--with-z", [&] { opt.emit_z = fb.with_z; });
    set_if("--stationary", [&] { opt.stationary = fb.stationary; });
    set_if("--f", [&] { opt.f_kind = fb.f_kind; });
    set_if("--mesh-rule", [&] { opt.mesh_rule = fb.mesh_rule; });
    set_if("--eta", [&] { opt.eta = fb.eta; });
    set_if("--n-max", [&] { opt.n_max = fb.n_max; });
    set_if("--path", [&] { opt.path_csv = fb.path_csv; });
    set_if("--euler-weights", [&] { opt.euler_weights = fb.euler_weights; });
    const auto* est_opt = cmd->get_option_no_throw("--estimators");
    if (est_opt && est_opt->count() > 0 && !fb.estimators.empty()) {
        opt.estimators.clear();
        std::string cur;
        for (char c : fb.estimators + ",") {
            if (c == ',') {
                if (!cur.empty()) opt.estimators.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
    }
    return opt;
}

Grid make_grid(double horizon, double dt) {
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    if (n < 1 || std::abs(static_cast<double>(n) * dt - horizon) > 1e-9 * std::max(1.0, horizon))
        throw config_error("dt must divide horizon");
    return Grid{horizon / static_cast<double>(n), n};
}

int run_simulate(const cli::Options& opt) {
    const auto kernel = opt.kernel();
    const auto params = opt.params();
    if (!opt.horizon) throw config_error("simulate requires --horizon");
    const double dt = opt.dt.value_or(0.01);
    const Grid grid = make_grid(*opt.horizon, dt);
    const auto seed = opt.seed.value_or(1);
    EulerWeightRule rule = EulerWeightRule::PointEvaluation;
    if (opt.euler_weights) {
        if (*opt.euler_weights == "cell-average") rule = EulerWeightRule::CellAverage;
        else if (*opt.euler_weights != "point")
            throw config_error("euler-weights must be point or cell-average");
    }
    const auto path = simulate_path(params, kernel, grid, seed, 0, rule);
    const std::string dir = opt.out_dir.value_or(".");
    {
        auto f = open_out(dir, "path.csv");
        f << "t,X\n";
        for (std::size_t i = 0; i <= grid.n_steps; ++i)
            f << fmt(static_cast<double>(i) * grid.step) << ',' << fmt(path.values[i]) << '\n';
    }
    std::string files = dir + "/path.csv";
    if (opt.emit_z.value_or(false)) {
        const auto z = z_process(path, kernel, grid.n_steps);
        auto f = open_out(dir, "z.csv");
        f << "t,Z\n";
        for (std::size_t i = 0; i <= grid.n_steps; ++i)
            f << fmt(static_cast<double>(i) * grid.step) << ',' << fmt(z[i]) << '\n';
        files += ", " + dir + "/z.csv";
    }
    std::cout << "simulate: " << kernel.describe() << " T=" << fmt(grid.horizon())
              << " dt=" << fmt(grid.step) << " seed=" << seed << " X(T)=" << fmt(path.values.back())
              << " -> " << files << "\n";
    return 0;
}

int run_riccati(const cli::Options& opt) {
    const auto kernel = opt.kernel();
    const auto params = opt.params();
    const double u = opt.u_list.empty() ? 1.0 : opt.u_list.front();
    const double t = opt.t_single.value_or(1.0);
    const double dt = opt.dt.value_or(1e-3);
    const Grid grid = make_grid(t, dt);
    AtomicMeasure mu;
    mu.atoms.push_back({0.0, u});
    const auto V = riccati_solve(kernel, params, mu, grid.step, grid.n_steps);
    const std::string dir = opt.out_dir.value_or(".");
    {
        auto f = open_out(dir, "v.csv");
        f << "t,V\n";
        for (std::size_t i = 0; i < V.size(); ++i)
            f << fmt((static_cast<double>(i) + 0.5) * grid.step) << ',' << fmt(V[i]) << '\n';
    }
    double laplace;
    if (opt.stationary.value_or(false)) {
        laplace = stationary_laplace(kernel, params, u, opt.tol.value_or(1e-6), grid.step);
    } else {
        const double times[1] = {t};
        const double weights[1] = {u};
        laplace = laplace_fdd(kernel, params, times, weights, grid.step);
    }
    {
        auto f = open_out(dir, "laplace.csv");
        f << "u,laplace\n" << fmt(u) << ',' << fmt(laplace) << '\n';
    }
    std::cout << "riccati: " << kernel.describe() << " u=" << fmt(u) << " t=" << fmt(t)
              << " laplace=" << fmt(laplace) << " -> " << dir << "/v.csv, " << dir
              << "/laplace.csv\n";
    return 0;
}

int run_laplace(const cli::Options& opt) {
    const auto kernel = opt.kernel();
    const auto params = opt.params();
    const double dt = opt.dt.value_or(1e-3);
    const std::string dir = opt.out_dir.value_or(".");
    if (!opt.times.empty()) {
        if (opt.times.size() != opt.u_list.size())
            throw config_error("laplace: times and u must have matching lengths");
        const double value = laplace_fdd(kernel, params, opt.times, opt.u_list, dt);
        auto f = open_out(dir, "laplace.csv");
        f << "u,laplace\n";
        std::string label;
        for (std::size_t i = 0; i < opt.u_list.size(); ++i)
            label += (i ? ";" : "") + fmt(opt.u_list[i]);
        f << label << ',' << fmt(value) << '\n';
        std::cout << "laplace: joint at " << opt.times.size() << " times = " << fmt(value) << " -> "
                  << dir << "/laplace.csv\n";
        return 0;
    }
    const double t = opt.t_single.value_or(1.0);
    std::vector<double> us = opt.u_list.empty() ? std::vector<double>{1.0} : opt.u_list;
    auto f = open_out(dir, "laplace.csv");
    f << "u,laplace\n";
    for (double u : us) {
        const double times[1] = {t};
        const double weights[1] = {u};
        f << fmt(u) << ',' << fmt(laplace_fdd(kernel, params, times, weights, dt)) << '\n';
    }
    std::cout << "laplace: " << us.size() << " marginal values at t=" << fmt(t) << " -> " << dir
              << "/laplace.csv\n";
    return 0;
}

Path load_path_csv(const std::string& file, const KernelSpec& kernel, const ModelParams& params) {
    std::ifstream f(file);
    if (!f) throw config_error("cannot open path file " + file);
    std::vector<double> ts, xs;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == 't' || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw config_error(file + ": expected 't,X' rows");
        ts.push_back(std::stod(line.substr(0, comma)));
        xs.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.size() < 3) throw config_error(file + ": need at least 3 samples");
    const double dt = ts[1] - ts[0];
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (std::abs(ts[i] - ts[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(ts[i])))
            throw config_error(file + ": time grid must be uniform");
    Path path;
    path.grid = Grid{dt, xs.size() - 1};
    path.values = std::move(xs);
    path.params = params;
    path.params.x0 = path.values.front();
    path.kernel = kernel;
    return path;
}

int run_estimate(const cli::Options& opt) {
    const auto kernel = opt.kernel();
    const auto params = opt.params();
    if (!opt.path_csv) throw config_error("estimate requires --path pointing at a t,X csv");
    const auto path = load_path_csv(*opt.path_csv, kernel, params);
    const double obs_step = opt.dt_obs.value_or(path.grid.step);
    const double factor = opt.factor.value_or(1.0);
    const auto obs = ObservationSet::from_path(path, obs_step, factor, params.sigma);

    std::vector<EstimateReport> reports;
    for (const auto kind : opt.estimator_kinds()) {
        switch (kind) {
            case EstimatorKind::MLEJoint: reports.push_back(mle_joint(obs)); break;
            case EstimatorKind::MoM:
                reports.push_back(mom_estimate(obs.x_coarse, params.sigma, kernel.alpha()));
                break;
            case EstimatorKind::MLEbOnly: reports.push_back(mle_b_known_beta(obs, params.beta)); break;
            case EstimatorKind::MLEBetaOnly: reports.push_back(mle_beta_known_b(obs, params.b)); break;
        }
    }
    const std::string dir = opt.out_dir.value_or(".");
    auto f = open_out(dir, "estimates.csv");
    f << "kind,b_hat,beta_hat,degenerate\n";
    bool all_degenerate = true;
    for (const auto& r : reports) {
        const char* name = r.kind == EstimatorKind::MLEJoint    ? "mle"
                           : r.kind == EstimatorKind::MoM       ? "mom"
                           : r.kind == EstimatorKind::MLEbOnly  ? "mle-b"
                                                                : "mle-beta";
        f << name << ',' << fmt(r.b_hat) << ',' << fmt(r.beta_hat) << ',' << (r.degenerate ? 1 : 0)
          << '\n';
        std::cout << "estimate " << name << ": b=" << fmt(r.b_hat) << " beta=" << fmt(r.beta_hat)
                  << (r.degenerate ? " (degenerate)" : "") << "\n";
        if (!r.degenerate) all_degenerate = false;
    }
    std::cout << "estimate: wrote " << dir << "/estimates.csv\n";
    return all_degenerate ? 4 : 0;
}

int run_mc_table_cmd(const cli::Options& opt) {
    auto cfg = opt.experiment();
    if (cfg.out_dir.empty()) cfg.out_dir = ".";
    const auto summary = run_mc_table(cfg);
    for (const auto& row : summary.rows)
        std::cout << "  " << row.estimator << ": mean=" << fmt(row.mean)
                  << " median=" << fmt(row.median) << " std=" << fmt(row.stddev)
                  << " degenerate=" << row.degenerate << "\n";
    if (summary.fisher)
        std::cout << "  fisher: [1/x]=" << fmt(summary.fisher->reciprocal_moment) << " (se "
                  << fmt(summary.fisher->std_error) << ")\n";
    std::cout << "mc-table: " << cfg.n_paths << " paths in " << fmt(summary.runtime_seconds)
              << " s -> " << cfg.out_dir << "/table.csv"
              << (summary.normality ? ", " + cfg.out_dir + "/normality.csv" : "") << "\n";
    return 0;
}

int run_lln(const cli::Options& opt) {
    auto cfg = opt.experiment();
    if (cfg.out_dir.empty()) cfg.out_dir = ".";
    const std::string kind = opt.f_kind.value_or("identity");
    TimeAverageKind f = TimeAverageKind::Identity;
    if (kind == "square") f = TimeAverageKind::Square;
    else if (kind == "reciprocal") f = TimeAverageKind::Reciprocal;
    else if (kind != "identity") throw config_error("lln: --f must be identity, square, or reciprocal");
    const auto result = lln_check(cfg, f);
    const auto& last = result.rows.back();
    std::cout << "lln(" << kind << "): T=" << fmt(last.horizon) << " average=" << fmt(last.average)
              << " target=" << fmt(last.target);
    if (result.zero_observations > 0)
        std::cout << " (skipped " << result.zero_observations << " zero states)";
    std::cout << " -> " << cfg.out_dir << "/lln.csv\n";
    return 0;
}

int run_independence(const cli::Options& opt) {
    auto cfg = opt.experiment();
    if (cfg.out_dir.empty()) cfg.out_dir = ".";
    std::vector<double> lags = opt.lags.empty() ? std::vector<double>{5.0, 10.0, 20.0, 40.0} : opt.lags;
    const auto rows = independence_check(cfg, opt.u1.value_or(1.0), opt.u2.value_or(1.0), lags);
    for (const auto& r : rows)
        std::cout << "  lag " << fmt(r.lag) << ": gap_mc=" << fmt(r.gap_mc)
                  << " gap_riccati=" << fmt(r.gap_riccati) << " (mc se " << fmt(r.mc_se) << ")\n";
    std::cout << "independence: " << rows.size() << " lags -> " << cfg.out_dir
              << "/independence.csv\n";
    return 0;
}

int run_check_partition(const cli::Options& opt) {
    const auto kernel = opt.kernel();
    PartitionSchedule sched;
    const std::string rule = opt.mesh_rule.value_or("power");
    if (rule == "power") sched.rule = PartitionSchedule::MeshRule::PowerLaw;
    else if (rule == "log-over-n") sched.rule = PartitionSchedule::MeshRule::LogOverN;
    else throw config_error("check-partition: --mesh-rule must be power or log-over-n");
    sched.eta = opt.eta.value_or(0.7);
    sched.factor = opt.factor.value_or(1.0);
    const auto rep = check_partition_conditions(kernel, sched, static_cast<std::size_t>(opt.n_max.value_or(1000)));
    const std::string dir = opt.out_dir.value_or(".");
    {
        auto f = open_out(dir, "partition.csv");
        f << "n,horizon,mesh_seq,mass_seq\n";
        for (const auto& row : rep.rows)
            f << row.n << ',' << fmt(row.horizon) << ',' << fmt(row.mesh_seq) << ','
              << fmt(row.mass_seq) << '\n';
    }
    std::cout << "check-partition: " << kernel.describe() << "\n"
              << "  mesh-size sequence:   " << rep.mesh_verdict << " (terminal "
              << fmt(rep.mesh_terminal) << ")\n"
              << "  mass-scaled sequence: " << rep.mass_verdict << " (terminal "
              << fmt(rep.mass_terminal) << ")\n"
              << "  -> " << dir << "/partition.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volterra square-root process toolkit: simulation, affine transforms, drift estimation"};
    app.require_subcommand(1);

    FlagBindings fb;
    auto* sim = app.add_subcommand("simulate", "simulate one path, write t,X (and optionally t,Z) CSV");
    sim->add_flag("--with-z", fb.with_z, "also write the auxiliary process Z");
    sim->add_option("--euler-weights", fb.euler_weights, "point | cell-average kernel weights");
    auto* ric = app.add_subcommand("riccati", "solve the Riccati equation for u*delta_0, write t,V and u,laplace");
    ric->add_option("--u", fb.u_list, "weight(s) of the atom at zero")->delimiter(',');
    ric->add_option("--t", fb.t, "horizon of the solve");
    ric->add_flag("--stationary", fb.stationary, "evaluate the limit-law transform instead");
    ric->add_option("--tol", fb.tol, "tail bound tolerance for --stationary");
    auto* lap = app.add_subcommand("laplace", "finite-dimensional Laplace transform values");
    lap->add_option("--u", fb.u_list, "weights (one per time, or a sweep list)")->delimiter(',');
    lap->add_option("--times", fb.times, "ascending times of the joint transform")->delimiter(',');
    lap->add_option("--t", fb.t, "single time for a u-sweep");
    auto* est = app.add_subcommand("estimate", "run drift estimators on a path CSV");
    est->add_option("--path", fb.path_csv, "input CSV with t,X rows");
    est->add_option("--estimators", fb.estimators, "comma list: mle,mom,mle-b,mle-beta");
    auto* mct = app.add_subcommand("mc-table", "Monte Carlo estimator table (table.csv, normality.csv)");
    mct->add_option("--estimators", fb.estimators, "comma list: mle,mom,mle-b,mle-beta");
    mct->add_option("--fisher-paths", fb.fisher_paths, "Monte Carlo paths for the Fisher entry");
    mct->add_option("--euler-weights", fb.euler_weights, "point | cell-average kernel weights");
    auto* lln = app.add_subcommand("lln", "time-average diagnostics along one long path (lln.csv)");
    lln->add_option("--f", fb.f_kind, "identity | square | reciprocal");
    lln->add_option("--fisher-paths", fb.fisher_paths, "Monte Carlo paths for the reciprocal target");
    auto* ind = app.add_subcommand("independence", "joint-vs-product Laplace gaps (independence.csv)");
    ind->add_option("--u1", fb.u1, "first weight");
    ind->add_option("--u2", fb.u2, "second weight");
    ind->add_option("--lags", fb.lags, "comma list of lags")->delimiter(',');
    auto* chk = app.add_subcommand("check-partition", "evaluate the mesh conditions along n (partition.csv)");
    chk->add_option("--mesh-rule", fb.mesh_rule, "power | log-over-n");
    chk->add_option("--eta", fb.eta, "power-law mesh exponent in (0,1)");
    chk->add_option("--n-max", fb.n_max, "largest n to evaluate");

    for (auto* cmd : {sim, ric, lap, est, mct, lln, ind, chk}) add_common_flags(cmd, fb);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return run_simulate(collect(sim, fb));
        if (ric->parsed()) return run_riccati(collect(ric, fb));
        if (lap->parsed()) return run_laplace(collect(lap, fb));
        if (est->parsed()) return run_estimate(collect(est, fb));
        if (mct->parsed()) return run_mc_table_cmd(collect(mct, fb));
        if (lln->parsed()) return run_lln(collect(lln, fb));
        if (ind->parsed()) return run_independence(collect(ind, fb));
        if (chk->parsed()) return run_check_partition(collect(chk, fb));
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const degenerate_error& e) {
        std::cerr << "degenerate: " << e.what() << "\n";
        return 4;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
