#ifndef VCIR_CLI_CONFIG_HPP
#define VCIR_CLI_CONFIG_HPP

#include "toml_lite.hpp"

#include "vcir/experiments.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vcir::cli {

// Everything a subcommand may need, merged from the config file and flag
// overrides. Unknown config keys are rejected.
struct Options {
    // model and kernel
    std::optional<std::string> kernel_type; // fractional | expsum | log
    std::optional<double> alpha;
    std::vector<double> exp_c, exp_lambda;
    std::optional<double> log_gamma;
    std::optional<double> x0, b, beta, sigma;

    // grids and campaign
    std::optional<double> horizon, dt, dt_obs, factor, tol;
    std::optional<int> paths, threads, fisher_paths, n_max;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> estimators;

    // subcommand specific
    std::vector<double> u_list, times, lags;
    std::optional<double> u1, u2, t_single;
    std::optional<bool> emit_z, stationary;
    std::optional<std::string> f_kind;      // identity | square | reciprocal
    std::optional<std::string> mesh_rule;   // power | log-over-n
    std::optional<std::string> euler_weights; // point | cell-average
    std::optional<double> eta;
    std::optional<std::string> path_csv;    // estimate input

    void merge_config(const tomllite::Table& table, const std::string& source);

    KernelSpec kernel() const;
    ModelParams params() const;
    ExperimentConfig experiment() const;
    std::vector<EstimatorKind> estimator_kinds() const;
};

} // namespace vcir::cli

#endif
