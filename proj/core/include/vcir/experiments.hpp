#ifndef VCIR_EXPERIMENTS_HPP
#define VCIR_EXPERIMENTS_HPP

#include "vcir/estimate.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vcir {

struct ExperimentConfig {
    KernelSpec kernel = KernelSpec::fractional(0.95);
    ModelParams params;
    double horizon = 500.0;
    double sim_step = 0.05;   // must divide obs_step / factor
    double obs_step = 0.05;
    double factor = 1.0;      // m(n)/n
    int n_paths = 200;
    std::uint64_t base_seed = 1;
    std::vector<EstimatorKind> estimators = {EstimatorKind::MLEJoint, EstimatorKind::MoM,
                                             EstimatorKind::MLEbOnly, EstimatorKind::MLEBetaOnly};
    std::string out_dir;      // empty: do not write CSV files
    int threads = 0;          // <= 0: hardware concurrency
    int fisher_paths = 32;    // Monte Carlo effort for the Fisher reciprocal moment
    EulerWeightRule weight_rule = EulerWeightRule::PointEvaluation;

    void validate() const;
};

struct SummaryRow {
    std::string estimator; // b_mle, beta_mle, b_mom, beta_mom, b_mle_known_beta, beta_mle_known_b
    int count = 0;         // non-degenerate paths entering the statistics
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    int degenerate = 0;
};

struct NormalityStats {
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks = 0.0;  // one-sample Kolmogorov-Smirnov distance to N(0,1)
    int count = 0;
    std::array<int, 30> bins{}; // histogram over [-4, 4]
};

// Per-component stats; input must hold at least 30 two-vectors.
std::array<NormalityStats, 2> normality_diagnostics(std::span<const std::array<double, 2>> standardized);

struct ExperimentSummary {
    std::vector<SummaryRow> rows;
    double runtime_seconds = 0.0;
    std::optional<FisherEstimate> fisher;
    std::optional<std::array<NormalityStats, 2>> normality; // standardized joint-MLE errors
    std::vector<std::array<double, 2>> standardized_errors;
};

// Simulates n_paths paths with seeds base_seed + i, runs the requested
// estimators, aggregates mean/median/std per estimator over non-degenerate
// paths, and (when out_dir is set) writes table.csv and normality.csv.
// Aggregation order is fixed by path index, so results are identical for
// any thread count.
ExperimentSummary run_mc_table(const ExperimentConfig& cfg);

enum class TimeAverageKind { Identity, Square, Reciprocal };

struct LlnRow {
    double horizon;
    double average;
    double target;
};

struct LlnResult {
    std::vector<LlnRow> rows;
    int zero_observations = 0; // reciprocal averages skip zero states, counted here
};

// Time-averages of f(X) along one path at geometrically spaced checkpoints,
// against the stationary target (m1, m2, or the Monte Carlo reciprocal
// moment). Writes lln.csv when out_dir is set.
LlnResult lln_check(const ExperimentConfig& cfg, TimeAverageKind f);

struct IndependenceRow {
    double lag;
    double gap_mc;       // |mean e^{-u1 X_t - u2 X_{t+L}} - product of marginal means|
    double gap_riccati;  // same quantity from the affine transform
    double mc_se;        // delta-method standard error of the MC gap
};

// Joint-vs-product Laplace gaps at t = L, t + L = 2L for each lag. Writes
// independence.csv (lag,gap_mc,gap_riccati) when out_dir is set.
std::vector<IndependenceRow> independence_check(const ExperimentConfig& cfg, double u1, double u2,
                                                std::span<const double> lags);

// CSV emission (deterministic formatting).
void write_table_csv(const std::string& path, const ExperimentSummary& summary);
void write_normality_csv(const std::string& path, const std::array<NormalityStats, 2>& stats);
void write_lln_csv(const std::string& path, std::span<const LlnRow> rows);
void write_independence_csv(const std::string& path, std::span<const IndependenceRow> rows);

} // namespace vcir

#endif
