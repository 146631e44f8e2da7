#ifndef VCIR_ESTIMATE_HPP
#define VCIR_ESTIMATE_HPP

#include "vcir/kernels.hpp"
#include "vcir/simulate.hpp"
#include "vcir/volterra.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vcir {

// Symmetric 2x2 matrix (Fisher information and friends).
struct Matrix2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
    double det() const { return a11 * a22 - a12 * a12; }
    bool positive_definite() const { return a11 > 0.0 && det() > 0.0; }
    Matrix2 sqrt() const; // principal square root, requires positive definite
};

// High-frequency observation bundle: X on the coarse partition P_n and the
// discretized auxiliary process Z on the finer P_m (plus the P_n-resolution
// Z used for its terminal value). sigma and the kernel are treated as known.
struct ObservationSet {
    std::vector<double> x_coarse; // X at P_n left endpoints, size n
    std::vector<double> z_fine;   // Z^{P_m} at P_m nodes, size m+1
    std::vector<double> z_coarse; // Z^{P_n} at P_n nodes, size n+1
    Grid n_partition;
    Grid m_partition;
    double sigma = 0.0;
    KernelSpec kernel = KernelSpec::fractional(1.0);
    double x0 = 0.0;

    static ObservationSet from_path(const Path& path, double obs_step, double factor, double sigma);
    static ObservationSet from_path(const Path& path, double obs_step, double factor, double sigma,
                                    const std::vector<double>& fine_masses,
                                    const std::vector<double>& coarse_masses);
    void validate() const;
};

enum class EstimatorKind { MoM, MLEJoint, MLEBetaOnly, MLEbOnly };

struct EstimateReport {
    double b_hat = 0.0;
    double beta_hat = 0.0;
    EstimatorKind kind = EstimatorKind::MLEJoint;
    bool degenerate = false;
    std::optional<Matrix2> fisher;
    std::optional<std::array<double, 2>> standardized_error;
};

// Method of moments for the fractional kernel: inverts
//   m1 = b/|beta|,  m2 = m1^2 + m1 sigma^2 C_alpha |beta|^{1/alpha - 2}
// with time-averages taken under the counting measure.
EstimateReport mom_estimate(std::span<const double> x_samples, double sigma, double alpha);

// Joint discretized MLE:
//   b    = (t_n Z_T - S_X S_dZ) / D,  beta = (t_n S_dZ - Z_T S_inv) / D,
//   D    = t_n^2 - S_X S_inv  (<= 0 by Cauchy-Schwarz; |D| ~ 0 => degenerate)
// with S_X = sum X_u (v-u), S_inv = sum X_u^{-1} (v-u),
// S_dZ = sum X_u^{-1} (Z^{P_m}_v - Z^{P_m}_u) over P_n cells, Z_T = Z^{P_n}_{t_n}.
EstimateReport mle_joint(const ObservationSet& obs);

// beta with b known: beta = (Z^{P_n}_{t_n} - t_n b)/S_X.
EstimateReport mle_beta_known_b(const ObservationSet& obs, double b);

// b with beta known: b = (S_dZ - beta t_n)/S_inv.
EstimateReport mle_b_known_beta(const ObservationSet& obs, double beta);

// Fisher information I = [[int 1/x dpi, 1], [1, int x dpi]]; the reciprocal
// moment is estimated by Monte Carlo time-averages over simulated paths,
// the first moment is m1 from theoretical_moments.
struct FisherEstimate {
    Matrix2 info;
    double reciprocal_moment = 0.0;
    double std_error = 0.0; // Monte Carlo standard error of the reciprocal moment
    int rejected_paths = 0; // paths resampled because a zero state was hit
};
FisherEstimate fisher_info(const ModelParams& p, const KernelSpec& k, int mc_paths, double horizon,
                           double step, std::uint64_t seed);

// (sqrt(T)/sigma) I^{1/2} ((b_hat, beta_hat) - (b, beta)); asymptotically
// standard bivariate normal.
std::array<double, 2> standardize_errors(const EstimateReport& report, const ModelParams& truth,
                                         const Matrix2& fisher, double horizon);

} // namespace vcir

#endif
