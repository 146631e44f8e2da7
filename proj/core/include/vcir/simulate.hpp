#ifndef VCIR_SIMULATE_HPP
#define VCIR_SIMULATE_HPP

#include "vcir/kernels.hpp"
#include "vcir/volterra.hpp"

#include <cstdint>
#include <vector>

namespace vcir {

struct Grid {
    double step = 0.01;
    std::size_t n_steps = 0;
    double horizon() const { return step * static_cast<double>(n_steps); }
    void validate() const;
};

struct Path {
    Grid grid;
    std::vector<double> values; // n_steps + 1 nonnegative values, values[0] = x0
    ModelParams params;
    KernelSpec kernel = KernelSpec::fractional(1.0);
    std::uint64_t seed = 0;
};

// Kernel weights in the Euler sums: the scheme as printed uses point
// evaluation K(t_{k+1} - t_i); the cell-averaged variant is kept for
// convergence studies.
enum class EulerWeightRule { PointEvaluation, CellAverage };

// Modified (absolute-value) Euler scheme
//   X_{k+1} = | x0 + dt sum_i K(t_{k+1}-t_i)(b + beta X_i)
//                  + sigma sqrt(dt) sum_i K(t_{k+1}-t_i) sqrt(X_i) xi_{i+1} |
// with xi drawn from the counter-based generator keyed by
// (seed, stream, step). Bit-exact reproducible for fixed inputs.
Path simulate_path(const ModelParams& p, const KernelSpec& k, const Grid& g, std::uint64_t seed,
                   std::uint64_t stream = 0,
                   EulerWeightRule rule = EulerWeightRule::PointEvaluation);

// X^{P_n}: values at the left endpoints of the n_coarse coarse cells.
// n_coarse must divide path.grid.n_steps.
std::vector<double> coarsen(const Path& path, std::size_t n_coarse);

// Discretized auxiliary process Z^{P_m} at the m-grid nodes (size m+1):
//   Z_u = sum_{[u',v'] in P_m, v'<=u} (X_{u-u'} - x0) L((u',v'])
//         + K(0+)^{-1} (X_u - x0),  Z_0 = 0.
// m_steps must divide path.grid.n_steps.
std::vector<double> z_process(const Path& path, const KernelSpec& k, std::size_t m_steps);

// Same, with the first-kind cell masses supplied by the caller (they only
// depend on the kernel and the m-grid step, so campaigns compute them once).
std::vector<double> z_process(const Path& path, const KernelSpec& k, std::size_t m_steps,
                              const std::vector<double>& cell_masses);

} // namespace vcir

#endif
