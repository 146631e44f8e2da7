#ifndef VCIR_VOLTERRA_HPP
#define VCIR_VOLTERRA_HPP

#include "vcir/kernels.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace vcir {

// Parameters of the state equation
//   X_t = x0 + Int_0^t K(t-s)(b + beta X_s) ds + sigma Int_0^t K(t-s) sqrt(X_s) dB_s
// in the ergodic regime beta < 0.
struct ModelParams {
    double x0 = 1.0;
    double b = 1.2;
    double beta = -1.0;
    double sigma = 0.6;
    void validate() const;
};

// Finite sum of weighted Dirac masses mu = sum_k u_k delta_{s_k}.
struct AtomicMeasure {
    struct Atom {
        double location;
        double weight;
    };
    std::vector<Atom> atoms;
    double total_mass() const;
    void validate() const;
};

// Uniform-grid samples of the resolvent of the second kind
//   E_beta = K + beta K * E_beta
// stored as per-cell averages (E_beta is singular at 0 for rough kernels,
// cell averages keep the convolutions first-order accurate), together with
// running integrals at the grid nodes.
struct ResolventTable {
    double grid_step = 0.0;
    std::vector<double> e_beta;     // cell averages, size n
    std::vector<double> e_sq_cell;  // Int_cell E^2, size n
    std::vector<double> cum_int;    // Int_0^{k dt} E, size n+1
    std::vector<double> cum_int_sq; // Int_0^{k dt} E^2, size n+1
    std::vector<double> script_e;   // 1 + beta Int_0^{k dt} E, size n+1

    std::size_t cells() const { return e_beta.size(); }
    double horizon() const { return grid_step * static_cast<double>(cells()); }
};

ResolventTable resolvent_second_kind(const KernelSpec& k, double beta, double grid_step,
                                     std::size_t n_steps);

// Improper integrals Int_0^inf E_beta and Int_0^inf E_beta^2, extending the
// table until the completely-monotone tail bound E(T)(Int_0^inf E - Int_0^T E)
// falls below tol.
struct TailIntegrals {
    double int_e = 0.0;
    double int_e_sq = 0.0;
    double horizon = 0.0;
};
TailIntegrals resolvent_tail_integrals(const KernelSpec& k, double beta, double tol,
                                       double grid_step = 0.0);

// (m1, m2) of the limit law: m1 = (x0 + |K|_1 b)/(1 + |K|_1 |beta|) with the
// convention m1 = b/|beta| when |K|_1 = inf; m2 = m1^2 + m1 sigma^2 Int E^2.
std::pair<double, double> theoretical_moments(const ModelParams& p, const KernelSpec& k);

// Mean and variance of X_t: mean = script_E(t) x0 + b Int_0^t E,
// variance = sigma^2 Int_0^t E(t-s)^2 mean(s) ds.
std::pair<double, double> mean_variance_at(const ModelParams& p, const KernelSpec& k, double t,
                                           const ResolventTable& table);

// Nonnegative solution of the Riccati Volterra equation
//   V = K*mu + K*R(V),  R(x) = beta x - sigma^2 x^2 / 2,
// returned as cell averages over n_steps cells of width grid_step. Atom
// locations must lie within grid_step/2 of a node.
std::vector<double> riccati_solve(const KernelSpec& k, const ModelParams& p, const AtomicMeasure& mu,
                                  double grid_step, std::size_t n_steps);

// Laplace transform of (X_{t_1},...,X_{t_n}) at nonnegative weights u:
//   E[exp(-sum u_k X_{t_k})] via mu = sum u_k delta_{t_n - t_k} and
//   exp(-x0 mu(R+) - x0 Int_0^{t_n} R(V) - b Int_0^{t_n} V).
double laplace_fdd(const KernelSpec& k, const ModelParams& p, std::span<const double> times,
                   std::span<const double> u, double grid_step);

// Laplace transform of the limit law pi at u >= 0, truncating the improper
// integrals once the Riccati tail bound drops below tol.
double stationary_laplace(const KernelSpec& k, const ModelParams& p, double u, double tol,
                          double grid_step = 0.0);

} // namespace vcir

#endif
