#ifndef VCIR_KERNELS_HPP
#define VCIR_KERNELS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace vcir {

enum class KernelType { Fractional, ExponentialSum, Log };

// A completely monotone Volterra kernel together with the regularity
// exponents used by partition checks and test tolerances.
//
//   Fractional      K(t) = t^{alpha-1}/Gamma(alpha),   alpha in (1/2, 1]
//   ExponentialSum  K(t) = sum_i c_i exp(-lambda_i t), c_i > 0, lambda_i >= 0
//   Log             K(t) = ln(1 + 1/t)
class KernelSpec {
public:
    static KernelSpec fractional(double alpha);
    static KernelSpec exponential_sum(std::vector<double> c, std::vector<double> lambda);
    static KernelSpec log_kernel(double holder_gamma);

    KernelType type() const { return type_; }
    double alpha() const { return alpha_; }
    const std::vector<double>& coefficients() const { return c_; }
    const std::vector<double>& rates() const { return lambda_; }

    double holder_gamma() const { return gamma_; }
    double lambda_lb() const { return lambda_lb_; }
    void set_lambda_lb(double value);

    // K(t); throws std::domain_error for t <= 0.
    double eval(double t) const;

    // Int_0^t K(s) ds, exact antiderivative. t = +inf allowed.
    double integral(double t) const;

    // Int_0^t (t-s) K(s) ds, exact second antiderivative.
    double second_antiderivative(double t) const;
    long double second_antiderivative_l(long double t) const;

    // Int_0^t K(s)^2 ds.
    double squared_integral(double t) const;

    // 1/K(0+), with 1/inf = 0. This is the weight of the atom at zero of
    // the resolvent of the first kind.
    double zero_plus_inverse() const;

    std::string describe() const;

private:
    KernelSpec() = default;
    KernelType type_ = KernelType::Fractional;
    double alpha_ = 1.0;
    std::vector<double> c_, lambda_;
    double gamma_ = 0.5;
    double lambda_lb_ = 0.75;
};

// Spec-level operation aliases.
double eval_kernel(const KernelSpec& k, double t);
double l1_mass(const KernelSpec& k, double T); // T = +inf for the improper integral
double k_zero_plus_inverse(const KernelSpec& k);

// Cell masses L((i*step, (i+1)*step]) of the continuous part of the
// resolvent of the first kind, i = 0..count-1. Closed form for Fractional,
// lower-triangular solve of the convolution identity K*L = 1 otherwise.
std::vector<double> first_kind_cell_masses(const KernelSpec& k, double step, std::size_t count);

// L((u, v]) for 0 <= u < v.
double first_kind_mass(const KernelSpec& k, double u, double v);

// Equidistant-partition schedule: |P_n| = n^{-eta} or ln(n)/n, with
// m(n) = ceil(factor * n) fine cells per coarse partition of size n.
struct PartitionSchedule {
    enum class MeshRule { PowerLaw, LogOverN };
    MeshRule rule = MeshRule::PowerLaw;
    double eta = 0.7;      // only for PowerLaw
    double factor = 1.0;   // m(n)/n, must be >= 1

    double mesh(std::size_t n) const;
    void validate() const;
};

struct PartitionReport {
    struct Row {
        std::size_t n;
        double horizon;       // t_n = n |P_n|
        double mesh_seq;      // sqrt(t_n) |P_n|^gamma
        double mass_seq;      // n L((0,t_n]) |P_{m(n)}|^gamma / sqrt(t_n)
    };
    std::vector<Row> rows;
    bool mesh_decreasing = false;  // over the tail half of the range
    bool mass_decreasing = false;
    double mesh_terminal = 0.0;
    double mass_terminal = 0.0;
    std::string mesh_verdict;      // "condition satisfied trend" / "condition violated trend"
    std::string mass_verdict;
};

PartitionReport check_partition_conditions(const KernelSpec& k, const PartitionSchedule& sched,
                                           std::size_t n_max);

} // namespace vcir

#endif
