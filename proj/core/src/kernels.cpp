#include "vcir/kernels.hpp"
#include "vcir/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vcir {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

KernelSpec KernelSpec::fractional(double alpha) {
    if (!(alpha > 0.5 && alpha <= 1.0))
        throw config_error("fractional kernel requires alpha in (1/2, 1], got " + std::to_string(alpha));
    KernelSpec k;
    k.type_ = KernelType::Fractional;
    k.alpha_ = alpha;
    k.gamma_ = alpha < 1.0 ? alpha - 0.5 : 0.5;
    k.lambda_lb_ = 1.5 * k.gamma_;
    return k;
}

KernelSpec KernelSpec::exponential_sum(std::vector<double> c, std::vector<double> lambda) {
    if (c.empty() || c.size() != lambda.size())
        throw config_error("exponential-sum kernel requires matching non-empty c and lambda lists");
    for (double ci : c)
        if (!(ci > 0.0)) throw config_error("exponential-sum kernel requires all c_i > 0");
    for (double li : lambda)
        if (!(li >= 0.0)) throw config_error("exponential-sum kernel requires all lambda_i >= 0");
    KernelSpec k;
    k.type_ = KernelType::ExponentialSum;
    k.c_ = std::move(c);
    k.lambda_ = std::move(lambda);
    k.gamma_ = 0.5;
    k.lambda_lb_ = 0.75;
    return k;
}

KernelSpec KernelSpec::log_kernel(double holder_gamma) {
    if (!(holder_gamma > 0.0 && holder_gamma < 0.5))
        throw config_error("log kernel requires gamma in (0, 1/2), got " + std::to_string(holder_gamma));
    KernelSpec k;
    k.type_ = KernelType::Log;
    k.gamma_ = holder_gamma;
    k.lambda_lb_ = 1.5 * holder_gamma;
    return k;
}

void KernelSpec::set_lambda_lb(double value) {
    if (!(value > 0.0 && value <= 1.5 * gamma_ + 1e-12))
        throw config_error("lambda_lb must lie in (0, 3*gamma/2]");
    lambda_lb_ = value;
}

double KernelSpec::eval(double t) const {
    if (!(t > 0.0)) throw std::domain_error("kernel evaluation requires t > 0");
    switch (type_) {
        case KernelType::Fractional:
            return std::pow(t, alpha_ - 1.0) / std::tgamma(alpha_);
        case KernelType::ExponentialSum: {
            double s = 0.0;
            for (std::size_t i = 0; i < c_.size(); ++i) s += c_[i] * std::exp(-lambda_[i] * t);
            return s;
        }
        case KernelType::Log:
            return std::log1p(1.0 / t);
    }
    return 0.0;
}

double KernelSpec::integral(double t) const {
    if (t == 0.0) return 0.0;
    if (!(t > 0.0)) throw std::domain_error("kernel integral requires t >= 0");
    switch (type_) {
        case KernelType::Fractional:
            if (std::isinf(t)) return kInf;
            return std::pow(t, alpha_) / std::tgamma(alpha_ + 1.0);
        case KernelType::ExponentialSum: {
            double s = 0.0;
            for (std::size_t i = 0; i < c_.size(); ++i) {
                if (lambda_[i] == 0.0)
                    s += std::isinf(t) ? kInf : c_[i] * t;
                else
                    s += std::isinf(t) ? c_[i] / lambda_[i] : c_[i] * (-std::expm1(-lambda_[i] * t)) / lambda_[i];
            }
            return s;
        }
        case KernelType::Log:
            if (std::isinf(t)) return kInf;
            // Int ln(1+1/s) ds = (1+t)ln(1+t) - t ln t
            return (1.0 + t) * std::log1p(t) - t * std::log(t);
    }
    return 0.0;
}

long double KernelSpec::second_antiderivative_l(long double t) const {
    if (t <= 0.0L) return 0.0L;
    switch (type_) {
        case KernelType::Fractional:
            return powl(t, static_cast<long double>(alpha_) + 1.0L) /
                   tgammal(static_cast<long double>(alpha_) + 2.0L);
        case KernelType::ExponentialSum: {
            long double s = 0.0L;
            for (std::size_t i = 0; i < c_.size(); ++i) {
                const long double ci = c_[i], li = lambda_[i];
                if (lambda_[i] == 0.0)
                    s += ci * t * t / 2.0L;
                else
                    s += ci * (t / li - (-expm1l(-li * t)) / (li * li));
            }
            return s;
        }
        case KernelType::Log:
            // Int_0^t [(1+s)ln(1+s) - s ln s] ds
            return (1.0L + t) * (1.0L + t) / 2.0L * log1pl(t) - (1.0L + t) * (1.0L + t) / 4.0L + 0.25L -
                   t * t / 2.0L * logl(t) + t * t / 4.0L;
    }
    return 0.0L;
}

double KernelSpec::second_antiderivative(double t) const {
    return static_cast<double>(second_antiderivative_l(static_cast<long double>(t)));
}

double KernelSpec::squared_integral(double t) const {
    if (t == 0.0) return 0.0;
    if (!(t > 0.0)) throw std::domain_error("kernel squared integral requires t >= 0");
    switch (type_) {
        case KernelType::Fractional:
            return std::pow(t, 2.0 * alpha_ - 1.0) /
                   ((2.0 * alpha_ - 1.0) * std::tgamma(alpha_) * std::tgamma(alpha_));
        case KernelType::ExponentialSum: {
            double s = 0.0;
            for (std::size_t i = 0; i < c_.size(); ++i)
                for (std::size_t j = 0; j < c_.size(); ++j) {
                    const double l = lambda_[i] + lambda_[j];
                    s += l == 0.0 ? c_[i] * c_[j] * t : c_[i] * c_[j] * (-std::expm1(-l * t)) / l;
                }
            return s;
        }
        case KernelType::Log: {
            boost::math::quadrature::tanh_sinh<double> integrator;
            auto f = [](double s) { const double v = std::log1p(1.0 / s); return v * v; };
            return integrator.integrate(f, 0.0, t, 1e-10);
        }
    }
    return 0.0;
}

double KernelSpec::zero_plus_inverse() const {
    switch (type_) {
        case KernelType::Fractional:
            return alpha_ == 1.0 ? 1.0 : 0.0;
        case KernelType::ExponentialSum: {
            double s = 0.0;
            for (double ci : c_) s += ci;
            return 1.0 / s;
        }
        case KernelType::Log:
            return 0.0;
    }
    return 0.0;
}

std::string KernelSpec::describe() const {
    std::ostringstream os;
    switch (type_) {
        case KernelType::Fractional: os << "fractional(alpha=" << alpha_ << ")"; break;
        case KernelType::ExponentialSum: {
            os << "expsum(c=[";
            for (std::size_t i = 0; i < c_.size(); ++i) os << (i ? "," : "") << c_[i];
            os << "], lambda=[";
            for (std::size_t i = 0; i < lambda_.size(); ++i) os << (i ? "," : "") << lambda_[i];
            os << "])";
            break;
        }
        case KernelType::Log: os << "log(gamma=" << gamma_ << ")"; break;
    }
    return os.str();
}

double eval_kernel(const KernelSpec& k, double t) { return k.eval(t); }

double l1_mass(const KernelSpec& k, double T) {
    if (!(T > 0.0)) throw std::domain_error("l1_mass requires T > 0");
    return k.integral(T);
}

double k_zero_plus_inverse(const KernelSpec& k) { return k.zero_plus_inverse(); }

namespace {

// Piecewise-constant density solve of sum_i rho_i A_{j-i} = 1 - kappa K(j d),
// where A_l = Int_{(l-1)d}^{l d} K. The identity holds exactly at the grid
// nodes by construction.
std::vector<double> solve_first_kind_density(const KernelSpec& k, double step, std::size_t count) {
    const double kappa = k.zero_plus_inverse();
    std::vector<double> A(count + 1, 0.0);
    double prev = 0.0;
    for (std::size_t l = 1; l <= count; ++l) {
        const double cur = k.integral(static_cast<double>(l) * step);
        A[l] = cur - prev;
        prev = cur;
    }
    std::vector<double> rho(count, 0.0);
    for (std::size_t j = 1; j <= count; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < j; ++i) acc += rho[i] * A[j - i];
        const double rhs = 1.0 - kappa * k.eval(static_cast<double>(j) * step) - acc;
        rho[j - 1] = rhs / A[1];
    }
    return rho;
}

} // namespace

std::vector<double> first_kind_cell_masses(const KernelSpec& k, double step, std::size_t count) {
    if (!(step > 0.0)) throw std::domain_error("first_kind_cell_masses requires step > 0");
    std::vector<double> m(count, 0.0);
    if (count == 0) return m;
    if (k.type() == KernelType::Fractional) {
        if (k.alpha() == 1.0) return m; // L = delta_0 only
        const double a = k.alpha();
        const double g = std::tgamma(2.0 - a);
        double prev = 0.0;
        for (std::size_t i = 1; i <= count; ++i) {
            const double cur = std::pow(static_cast<double>(i) * step, 1.0 - a) / g;
            m[i - 1] = cur - prev;
            prev = cur;
        }
        return m;
    }
    const auto rho = solve_first_kind_density(k, step, count);
    for (std::size_t i = 0; i < count; ++i) m[i] = rho[i] * step;
    return m;
}

double first_kind_mass(const KernelSpec& k, double u, double v) {
    if (!(u >= 0.0 && v > u)) throw std::domain_error("first_kind_mass requires 0 <= u < v");
    if (k.type() == KernelType::Fractional) {
        if (k.alpha() == 1.0) return 0.0;
        const double a = k.alpha();
        return (std::pow(v, 1.0 - a) - std::pow(u, 1.0 - a)) / std::tgamma(2.0 - a);
    }
    const std::size_t cells = 8192;
    const double step = v / static_cast<double>(cells);
    const auto rho = solve_first_kind_density(k, step, cells);
    // cumulative mass with a partial first cell at u
    const double pos = u / step;
    const std::size_t full = std::min(cells, static_cast<std::size_t>(pos));
    double mass = 0.0;
    for (std::size_t i = full; i < cells; ++i) mass += rho[i] * step;
    if (full < cells) mass -= rho[full] * (u - static_cast<double>(full) * step);
    return mass;
}

double PartitionSchedule::mesh(std::size_t n) const {
    const double dn = static_cast<double>(n);
    return rule == MeshRule::PowerLaw ? std::pow(dn, -eta) : std::log(dn) / dn;
}

void PartitionSchedule::validate() const {
    if (rule == MeshRule::PowerLaw && !(eta > 0.0 && eta < 1.0))
        throw config_error("PowerLaw mesh rule requires eta in (0,1)");
    if (!(factor >= 1.0)) throw config_error("partition schedule requires factor >= 1");
}

PartitionReport check_partition_conditions(const KernelSpec& k, const PartitionSchedule& sched,
                                           std::size_t n_max) {
    sched.validate();
    if (n_max < 2) throw std::domain_error("check_partition_conditions requires n_max >= 2");
    PartitionReport rep;
    const double gamma = k.holder_gamma();

    // L((0, t_n]) for all n at once: fractional in closed form, otherwise one
    // cumulative solve over [0, max t_n].
    std::vector<double> horizons(n_max + 1, 0.0);
    double t_max = 0.0;
    for (std::size_t n = 2; n <= n_max; ++n) {
        horizons[n] = static_cast<double>(n) * sched.mesh(n);
        t_max = std::max(t_max, horizons[n]);
    }
    std::vector<double> cum_mass; // on a uniform grid when numeric
    double mass_step = 0.0;
    if (k.type() != KernelType::Fractional) {
        const std::size_t cells = 8192;
        mass_step = t_max / static_cast<double>(cells);
        const auto m = first_kind_cell_masses(k, mass_step, cells);
        cum_mass.assign(cells + 1, 0.0);
        for (std::size_t i = 0; i < cells; ++i) cum_mass[i + 1] = cum_mass[i] + m[i];
    }
    auto mass_at = [&](double t) {
        if (k.type() == KernelType::Fractional)
            return k.alpha() == 1.0 ? 0.0 : std::pow(t, 1.0 - k.alpha()) / std::tgamma(2.0 - k.alpha());
        const double pos = t / mass_step;
        const std::size_t i = std::min(cum_mass.size() - 2, static_cast<std::size_t>(pos));
        const double frac = pos - static_cast<double>(i);
        return cum_mass[i] + frac * (cum_mass[i + 1] - cum_mass[i]);
    };

    for (std::size_t n = 2; n <= n_max; ++n) {
        const double tn = horizons[n];
        const double mesh_n = sched.mesh(n);
        const std::size_t mn = static_cast<std::size_t>(std::ceil(sched.factor * static_cast<double>(n)));
        const double mesh_m = sched.mesh(mn);
        PartitionReport::Row row;
        row.n = n;
        row.horizon = tn;
        row.mesh_seq = std::sqrt(tn) * std::pow(mesh_n, gamma);
        row.mass_seq = static_cast<double>(n) * mass_at(tn) * std::pow(mesh_m, gamma) / std::sqrt(tn);
        rep.rows.push_back(row);
    }

    auto tail_trend = [&](auto proj) {
        const std::size_t half = rep.rows.size() / 2;
        bool dec = true;
        for (std::size_t i = half + 1; i < rep.rows.size(); ++i)
            if (proj(rep.rows[i]) > proj(rep.rows[i - 1]) * (1.0 + 1e-12)) { dec = false; break; }
        return dec;
    };
    rep.mesh_decreasing = tail_trend([](const PartitionReport::Row& r) { return r.mesh_seq; });
    rep.mass_decreasing = tail_trend([](const PartitionReport::Row& r) { return r.mass_seq; });
    rep.mesh_terminal = rep.rows.back().mesh_seq;
    rep.mass_terminal = rep.rows.back().mass_seq;
    rep.mesh_verdict = rep.mesh_decreasing ? "condition satisfied trend" : "condition violated trend";
    rep.mass_verdict = rep.mass_decreasing ? "condition satisfied trend" : "condition violated trend";
    return rep;
}

} // namespace vcir
