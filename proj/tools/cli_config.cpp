#include "cli_config.hpp"

#include "vcir/errors.hpp"

#include <algorithm>
#include <set>

namespace vcir::cli {

namespace {

std::vector<double> number_array(const tomllite::Value& v, const std::string& what) {
    std::vector<double> out;
    for (const auto& e : v.as_array()) {
        if (!e.is_number()) throw config_error(what + " must be an array of numbers");
        out.push_back(e.as_number());
    }
    return out;
}

std::vector<std::string> string_array(const tomllite::Value& v, const std::string& what) {
    std::vector<std::string> out;
    for (const auto& e : v.as_array()) {
        if (!e.is_string()) throw config_error(what + " must be an array of strings");
        out.push_back(e.as_string());
    }
    return out;
}

void reject_unknown(const tomllite::Table& t, const std::set<std::string>& known,
                    const std::string& where) {
    for (const auto& [key, value] : t)
        if (!known.count(key)) throw config_error(where + ": unknown key '" + key + "'");
}

} // namespace

void Options::merge_config(const tomllite::Table& table, const std::string& source) {
    reject_unknown(table,
                   {"kernel", "params", "horizon", "dt", "dt-obs", "factor", "paths", "seed",
                    "threads", "out", "estimators", "fisher-paths", "tol", "u", "times", "lags",
                    "u1", "u2", "t", "emit-z", "stationary", "f", "mesh-rule", "eta", "n-max",
                    "path", "euler-weights"},
                   source);
    if (auto it = table.find("kernel"); it != table.end()) {
        const auto& kt = it->second.as_table();
        reject_unknown(kt, {"type", "alpha", "c", "lambda", "gamma"}, source + ": kernel");
        kernel_type = kt.at("type").as_string();
        if (auto a = kt.find("alpha"); a != kt.end()) alpha = a->second.as_number();
        if (auto c = kt.find("c"); c != kt.end()) exp_c = number_array(c->second, "kernel.c");
        if (auto l = kt.find("lambda"); l != kt.end())
            exp_lambda = number_array(l->second, "kernel.lambda");
        if (auto g = kt.find("gamma"); g != kt.end()) log_gamma = g->second.as_number();
    }
    if (auto it = table.find("params"); it != table.end()) {
        const auto& pt = it->second.as_table();
        reject_unknown(pt, {"x0", "b", "beta", "sigma"}, source + ": params");
        if (auto v = pt.find("x0"); v != pt.end()) x0 = v->second.as_number();
        if (auto v = pt.find("b"); v != pt.end()) b = v->second.as_number();
        if (auto v = pt.find("beta"); v != pt.end()) beta = v->second.as_number();
        if (auto v = pt.find("sigma"); v != pt.end()) sigma = v->second.as_number();
    }
    auto num = [&](const char* key) -> std::optional<double> {
        if (auto it = table.find(key); it != table.end()) return it->second.as_number();
        return std::nullopt;
    };
    if (auto v = num("horizon")) horizon = v;
    if (auto v = num("dt")) dt = v;
    if (auto v = num("dt-obs")) dt_obs = v;
    if (auto v = num("factor")) factor = v;
    if (auto v = num("tol")) tol = v;
    if (auto v = num("u1")) u1 = v;
    if (auto v = num("u2")) u2 = v;
    if (auto v = num("t")) t_single = v;
    if (auto v = num("eta")) eta = v;
    if (auto it = table.find("paths"); it != table.end())
        paths = static_cast<int>(it->second.as_integer());
    if (auto it = table.find("threads"); it != table.end())
        threads = static_cast<int>(it->second.as_integer());
    if (auto it = table.find("fisher-paths"); it != table.end())
        fisher_paths = static_cast<int>(it->second.as_integer());
    if (auto it = table.find("n-max"); it != table.end())
        n_max = static_cast<int>(it->second.as_integer());
    if (auto it = table.find("seed"); it != table.end())
        seed = static_cast<std::uint64_t>(it->second.as_integer());
    if (auto it = table.find("out"); it != table.end()) out_dir = it->second.as_string();
    if (auto it = table.find("estimators"); it != table.end())
        estimators = string_array(it->second, "estimators");
    if (auto it = table.find("u"); it != table.end()) {
        if (it->second.is_array())
            u_list = number_array(it->second, "u");
        else
            u_list = {it->second.as_number()};
    }
    if (auto it = table.find("times"); it != table.end()) times = number_array(it->second, "times");
    if (auto it = table.find("lags"); it != table.end()) lags = number_array(it->second, "lags");
    if (auto it = table.find("emit-z"); it != table.end()) emit_z = it->second.as_bool();
    if (auto it = table.find("stationary"); it != table.end()) stationary = it->second.as_bool();
    if (auto it = table.find("f"); it != table.end()) f_kind = it->second.as_string();
    if (auto it = table.find("mesh-rule"); it != table.end()) mesh_rule = it->second.as_string();
    if (auto it = table.find("path"); it != table.end()) path_csv = it->second.as_string();
    if (auto it = table.find("euler-weights"); it != table.end())
        euler_weights = it->second.as_string();
}

KernelSpec Options::kernel() const {
    const std::string type = kernel_type.value_or("fractional");
    if (type == "fractional") {
        if (!alpha) throw config_error("fractional kernel requires alpha");
        return KernelSpec::fractional(*alpha);
    }
    if (type == "expsum") {
        if (exp_c.empty()) throw config_error("expsum kernel requires c and lambda arrays");
        return KernelSpec::exponential_sum(exp_c, exp_lambda);
    }
    if (type == "log") {
        if (!log_gamma) throw config_error("log kernel requires gamma");
        return KernelSpec::log_kernel(*log_gamma);
    }
    throw config_error("unknown kernel type '" + type + "' (expected fractional, expsum, or log)");
}

ModelParams Options::params() const {
    ModelParams p;
    if (x0) p.x0 = *x0;
    if (b) p.b = *b;
    if (beta) p.beta = *beta;
    if (sigma) p.sigma = *sigma;
    p.validate();
    return p;
}

std::vector<EstimatorKind> Options::estimator_kinds() const {
    if (estimators.empty())
        return {EstimatorKind::MLEJoint, EstimatorKind::MoM, EstimatorKind::MLEbOnly,
                EstimatorKind::MLEBetaOnly};
    std::vector<EstimatorKind> out;
    for (const auto& name : estimators) {
        if (name == "mle") out.push_back(EstimatorKind::MLEJoint);
        else if (name == "mom") out.push_back(EstimatorKind::MoM);
        else if (name == "mle-b") out.push_back(EstimatorKind::MLEbOnly);
        else if (name == "mle-beta") out.push_back(EstimatorKind::MLEBetaOnly);
        else throw config_error("unknown estimator '" + name + "' (expected mle, mom, mle-b, mle-beta)");
    }
    return out;
}

ExperimentConfig Options::experiment() const {
    ExperimentConfig cfg;
    cfg.kernel = kernel();
    cfg.params = params();
    if (!horizon) throw config_error("horizon is required");
    cfg.horizon = *horizon;
    cfg.obs_step = dt_obs.value_or(dt.value_or(0.05));
    cfg.factor = factor.value_or(1.0);
    cfg.sim_step = dt.value_or(cfg.obs_step / cfg.factor);
    cfg.n_paths = paths.value_or(200);
    cfg.base_seed = seed.value_or(1);
    cfg.estimators = estimator_kinds();
    cfg.out_dir = out_dir.value_or("");
    cfg.threads = threads.value_or(0);
    cfg.fisher_paths = fisher_paths.value_or(32);
    if (euler_weights) {
        if (*euler_weights == "point") cfg.weight_rule = EulerWeightRule::PointEvaluation;
        else if (*euler_weights == "cell-average") cfg.weight_rule = EulerWeightRule::CellAverage;
        else throw config_error("euler-weights must be point or cell-average");
    }
    cfg.validate();
    return cfg;
}

} // namespace vcir::cli
