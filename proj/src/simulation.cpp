#include "precim/simulation.hpp"

#include <cmath>
#include <tuple>

#include <json.hpp>

#include "precim/io.hpp"
#include "precim/kernels.hpp"
#include "precim/parallel.hpp"
#include "precim/rng.hpp"

namespace precim {

void SimConfig::validate() const {
    if (k_true < 1) throw Error("sim config: k_true must be >= 1");
    if (n_grid.empty()) throw Error("sim config: n_grid is empty");
    if (n_reps < 1) throw Error("sim config: n_reps must be >= 1");
    if (specs.empty()) throw Error("sim config: no methods");
    if (specs.size() != method_labels.size()) {
        throw Error("sim config: method labels must pair with specs");
    }
    if (!p_grid.empty() && p_grid.size() != n_grid.size()) {
        throw Error("sim config: p_grid must pair with n_grid");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 10) throw Error("sim config: all n must be >= 10");
        if (p_for(i) < k_true + 2) {
            throw Error("sim config: p must be >= k_true + 2");
        }
    }
}

Index SimConfig::p_for(std::size_t grid_index) const {
    if (!p_grid.empty()) return p_grid[grid_index];
    return static_cast<Index>(std::lround(gamma * static_cast<double>(n_grid[grid_index])));
}

FactorModelParams gen_params(Index k_factors, Index p, std::uint64_t seed) {
    if (k_factors < 1 || p < k_factors + 2) {
        throw Error("gen_params: needs K >= 1 and p >= K + 2");
    }
    FactorModelParams params;

    Vector diag(k_factors);
    if (k_factors == 1) {
        diag(0) = 2.5;
    } else {
        for (Index i = 0; i < k_factors; ++i) {
            diag(i) = 2.5 + 0.5 * static_cast<double>(i) / static_cast<double>(k_factors - 1);
        }
    }
    params.sigma_f = Matrix(k_factors, k_factors);
    for (Index i = 0; i < k_factors; ++i) {
        for (Index j = 0; j < k_factors; ++j) {
            if (i == j) {
                params.sigma_f(i, j) = diag(i);
            } else {
                const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                params.sigma_f(i, j) = sign * std::pow(0.3, std::abs(i - j)) *
                                       std::min(diag(i), diag(j));
            }
        }
    }
    EigSym es = eig_sym(params.sigma_f);
    if (es.lambda(k_factors - 1) <= 0.0) {
        throw NotPositiveDefiniteError("gen_params: constructed sigma_f is not SPD");
    }

    params.mu_f = Vector::Constant(k_factors, 0.5);

    // Draw order is pinned: loadings row-major, then error variances.
    Rng rng(seed);
    const double sd = 1.0 / std::sqrt(static_cast<double>(k_factors));
    params.loadings = Matrix(k_factors, p);
    for (Index k = 0; k < k_factors; ++k) {
        for (Index j = 0; j < p; ++j) {
            params.loadings(k, j) = 0.5 + sd * rng.normal();
        }
    }
    const double logp = std::log(static_cast<double>(p));
    params.sigma_u_diag = Vector(p);
    for (Index j = 0; j < p; ++j) {
        params.sigma_u_diag(j) = rng.uniform(1.0, 3.0) * logp;
    }
    params.validate();
    return params;
}

Matrix sample_panel(const FactorModelParams& params, Index n, std::uint64_t seed) {
    if (n < 1) throw Error("sample_panel: n must be >= 1");
    params.validate();
    const Index K = params.k(), p = params.p();
    const Matrix sf_half = sym_sqrt(params.sigma_f);
    const Vector su_sd = params.sigma_u_diag.cwiseSqrt();

    Rng rng(seed);
    Matrix y(n, p);
    Vector z(K), f(K), u(p);
    for (Index t = 0; t < n; ++t) {
        for (Index k = 0; k < K; ++k) z(k) = rng.normal();
        f = params.mu_f + sf_half * z;
        for (Index j = 0; j < p; ++j) u(j) = su_sd(j) * rng.normal();
        y.row(t) = (params.loadings.transpose() * f + u).transpose();
    }
    return y;
}

ErrorMetrics error_metrics(const Matrix& theta_hat, const Matrix& theta_true) {
    if (theta_hat.rows() != theta_true.rows() || theta_hat.cols() != theta_true.cols()) {
        throw ShapeMismatchError("error_metrics: shape mismatch");
    }
    const Index p = theta_hat.rows();
    const std::size_t total = static_cast<std::size_t>(theta_hat.size());
    ErrorMetrics out{};
    out.mean_abs = kernels::sum_abs_diff(theta_hat.data(), theta_true.data(), total) /
                   static_cast<double>(total);
    Vector row_acc = Vector::Zero(p);
    for (Index c = 0; c < theta_hat.cols(); ++c) {
        kernels::acc_sq_diff(row_acc.data(), theta_hat.col(c).data(),
                             theta_true.col(c).data(), static_cast<std::size_t>(p));
    }
    out.max_row_l2 = std::sqrt(row_acc.maxCoeff());
    return out;
}

namespace {

bool is_adaptive(Method m) {
    return m == Method::pcr_adaptive_feasible || m == Method::pcr_elbow_oracle;
}

struct JobOutput {
    std::vector<MCCell> cells;  // one per method
    double xi_bar = 0.0;
};

JobOutput run_one_rep(const SimConfig& config, Index n, Index p, Index rep,
                      double loading_scale, bool want_xi) {
    const std::uint64_t param_seed =
        derive_seed(config.base_seed, static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(rep), 0);
    const std::uint64_t panel_seed =
        derive_seed(config.base_seed, static_cast<std::uint64_t>(n),
                    static_cast<std::uint64_t>(rep), 1);

    FactorModelParams params = gen_params(config.k_true, p, param_seed);
    if (loading_scale != 1.0) params.loadings *= loading_scale;

    PopulationPrecision truth = precision_lemma1(params);
    // Ground-truth self-check before scoring anything.
    const Matrix direct = precision_direct(assemble_covariance(params));
    const double gap = kernels::max_abs_diff(truth.theta.data(), direct.data(),
                                             static_cast<std::size_t>(direct.size()));
    if (gap > 1e-8) {
        throw Error("run_mc: population precision cross-check failed (gap " +
                    fmt_g(gap) + ")");
    }

    const Matrix panel = sample_panel(params, n, panel_seed);

    std::vector<PrecisionEstimate> estimates;
    try {
        estimates = estimate_precision_multi(panel, config.specs,
                                             &params.sigma_u_diag, 1);
    } catch (const DegenerateTauError& e) {
        throw DegenerateTauError("run_mc: n=" + std::to_string(n) +
                                     " rep=" + std::to_string(rep) + ": " + e.what(),
                                 e.row, e.tau_sq);
    }

    JobOutput out;
    if (want_xi) out.xi_bar = snr(params).xi_bar;
    out.cells.resize(config.specs.size());
    for (std::size_t m = 0; m < config.specs.size(); ++m) {
        MCCell& cell = out.cells[m];
        cell.method = config.method_labels[m];
        cell.n = n;
        cell.p = p;
        cell.k_true = config.k_true;
        cell.rep = rep;
        const ErrorMetrics err = error_metrics(estimates[m].theta, truth.theta);
        cell.mean_abs = err.mean_abs;
        cell.max_row_l2 = err.max_row_l2;
        if (is_adaptive(config.specs[m].method)) {
            for (const auto& fit : estimates[m].rows) ++cell.k_hist[fit.k_used];
        }
    }
    return out;
}

void summarize(MCResult& result, const SimConfig& config) {
    struct Acc {
        std::vector<double> mean_abs, max_row;
    };
    std::map<std::tuple<std::string, Index, Index>, Acc> acc;
    for (const auto& cell : result.cells) {
        auto& a = acc[{cell.method, cell.n, cell.p}];
        a.mean_abs.push_back(cell.mean_abs);
        a.max_row.push_back(cell.max_row_l2);
    }
    auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
        const double n = static_cast<double>(v.size());
        mean = kernels::sum(v.data(), v.size()) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    };
    // Keep summary rows in (method order, grid order) rather than map order.
    for (std::size_t m = 0; m < config.method_labels.size(); ++m) {
        for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
            auto key = std::make_tuple(config.method_labels[m], config.n_grid[g],
                                       config.p_for(g));
            auto it = acc.find(key);
            if (it == acc.end()) continue;
            MCSummary s;
            s.method = std::get<0>(key);
            s.n = std::get<1>(key);
            s.p = std::get<2>(key);
            mean_se(it->second.mean_abs, s.mean_abs_mean, s.mean_abs_se);
            mean_se(it->second.max_row, s.max_row_l2_mean, s.max_row_l2_se);
            result.summary.push_back(std::move(s));
        }
    }
}

}  // namespace

MCResult run_mc(const SimConfig& config) {
    config.validate();
    const std::size_t n_cells_per_rep = config.specs.size();
    const std::size_t jobs = config.n_grid.size() * static_cast<std::size_t>(config.n_reps);

    MCResult result;
    result.cells.resize(jobs * n_cells_per_rep);

    parallel_for(0, static_cast<std::int64_t>(jobs), [&](std::int64_t job) {
        const std::size_t gi = static_cast<std::size_t>(job) /
                               static_cast<std::size_t>(config.n_reps);
        const Index rep = static_cast<Index>(job % config.n_reps);
        const Index n = config.n_grid[gi];
        const Index p = config.p_for(gi);
        JobOutput out = run_one_rep(config, n, p, rep, 1.0, false);
        for (std::size_t m = 0; m < n_cells_per_rep; ++m) {
            result.cells[static_cast<std::size_t>(job) * n_cells_per_rep + m] =
                std::move(out.cells[m]);
        }
    }, config.threads);

    summarize(result, config);
    return result;
}

std::vector<SweepPoint> snr_sweep(const SimConfig& config) {
    config.validate();
    if (config.alpha_grid.empty()) throw Error("snr_sweep: alpha grid is empty");
    for (double a : config.alpha_grid) {
        if (!(a > 0.0)) throw Error("snr_sweep: alpha values must be > 0");
    }
    const Index n = config.n_grid.front();
    const Index p = config.p_for(0);

    const std::size_t n_alpha = config.alpha_grid.size();
    const std::size_t reps = static_cast<std::size_t>(config.n_reps);
    std::vector<JobOutput> outputs(n_alpha * reps);

    parallel_for(0, static_cast<std::int64_t>(n_alpha * reps), [&](std::int64_t job) {
        const std::size_t ai = static_cast<std::size_t>(job) / reps;
        const Index rep = static_cast<Index>(job % static_cast<std::int64_t>(reps));
        outputs[static_cast<std::size_t>(job)] =
            run_one_rep(config, n, p, rep, config.alpha_grid[ai], true);
    }, config.threads);

    std::vector<SweepPoint> points(n_alpha);
    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
        SweepPoint& pt = points[ai];
        pt.alpha = config.alpha_grid[ai];
        pt.methods.resize(config.specs.size());
        for (std::size_t m = 0; m < config.specs.size(); ++m) {
            pt.methods[m].method = config.method_labels[m];
        }
        for (std::size_t r = 0; r < reps; ++r) {
            const JobOutput& out = outputs[ai * reps + r];
            pt.xi_bar += out.xi_bar;
            for (std::size_t m = 0; m < config.specs.size(); ++m) {
                pt.methods[m].mean_abs += out.cells[m].mean_abs;
                pt.methods[m].max_row_l2 += out.cells[m].max_row_l2;
            }
        }
        pt.xi_bar /= static_cast<double>(reps);
        for (auto& ms : pt.methods) {
            ms.mean_abs /= static_cast<double>(reps);
            ms.max_row_l2 /= static_cast<double>(reps);
        }
    }
    return points;
}

void write_mc_cells_csv(const MCResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "method,n,p,k_true,rep,mean_abs_error,max_row_l2_error,selected_k_hist\n";
    for (const auto& cell : result.cells) {
        out << cell.method << ',' << cell.n << ',' << cell.p << ',' << cell.k_true
            << ',' << cell.rep << ',' << fmt_g(cell.mean_abs) << ','
            << fmt_g(cell.max_row_l2) << ',';
        bool first = true;
        for (const auto& [k, count] : cell.k_hist) {
            if (!first) out << '|';
            out << k << ':' << count;
            first = false;
        }
        out << '\n';
    }
}

void write_mc_summary_json(const MCResult& result, const SimConfig& config,
                           const std::string& path) {
    nlohmann::json j;
    j["k_true"] = config.k_true;
    j["n_reps"] = config.n_reps;
    j["base_seed"] = config.base_seed;
    j["methods"] = config.method_labels;
    auto& rows = j["summary"];
    rows = nlohmann::json::array();
    for (const auto& s : result.summary) {
        rows.push_back({{"method", s.method},
                        {"n", s.n},
                        {"p", s.p},
                        {"mean_abs", {{"mean", s.mean_abs_mean}, {"se", s.mean_abs_se}}},
                        {"max_row_l2",
                         {{"mean", s.max_row_l2_mean}, {"se", s.max_row_l2_se}}}});
    }
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "alpha,xi_bar,method,mean_abs_error,max_row_l2_error\n";
    for (const auto& pt : points) {
        for (const auto& ms : pt.methods) {
            out << fmt_g(pt.alpha) << ',' << fmt_g(pt.xi_bar) << ',' << ms.method << ','
                << fmt_g(ms.mean_abs) << ',' << fmt_g(ms.max_row_l2) << '\n';
        }
    }
}

}  // namespace precim
