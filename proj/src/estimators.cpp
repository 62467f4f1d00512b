#include "precim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "precim/kernels.hpp"
#include "precim/parallel.hpp"

namespace precim {

namespace {

// Residual-to-signal ratio below which a ridgeless row is treated as
// interpolating (p-1 = n boundary behaves like p-1 > n generically).
constexpr double kInterpResidTol = 1e-10;

// Tall panels with at least this many regressors use the shared n x n
// spectral downdate for rank diagnostics instead of per-row eigensolves.
constexpr Index kSecularMinCols = 48;

double lam_cutoff(const Vector& lam_desc, Index n, Index m) {
    if (lam_desc.size() == 0) return 0.0;
    const double rtol = default_pinv_rtol(n, m);
    return rtol * rtol * std::max(0.0, lam_desc(0));
}

Vector gram_eigvals_desc(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigensolver failed");
    return es.eigenvalues().reverse().cwiseMax(0.0);
}

/// Singular values squared of y_minus (descending), via the smaller Gram side.
Vector svals_sq_of(const Matrix& y_minus) {
    const Index n = y_minus.rows(), m = y_minus.cols();
    if (n <= m) return gram_eigvals_desc(y_minus * y_minus.transpose());
    return gram_eigvals_desc(y_minus.transpose() * y_minus);
}

/// out = Y' w with entry j removed; the per-column dots are the hot loop.
Vector gemv_t_drop(const Matrix& y, const Vector& w, Index j) {
    const Index n = y.rows(), p = y.cols();
    Vector out(p - 1);
    Index r = 0;
    for (Index m = 0; m < p; ++m) {
        if (m == j) continue;
        out(r++) = kernels::dot(y.col(m).data(), w.data(), static_cast<std::size_t>(n));
    }
    return out;
}

Matrix demeaned(const Matrix& y) {
    Matrix out = y;
    const Index n = y.rows();
    for (Index c = 0; c < y.cols(); ++c) {
        const double mean = kernels::sum(y.col(c).data(), static_cast<std::size_t>(n)) /
                            static_cast<double>(n);
        out.col(c).array() -= mean;
    }
    return out;
}

Index select_k_feasible_from(const Vector& svals_sq, Index n, Index m, double kappa) {
    if (!(kappa > 1.0)) throw Error("select_k_feasible: kappa must be > 1");
    const double nm = static_cast<double>(n) * static_cast<double>(m);
    const double mu = 2.0 * std::pow(std::sqrt(static_cast<double>(n)) +
                                         std::sqrt(static_cast<double>(m)),
                                     2.0);
    const double kbar_raw = std::floor((kappa / (1.0 + kappa)) * nm / mu);
    Index kbar = static_cast<Index>(std::min({kbar_raw, static_cast<double>(n),
                                              static_cast<double>(m + 1)}));
    const double cut = lam_cutoff(svals_sq, n, m);
    Index positive = 0;
    while (positive < svals_sq.size() && svals_sq(positive) > cut) ++positive;
    kbar = std::min(kbar, positive);

    const double total = kernels::sum(svals_sq.data(), static_cast<std::size_t>(svals_sq.size()));
    double head = 0.0;
    Index count = 0;
    for (Index k = 1; k <= kbar; ++k) {
        head += svals_sq(k - 1);
        const double denom = nm - mu * static_cast<double>(k);
        if (denom <= 0.0) break;  // past the last valid k
        const double v_sq = std::max(0.0, total - head) / denom;
        if (svals_sq(k - 1) >= mu * v_sq) ++count;
    }
    return count;
}

Index select_k_elbow_from(const Vector& svals_sq, Index n, const Vector& su_minus,
                          double c0, double c_delta) {
    if (!(c0 > 1.0) || !(c_delta > 1.0)) {
        throw Error("select_k_elbow: constants must be > 1");
    }
    const double spec_norm = su_minus.maxCoeff();
    const double trace = kernels::sum(su_minus.data(), static_cast<std::size_t>(su_minus.size()));
    const double delta = c_delta * (spec_norm + trace / static_cast<double>(n));
    const double threshold = c0 * delta;
    Index count = 0;
    for (Index i = 0; i < svals_sq.size(); ++i) {
        if (svals_sq(i) / static_cast<double>(n) >= threshold) {
            ++count;
        } else {
            break;  // values are non-increasing
        }
    }
    return count;
}

// ---------------------------------------------------------------------------
// Shared per-panel state
// ---------------------------------------------------------------------------

struct PanelContext {
    const Matrix& y;
    Index n = 0, p = 0;
    bool wide = false;  // n <= p-1: Gram on the time side
    Matrix gram;        // wide: Y Y' (n x n); tall: Y'Y (p x p)
    Vector col_sq;      // per-column squared norms
};

PanelContext make_context(const Matrix& y) {
    PanelContext ctx{y};
    ctx.n = y.rows();
    ctx.p = y.cols();
    ctx.wide = ctx.n <= ctx.p - 1;
    ctx.gram = ctx.wide ? Matrix(y * y.transpose()) : Matrix(y.transpose() * y);
    ctx.col_sq = Vector(ctx.p);
    for (Index j = 0; j < ctx.p; ++j) {
        ctx.col_sq(j) = kernels::sum_sq(y.col(j).data(), static_cast<std::size_t>(ctx.n));
    }
    return ctx;
}

/// Gram column j with entry j removed: Y_{-j}' y_j (tall mode only).
Vector tall_b(const PanelContext& ctx, Index j) {
    Vector b(ctx.p - 1);
    Index r = 0;
    for (Index m = 0; m < ctx.p; ++m) {
        if (m == j) continue;
        b(r++) = ctx.gram(m, j);
    }
    return b;
}

struct RowEig {
    Vector lam;  // singular values squared of Y_{-j}, descending
    Matrix q;    // wide: left singular basis (n x n); tall: right basis (p-1 x p-1)
};

RowEig row_eig(const PanelContext& ctx, Index j) {
    RowEig out;
    if (ctx.wide) {
        Matrix gj = ctx.gram - ctx.y.col(j) * ctx.y.col(j).transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> es(gj);
        if (es.info() != Eigen::Success) throw Error("row eigensolver failed");
        out.lam = es.eigenvalues().reverse().cwiseMax(0.0);
        out.q = es.eigenvectors().rowwise().reverse();
    } else {
        const Index m = ctx.p - 1;
        Matrix gj(m, m);
        Index r = 0;
        for (Index a = 0; a < ctx.p; ++a) {
            if (a == j) continue;
            Index c = 0;
            for (Index bcol = 0; bcol < ctx.p; ++bcol) {
                if (bcol == j) continue;
                gj(r, c++) = ctx.gram(a, bcol);
            }
            ++r;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(gj);
        if (es.info() != Eigen::Success) throw Error("row eigensolver failed");
        out.lam = es.eigenvalues().reverse().cwiseMax(0.0);
        out.q = es.eigenvectors().rowwise().reverse();
    }
    return out;
}

RowFit assemble_projected_fit(const PanelContext& ctx, Index j, const RowEig& eig,
                              Index k, double tau_floor, bool is_rre) {
    const Index n = ctx.n;
    const double cut = lam_cutoff(eig.lam, n, ctx.p - 1);
    const double y_sq = ctx.col_sq(j);

    // Coefficients of y_j (wide) or Y_{-j}'y_j (tall) in the eigenbasis.
    Vector c;
    if (ctx.wide) {
        c = eig.q.transpose() * ctx.y.col(j);
    } else {
        c = eig.q.transpose() * tall_b(ctx, j);
    }

    Index rank_all = 0;
    while (rank_all < eig.lam.size() && eig.lam(rank_all) > cut) ++rank_all;
    const Index k_eff = is_rre ? rank_all : std::min(k, rank_all);

    // Retained-component combination and the fitted quadratic y_j' Y_{-j} alpha.
    Vector z = Vector::Zero(eig.q.rows());
    double fitted = 0.0;
    for (Index i = 0; i < k_eff; ++i) {
        const double w = c(i) / eig.lam(i);
        kernels::axpy(w, eig.q.col(i).data(), z.data(),
                      static_cast<std::size_t>(z.size()));
        fitted += ctx.wide ? c(i) * c(i) : c(i) * c(i) / eig.lam(i);
    }

    RowFit fit;
    if (ctx.wide) {
        fit.alpha = gemv_t_drop(ctx.y, z, j);
    } else {
        fit.alpha = z;
    }

    const double resid_sq = std::max(0.0, y_sq - fitted);
    fit.tau_sq = resid_sq / static_cast<double>(n);

    if (is_rre) {
        fit.k_used = ctx.p - 1;
        fit.complexity.r_hat = rank_all;
        fit.complexity.eta_hat =
            rank_all > 0 ? eig.lam(rank_all - 1) / static_cast<double>(n) : 0.0;
        fit.complexity.psi_hat = 0.0;
        const bool interpolates = (ctx.p - 1 > n) ||
                                  std::sqrt(resid_sq) <= kInterpResidTol * std::sqrt(y_sq);
        if (interpolates) {
            fit.tau_sq = y_sq / static_cast<double>(n);
            fit.interpolated = true;
        }
    } else {
        fit.k_used = k;
        fit.complexity.r_hat = k_eff;
        fit.complexity.eta_hat = k_eff > 0 ? eig.lam(k_eff - 1) / static_cast<double>(n) : 0.0;
        fit.complexity.psi_hat =
            k < eig.lam.size() ? eig.lam(k) / static_cast<double>(n) : 0.0;
    }

    if (fit.tau_sq <= tau_floor) {
        throw DegenerateTauError("estimate_precision: tau^2 <= floor at row " +
                                     std::to_string(j),
                                 j, fit.tau_sq);
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Ridgeless-only fast path: Sherman-Morrison solves plus secular-equation
// rank diagnostics; no per-row eigendecomposition.
// ---------------------------------------------------------------------------

struct RreEngine {
    EigSym time_eig;  // eigendecomposition of Y Y' (n x n)
    Matrix coeff;     // Q' Y, one column per asset
    bool has_time_eig = false;
};

RreEngine make_rre_engine(const PanelContext& ctx) {
    RreEngine eng;
    const bool need_time_eig = ctx.wide || ctx.p - 1 >= kSecularMinCols;
    if (need_time_eig && ctx.n <= 4096) {
        const Matrix time_gram = ctx.wide ? ctx.gram : Matrix(ctx.y * ctx.y.transpose());
        eng.time_eig = eig_sym(time_gram);
        eng.coeff = eng.time_eig.q.transpose() * ctx.y;
        eng.has_time_eig = true;
    }
    return eng;
}

/// Rank and smallest retained eigenvalue of Y_{-j} via the rank-one downdate
/// of Y Y'. Returns nullopt when the generic-rank assumption fails and the
/// caller should fall back to a full per-row decomposition.
std::optional<Complexity> secular_diagnostics(const PanelContext& ctx,
                                              const RreEngine& eng, Index j) {
    const Index m = std::min(ctx.n, ctx.p - 1);
    const Vector c = eng.coeff.col(j);
    const double top = downdated_eigenvalue(eng.time_eig.lambda, c, 0);
    const double bottom = downdated_eigenvalue(eng.time_eig.lambda, c, m - 1);
    const double rtol = default_pinv_rtol(ctx.n, ctx.p - 1);
    if (bottom <= rtol * rtol * top) return std::nullopt;
    Complexity cx;
    cx.r_hat = m;
    cx.eta_hat = bottom / static_cast<double>(ctx.n);
    cx.psi_hat = 0.0;
    return cx;
}

std::optional<RowFit> rre_fit_fast(const PanelContext& ctx, const RreEngine& eng,
                                   Index j, double tau_floor) {
    const Index n = ctx.n;
    const double y_sq = ctx.col_sq(j);
    RowFit fit;
    fit.k_used = ctx.p - 1;

    if (ctx.wide) {
        if (!eng.has_time_eig) return std::nullopt;
        const Vector& lam = eng.time_eig.lambda;
        const double rtol = default_pinv_rtol(n, ctx.p - 1);
        if (lam(lam.size() - 1) <= rtol * rtol * lam(0)) return std::nullopt;
        auto cx = secular_diagnostics(ctx, eng, j);
        if (!cx) return std::nullopt;
        fit.complexity = *cx;
        // Minimum-norm interpolator through the Sherman-Morrison identity:
        // (G - yy')^{-1} y = G^{-1} y / (1 - y'G^{-1}y).
        const Vector c = eng.coeff.col(j);
        Vector scaled = c.cwiseQuotient(eng.time_eig.lambda);
        const double d = c.dot(scaled);
        if (d >= 1.0 - 1e-12) return std::nullopt;
        Vector z = eng.time_eig.q * (scaled / (1.0 - d));
        fit.alpha = gemv_t_drop(ctx.y, z, j);
        fit.tau_sq = y_sq / static_cast<double>(n);
        fit.interpolated = true;
    } else {
        Vector b = tall_b(ctx, j);
        Matrix gj(ctx.p - 1, ctx.p - 1);
        Index r = 0;
        for (Index a = 0; a < ctx.p; ++a) {
            if (a == j) continue;
            Index cc = 0;
            for (Index bcol = 0; bcol < ctx.p; ++bcol) {
                if (bcol == j) continue;
                gj(r, cc++) = ctx.gram(a, bcol);
            }
            ++r;
        }
        Eigen::LLT<Matrix> llt(gj);
        if (llt.info() != Eigen::Success) return std::nullopt;
        fit.alpha = llt.solve(b);
        const double resid_sq = std::max(0.0, y_sq - b.dot(fit.alpha));
        fit.tau_sq = resid_sq / static_cast<double>(n);
        if (ctx.p - 1 >= kSecularMinCols && eng.has_time_eig) {
            auto cx = secular_diagnostics(ctx, eng, j);
            if (!cx) return std::nullopt;
            fit.complexity = *cx;
        } else {
            Vector lam = gram_eigvals_desc(gj);
            const double cut = lam_cutoff(lam, ctx.n, ctx.p - 1);
            Index rank_all = 0;
            while (rank_all < lam.size() && lam(rank_all) > cut) ++rank_all;
            if (rank_all < ctx.p - 1) return std::nullopt;  // rank deficient
            fit.complexity.r_hat = rank_all;
            fit.complexity.eta_hat = lam(rank_all - 1) / static_cast<double>(ctx.n);
            fit.complexity.psi_hat = 0.0;
        }
        if (std::sqrt(resid_sq) <= kInterpResidTol * std::sqrt(y_sq)) {
            fit.tau_sq = y_sq / static_cast<double>(n);
            fit.interpolated = true;
        }
    }

    if (fit.tau_sq <= tau_floor) {
        throw DegenerateTauError("estimate_precision: tau^2 <= floor at row " +
                                     std::to_string(j),
                                 j, fit.tau_sq);
    }
    return fit;
}

void write_row(Matrix& theta, const RowFit& fit, Index j) {
    const Index p = theta.rows();
    theta(j, j) = 1.0 / fit.tau_sq;
    Index c = 0;
    for (Index m = 0; m < p; ++m) {
        if (m == j) continue;
        theta(j, m) = -fit.alpha(c++) / fit.tau_sq;
    }
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::rre: return "rre";
        case Method::pcr_fixed: return "pcr_fixed";
        case Method::pcr_adaptive_feasible: return "pcr_adaptive";
        case Method::pcr_elbow_oracle: return "pcr_elbow";
    }
    return "unknown";
}

void EstimatorSpec::validate() const {
    if (!(kappa > 1.0)) throw Error("estimator spec: kappa must be > 1");
    if (!(c0 > 1.0)) throw Error("estimator spec: c0 must be > 1");
    if (!(c_delta > 1.0)) throw Error("estimator spec: c_delta must be > 1");
    if (tau_floor < 0.0) throw Error("estimator spec: tau_floor must be >= 0");
    if (method == Method::pcr_fixed && k_fixed < 0) {
        throw Error("estimator spec: k_fixed must be >= 0");
    }
}

RowFit fit_row_general(const Matrix& y, Index j, const Matrix& b,
                       const EstimatorSpec& spec) {
    require_finite(y, "fit_row_general");
    require_finite(b, "fit_row_general basis");
    const Index n = y.rows(), p = y.cols();
    if (n < 2 || p < 2) throw Error("fit_row_general: needs n >= 2, p >= 2");
    if (j < 0 || j >= p) throw Error("fit_row_general: row index out of range");
    if (b.rows() != p - 1 || b.cols() > p - 1) {
        throw ShapeMismatchError("fit_row_general: B must be (p-1) x q with q <= p-1");
    }

    Matrix y_minus(n, p - 1);
    Index c = 0;
    for (Index m = 0; m < p; ++m) {
        if (m == j) continue;
        y_minus.col(c++) = y.col(m);
    }
    const Vector yj = y.col(j);

    RowFit fit;
    const Index q = b.cols();
    if (q == 0) {
        fit.alpha = Vector::Zero(p - 1);
        fit.k_used = 0;
    } else {
        Matrix design = y_minus * b;  // n x q
        fit.alpha = b * (pinv(design) * yj);
        SvdResult bs = svd(b);
        const double bcut = default_pinv_rtol(b.rows(), b.cols()) *
                            (bs.s.size() > 0 ? bs.s(0) : 0.0);
        fit.k_used = (bs.s.array() > bcut).count();
    }
    fit.tau_sq = yj.dot(yj - y_minus * fit.alpha) / static_cast<double>(n);

    // Complexity triple of the projected design.
    if (q == 0) {
        fit.complexity.r_hat = 0;
        fit.complexity.eta_hat = 0.0;
        SvdResult full = svd(y_minus);
        fit.complexity.psi_hat =
            full.s.size() > 0 ? full.s(0) * full.s(0) / static_cast<double>(n) : 0.0;
    } else {
        Matrix proj = b * pinv(b);  // P_B
        SvdResult on = svd(y_minus * proj);
        const double cut = default_pinv_rtol(n, p - 1) * (on.s.size() > 0 ? on.s(0) : 0.0);
        Index r_hat = (on.s.array() > cut).count();
        fit.complexity.r_hat = r_hat;
        fit.complexity.eta_hat =
            r_hat > 0 ? on.s(r_hat - 1) * on.s(r_hat - 1) / static_cast<double>(n) : 0.0;
        SvdResult off = svd(y_minus - y_minus * proj);
        fit.complexity.psi_hat =
            off.s.size() > 0 ? off.s(0) * off.s(0) / static_cast<double>(n) : 0.0;
    }

    if (fit.tau_sq <= spec.tau_floor) {
        throw DegenerateTauError("fit_row_general: tau^2 <= floor at row " +
                                     std::to_string(j),
                                 j, fit.tau_sq);
    }
    return fit;
}

double tau_interpolating(const Vector& y_j) {
    require_finite(y_j, "tau_interpolating");
    if (y_j.size() < 1) throw Error("tau_interpolating: empty vector");
    return kernels::sum_sq(y_j.data(), static_cast<std::size_t>(y_j.size())) /
           static_cast<double>(y_j.size());
}

Index select_k_feasible(const Matrix& y_minus, double kappa) {
    require_finite(y_minus, "select_k_feasible");
    const Index n = y_minus.rows(), m = y_minus.cols();
    return select_k_feasible_from(svals_sq_of(y_minus), n, m, kappa);
}

Index select_k_elbow(const Matrix& y_minus, const Vector& sigma_u_minus_diag,
                     double c0, double c_delta) {
    require_finite(y_minus, "select_k_elbow");
    require_finite(sigma_u_minus_diag, "select_k_elbow sigma_u");
    if (sigma_u_minus_diag.size() != y_minus.cols()) {
        throw ShapeMismatchError("select_k_elbow: sigma_u diagonal length mismatch");
    }
    return select_k_elbow_from(svals_sq_of(y_minus), y_minus.rows(), sigma_u_minus_diag,
                               c0, c_delta);
}

PrecisionEstimate estimate_precision(const Matrix& y, const EstimatorSpec& spec,
                                     const Vector* sigma_u_diag, int threads) {
    return estimate_precision_multi(y, {spec}, sigma_u_diag, threads).front();
}

std::vector<PrecisionEstimate> estimate_precision_multi(
    const Matrix& y, const std::vector<EstimatorSpec>& specs,
    const Vector* sigma_u_diag, int threads) {
    require_finite(y, "estimate_precision");
    const Index n = y.rows(), p = y.cols();
    if (n < 2 || p < 2) throw Error("estimate_precision: needs n >= 2, p >= 2");
    if (specs.empty()) return {};

    for (const auto& spec : specs) {
        spec.validate();
        if (spec.method == Method::pcr_fixed && spec.k_fixed >= p - 1) {
            throw KTooLargeError("estimate_precision: k_fixed must be < p-1");
        }
        if (spec.method == Method::pcr_elbow_oracle) {
            if (sigma_u_diag == nullptr) {
                throw Error("estimate_precision: elbow oracle needs sigma_u");
            }
            if (sigma_u_diag->size() != p) {
                throw ShapeMismatchError("estimate_precision: sigma_u diagonal length");
            }
        }
    }

    std::vector<PrecisionEstimate> results(specs.size());
    for (std::size_t s = 0; s < specs.size(); ++s) {
        results[s].spec = specs[s];
        results[s].n = n;
        results[s].p = p;
        results[s].theta = Matrix::Zero(p, p);
        results[s].rows.resize(static_cast<std::size_t>(p));
        results[s].interpolating = false;
    }

    // Specs sharing a demean setting share all per-row spectral work.
    for (int pass = 0; pass < 2; ++pass) {
        const bool demean = pass == 1;
        std::vector<std::size_t> group;
        for (std::size_t s = 0; s < specs.size(); ++s) {
            if (specs[s].demean == demean) group.push_back(s);
        }
        if (group.empty()) continue;

        const Matrix panel = demean ? demeaned(y) : y;
        const PanelContext ctx = make_context(panel);
        const bool all_rre = std::all_of(group.begin(), group.end(), [&](std::size_t s) {
            return specs[s].method == Method::rre;
        });

        std::optional<RreEngine> rre_engine;
        double min_floor = 0.0;
        if (all_rre) {
            rre_engine = make_rre_engine(ctx);
            min_floor = specs[group.front()].tau_floor;
            for (std::size_t s : group) min_floor = std::min(min_floor, specs[s].tau_floor);
        }

        parallel_for(0, p, [&](std::int64_t j) {
            std::optional<RowEig> eig;
            auto ensure_eig = [&]() -> const RowEig& {
                if (!eig) eig = row_eig(ctx, j);
                return *eig;
            };

            std::optional<RowFit> shared_rre;
            if (all_rre) {
                shared_rre = rre_fit_fast(ctx, *rre_engine, j, min_floor);
            }

            for (std::size_t s : group) {
                const EstimatorSpec& spec = specs[s];
                RowFit fit;
                switch (spec.method) {
                    case Method::rre:
                        if (shared_rre) {
                            fit = *shared_rre;
                            if (fit.tau_sq <= spec.tau_floor) {
                                throw DegenerateTauError(
                                    "estimate_precision: tau^2 <= floor at row " +
                                        std::to_string(j),
                                    j, fit.tau_sq);
                            }
                        } else {
                            fit = assemble_projected_fit(ctx, j, ensure_eig(), 0,
                                                         spec.tau_floor, true);
                        }
                        break;
                    case Method::pcr_fixed: {
                        const RowEig& re = ensure_eig();
                        const double cut = lam_cutoff(re.lam, n, p - 1);
                        Index rank_all = 0;
                        while (rank_all < re.lam.size() && re.lam(rank_all) > cut) ++rank_all;
                        if (spec.k_fixed > rank_all) {
                            throw KTooLargeError("estimate_precision: k_fixed exceeds rank at row " +
                                                 std::to_string(j));
                        }
                        fit = assemble_projected_fit(ctx, j, re, spec.k_fixed,
                                                     spec.tau_floor, false);
                        break;
                    }
                    case Method::pcr_adaptive_feasible: {
                        const RowEig& re = ensure_eig();
                        const Index k = select_k_feasible_from(re.lam, n, p - 1, spec.kappa);
                        fit = assemble_projected_fit(ctx, j, re, k, spec.tau_floor, false);
                        break;
                    }
                    case Method::pcr_elbow_oracle: {
                        const RowEig& re = ensure_eig();
                        Vector su_minus(p - 1);
                        Index r = 0;
                        for (Index m = 0; m < p; ++m) {
                            if (m == j) continue;
                            su_minus(r++) = (*sigma_u_diag)(m);
                        }
                        const Index k = select_k_elbow_from(re.lam, n, su_minus,
                                                            spec.c0, spec.c_delta);
                        fit = assemble_projected_fit(ctx, j, re, k, spec.tau_floor, false);
                        break;
                    }
                }
                write_row(results[s].theta, fit, j);
                results[s].rows[static_cast<std::size_t>(j)] = std::move(fit);
            }
        }, threads);
    }

    for (auto& res : results) {
        for (const auto& fit : res.rows) {
            if (fit.interpolated) res.interpolating = true;
        }
        if (res.spec.symmetrize) {
            res.theta = 0.5 * (res.theta + res.theta.transpose()).eval();
        }
    }
    return results;
}

}  // namespace precim
