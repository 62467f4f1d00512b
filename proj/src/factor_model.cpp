#include "precim/factor_model.hpp"

#include <cmath>
#include <limits>

#include "precim/kernels.hpp"

namespace precim {

namespace {

constexpr double kTauFloor = 1e-12;
constexpr double kLoadingRankTol = 1e-12;

/// Largest two values of a vector (used for spectral norms of the
/// leave-one-out diagonal error covariance).
struct Top2 {
    double first = 0.0;
    double second = 0.0;
    Index first_at = -1;
};

Top2 top2(const Vector& v) {
    Top2 t;
    for (Index i = 0; i < v.size(); ++i) {
        if (v(i) > t.first) {
            t.second = t.first;
            t.first = v(i);
            t.first_at = i;
        } else if (v(i) > t.second) {
            t.second = v(i);
        }
    }
    return t;
}

/// ||Sigma_{U,-j}||_2 for diagonal Sigma_u: max diagonal entry with j removed.
double spec_norm_minus(const Top2& t, const Vector& diag, Index j) {
    return (j == t.first_at) ? (diag.size() > 1 ? t.second : 0.0) : t.first;
}

}  // namespace

void FactorModelParams::validate() const {
    const Index K = k(), P = p();
    if (K < 1) throw Error("factor model: K must be >= 1");
    if (sigma_f.rows() != K || sigma_f.cols() != K) {
        throw ShapeMismatchError("factor model: sigma_f must be K x K");
    }
    if (mu_f.size() != K) throw ShapeMismatchError("factor model: mu_f must have length K");
    if (sigma_u_diag.size() != P) {
        throw ShapeMismatchError("factor model: sigma_u_diag must have length p");
    }
    if (!(K < P - 1)) throw Error("factor model: requires K < p - 1");
    require_finite(loadings, "factor model loadings");
    require_finite(sigma_f, "factor model sigma_f");
    require_finite(mu_f, "factor model mu_f");
    require_finite(sigma_u_diag, "factor model sigma_u_diag");
    if ((sigma_u_diag.array() <= 0.0).any()) {
        throw NotPositiveDefiniteError("factor model: sigma_u diagonal must be > 0");
    }
    EigSym es = eig_sym(sigma_f);
    if (es.lambda(K - 1) <= 0.0) {
        throw NotPositiveDefiniteError("factor model: sigma_f is not positive definite");
    }
}

Matrix assemble_covariance(const FactorModelParams& params) {
    params.validate();
    Matrix sigma = params.loadings.transpose() * params.sigma_f * params.loadings;
    sigma.diagonal() += params.sigma_u_diag;
    return 0.5 * (sigma + sigma.transpose());
}

Matrix precision_direct(const Matrix& sigma) {
    require_finite(sigma, "precision_direct");
    const Index p = sigma.rows();
    if (sigma.cols() != p) throw ShapeMismatchError("precision_direct: sigma must be square");
    EigSym es = eig_sym(sigma, 1e-8);
    const double lmax = es.lambda(0), lmin = es.lambda(p - 1);
    if (lmin <= 0.0 || lmax / lmin > 1e12) {
        throw SingularSigmaError("precision_direct: condition number above 1e12");
    }
    Matrix theta = Eigen::LDLT<Matrix>(sigma).solve(Matrix::Identity(p, p));
    // One Newton refinement step if the solve residual is above contract.
    for (int pass = 0; pass < 2; ++pass) {
        const double resid = (theta * sigma - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
        if (resid <= 1e-8) break;
        if (pass == 1) throw SingularSigmaError("precision_direct: residual did not converge");
        theta = theta * (2.0 * Matrix::Identity(p, p) - sigma * theta);
    }
    return 0.5 * (theta + theta.transpose());
}

PopulationPrecision precision_lemma1(const FactorModelParams& params) {
    params.validate();
    const Index K = params.k(), p = params.p();
    const Matrix sf_half = sym_sqrt(params.sigma_f);
    const Matrix abar_all = sf_half * params.loadings;  // K x p; column j = abar_j

    PopulationPrecision out;
    out.theta = Matrix::Zero(p, p);
    out.tau_sq = Vector::Zero(p);
    out.alpha_star = Matrix::Zero(p, p - 1);

    Matrix abar_mj(p - 1, K);  // Abar_{-j}: rows are abar_m' for m != j
    Vector su_inv(p - 1);
    for (Index j = 0; j < p; ++j) {
        Index r = 0;
        for (Index m = 0; m < p; ++m) {
            if (m == j) continue;
            abar_mj.row(r) = abar_all.col(m).transpose();
            su_inv(r) = 1.0 / params.sigma_u_diag(m);
            ++r;
        }
        const Vector abar_j = abar_all.col(j);
        // Gbar_j = I_K + Abar'_{-j} Sigma_{U,-j}^{-1} Abar_{-j} (the only K x K solve).
        Matrix gbar = Matrix::Identity(K, K) +
                      abar_mj.transpose() * su_inv.asDiagonal() * abar_mj;
        Vector ginv_abar = Eigen::LLT<Matrix>(gbar).solve(abar_j);
        Vector alpha = su_inv.asDiagonal() * (abar_mj * ginv_abar);
        const double tau_sq = (abar_j.squaredNorm() + params.sigma_u_diag(j)) -
                              (abar_mj * abar_j).dot(alpha);
        if (tau_sq <= kTauFloor) {
            throw DegenerateTauError("precision_lemma1: tau^2 at or below floor at row " +
                                         std::to_string(j),
                                     j, tau_sq);
        }
        out.tau_sq(j) = tau_sq;
        out.alpha_star.row(j) = alpha.transpose();
        out.theta(j, j) = 1.0 / tau_sq;
        Index c = 0;
        for (Index m = 0; m < p; ++m) {
            if (m == j) continue;
            out.theta(j, m) = -alpha(c) / tau_sq;
            ++c;
        }
    }
    return out;
}

Vector alpha_star(const FactorModelParams& params, Index j) {
    if (j < 0 || j >= params.p()) throw Error("alpha_star: row index out of range");
    PopulationPrecision pop = precision_lemma1(params);
    return pop.alpha_star.row(j).transpose();
}

DiagnosticsBundle snr(const FactorModelParams& params) {
    params.validate();
    const Index K = params.k(), p = params.p();
    const Matrix sf_half = sym_sqrt(params.sigma_f);
    const Matrix aat = params.loadings * params.loadings.transpose();  // K x K

    DiagnosticsBundle out;
    out.xi = Vector::Zero(p);
    const Top2 t2 = top2(params.sigma_u_diag);
    out.delta_n = std::numeric_limits<double>::infinity();
    out.r_n = 0.0;
    out.d1n = 0.0;
    out.d2n = 0.0;

    for (Index j = 0; j < p; ++j) {
        const Vector aj = params.loadings.col(j);
        // A_{-j}' A_{-j} is the rank-one downdate of A A'.
        Matrix gram_mj = aat - aj * aj.transpose();
        const double noise = spec_norm_minus(t2, params.sigma_u_diag, j);
        // lambda_K(A_{-j} Sigma_f A_{-j}') equals the smallest eigenvalue of
        // the K x K matrix Sigma_f^{1/2} A_{-j}' A_{-j} Sigma_f^{1/2}.
        EigSym es = eig_sym(sf_half * gram_mj * sf_half, 1e-8);
        const double lam_k = es.lambda(K - 1);
        if (lam_k <= kLoadingRankTol) {
            throw RankDeficientLoadingsError(
                "snr: A_{-j} Sigma_f A_{-j}' rank deficient at row " + std::to_string(j));
        }
        out.xi(j) = lam_k / noise;
        out.delta_n = std::min(out.delta_n, noise);
        out.r_n = std::max(out.r_n, noise);
        out.d1n = std::max(out.d1n, std::sqrt(std::max(0.0, eig_sym(gram_mj, 1e-8).lambda(0))));
        const Vector w = params.sigma_f * aj;  // a_j' Sigma_f A_{-j}' as a quadratic form
        const double d2_sq = w.dot(gram_mj * w);
        out.d2n = std::max(out.d2n, std::sqrt(std::max(0.0, d2_sq)));
    }
    out.xi_bar = out.xi.minCoeff();
    return out;
}

RateBounds rate_bounds(double k_factors, double n, double xi_bar, double delta_n,
                       double r_bar, double eta_bar, double psi_bar) {
    if (k_factors <= 0 || n <= 0 || xi_bar <= 0 || delta_n <= 0 || r_bar <= 0 ||
        eta_bar <= 0 || psi_bar < 0) {
        throw Error("rate_bounds: inputs must be positive (psi_bar >= 0)");
    }
    const double t1 = std::sqrt((std::log(n) + r_bar) / (n * eta_bar));
    const double t2 = std::sqrt(k_factors / (xi_bar * delta_n));
    const double t3 = std::sqrt((k_factors / xi_bar) * (psi_bar / eta_bar) / delta_n);
    const double t4 = std::sqrt(k_factors / (xi_bar * eta_bar));
    RateBounds out;
    out.r_w1 = std::max({t1, t2, t3, t4});
    out.r_w2 = std::max(out.r_w1, std::sqrt(k_factors / xi_bar));
    return out;
}

}  // namespace precim
