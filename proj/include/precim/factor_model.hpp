#pragma once

#include "precim/linalg.hpp"

namespace precim {

/// Population parameters of the hidden-factor data model. `loadings` is
/// K x p (column j holds asset j's loading vector), `sigma_u_diag` the
/// diagonal of the (diagonal) error covariance.
struct FactorModelParams {
    Matrix loadings;     // K x p
    Matrix sigma_f;      // K x K, symmetric positive definite
    Vector mu_f;         // K
    Vector sigma_u_diag; // p, entries > 0

    Index k() const { return loadings.rows(); }
    Index p() const { return loadings.cols(); }

    /// Checks shapes, SPD of sigma_f, positivity of sigma_u, and K < p-1.
    void validate() const;
};

/// Sigma = A' Sigma_f A + Sigma_u.
Matrix assemble_covariance(const FactorModelParams& params);

/// Theta = Sigma^{-1} by dense solve. Throws SingularSigmaError when the
/// condition number exceeds 1e12 or the residual cannot be driven below
/// 1e-8 by refinement.
Matrix precision_direct(const Matrix& sigma);

struct PopulationPrecision {
    Matrix theta;       // p x p, rows assembled from (tau_sq, alpha_star)
    Vector tau_sq;      // p
    Matrix alpha_star;  // p x (p-1); row j is alpha*_j'
};

/// Row-wise population precision matrix from the closed-form factor
/// expressions: tau_j^2 and alpha*_j are built from abar_j = Sigma_f^{1/2} a_j,
/// Abar_{-j} = A_{-j} Sigma_f^{1/2} and Gbar_j = I_K + Abar'_{-j} Sigma_{U,-j}^{-1} Abar_{-j},
/// then stacked as theta(j,j) = 1/tau_j^2, theta(j,-j) = -alpha*_j'/tau_j^2.
PopulationPrecision precision_lemma1(const FactorModelParams& params);

/// Population regression coefficient of asset j on the others,
/// Sigma_{-j,-j}^{-1} Sigma_{-j,j}, computed through the factor structure.
/// j is 0-based.
Vector alpha_star(const FactorModelParams& params, Index j);

/// Signal-to-noise diagnostics.
struct DiagnosticsBundle {
    Vector xi;      // per-asset signal-to-noise ratios
    double xi_bar;  // min_j xi_j
    double delta_n; // min_j ||Sigma_{U,-j}||_2
    double r_n;     // max_j ||Sigma_{U,-j}||_2
    double d1n;     // max_j ||A_{-j}||_2
    double d2n;     // max_j ||a_j' Sigma_f A_{-j}'||_2
};

DiagnosticsBundle snr(const FactorModelParams& params);

struct RateBounds {
    double r_w1;
    double r_w2;
};

/// Off-diagonal estimation-error rates from the scalar complexity inputs.
RateBounds rate_bounds(double k_factors, double n, double xi_bar, double delta_n,
                       double r_bar, double eta_bar, double psi_bar);

}  // namespace precim
