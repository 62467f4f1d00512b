#pragma once

#include <string>
#include <vector>

#include "precim/linalg.hpp"

namespace precim {

enum class Method {
    rre,                    // B = I: OLS below n, minimum-norm interpolator above
    pcr_fixed,              // B = top k_fixed eigenvectors of Y'_{-j}Y_{-j}/n
    pcr_adaptive_feasible,  // per-row k from the singular-value threshold rule
    pcr_elbow_oracle,       // per-row k from the elbow rule (needs true Sigma_u)
};

std::string method_name(Method m);

struct EstimatorSpec {
    Method method = Method::rre;
    Index k_fixed = 0;       // pcr_fixed only
    double kappa = 2.0;      // feasible selection, > 1
    double c0 = 2.0;         // elbow threshold constant, > 1
    double c_delta = 2.0;    // elbow Delta constant, > 1
    bool demean = false;     // subtract in-sample column means first
    bool symmetrize = false; // return (Theta + Theta')/2
    double tau_floor = 1e-10;

    void validate() const;
};

struct Complexity {
    Index r_hat = 0;       // rank of the projected design Y_{-j} P_B
    double eta_hat = 0.0;  // smallest retained squared singular value / n
    double psi_hat = 0.0;  // largest discarded squared singular value / n
};

struct RowFit {
    Vector alpha;        // p-1 regression coefficients
    double tau_sq = 0.0; // diagonal reciprocal estimate
    Index k_used = 0;    // rank of the B actually used
    Complexity complexity;
    bool interpolated = false; // diagonal came from the interpolating estimator
};

struct PrecisionEstimate {
    Matrix theta;  // p x p
    std::vector<RowFit> rows;
    EstimatorSpec spec;
    Index n = 0;
    Index p = 0;
    bool interpolating = false; // any row used the interpolating diagonal
};

/// One row of the general linear class: alpha = B (Y_{-j} B)^+ y_j,
/// tau^2 = y_j'(y_j - Y_{-j} alpha)/n, plus the complexity triple of the
/// projected design. Throws DegenerateTauError when tau^2 falls at or below
/// spec.tau_floor (interpolating designs do this by construction; the caller
/// decides how to proceed). j is 0-based.
RowFit fit_row_general(const Matrix& y, Index j, const Matrix& b,
                       const EstimatorSpec& spec);

/// Diagonal estimate for interpolating rows: y_j'y_j / n.
double tau_interpolating(const Vector& y_j);

/// Data-driven factor count via the singular-value threshold rule.
Index select_k_feasible(const Matrix& y_minus, double kappa);

/// Oracle elbow rule; needs the true leave-one-out error covariance diagonal.
Index select_k_elbow(const Matrix& y_minus, const Vector& sigma_u_minus_diag,
                     double c0, double c_delta);

/// Full precision-matrix estimate. `sigma_u_diag` (length p) is required for
/// the elbow-oracle method and ignored otherwise. Rows are fanned out over
/// `threads` workers (0 = auto); results do not depend on the worker count.
PrecisionEstimate estimate_precision(const Matrix& y, const EstimatorSpec& spec,
                                     const Vector* sigma_u_diag = nullptr,
                                     int threads = 0);

/// Estimate several specs on one panel while sharing the per-row spectral
/// work. Equivalent to calling estimate_precision per spec.
std::vector<PrecisionEstimate> estimate_precision_multi(
    const Matrix& y, const std::vector<EstimatorSpec>& specs,
    const Vector* sigma_u_diag = nullptr, int threads = 0);

}  // namespace precim
