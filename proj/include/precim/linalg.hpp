#pragma once

#include <Eigen/Dense>

#include "precim/errors.hpp"

namespace precim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Throws NonFiniteError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

/// Thin SVD, singular values sorted descending.
struct SvdResult {
    Matrix u;   // rows x min(rows, cols), orthonormal columns
    Vector s;   // min(rows, cols), non-increasing, >= 0
    Matrix vt;  // min(rows, cols) x cols, orthonormal rows
};

SvdResult svd(const Matrix& m);

/// Rank cutoff used when none is given: eps * max(rows, cols), relative to
/// the largest singular value.
double default_pinv_rtol(Index rows, Index cols);

/// Moore-Penrose pseudoinverse. Singular values <= rtol * s_max are treated
/// as zero.
Matrix pinv(const Matrix& m, double rtol);
Matrix pinv(const Matrix& m);

/// Symmetric eigendecomposition, eigenvalues sorted descending.
struct EigSym {
    Vector lambda;  // descending
    Matrix q;       // columns are the matching eigenvectors
};

/// `symmetric_tol` bounds the allowed asymmetry max|S - S'| relative to
/// max|S|; violation raises NotSymmetricError.
EigSym eig_sym(const Matrix& s, double symmetric_tol = 1e-10);

/// Columns spanning the invariant subspace of the k largest eigenvalues.
/// Each column's sign is canonicalized so its first nonzero entry is
/// positive, making repeated runs bit-identical on one platform.
Matrix top_k_eigvecs(const Matrix& s, Index k);

/// Symmetric positive (semi-)definite square root via eigendecomposition.
Matrix sym_sqrt(const Matrix& s);

/// i-th largest eigenvalue (0-based) of Q diag(lam) Q' - y y', given the
/// eigenvalues `lam` (descending) of the original matrix and c = Q'y.
/// Solved from the secular equation by bisection inside the interlacing
/// bracket; only eigenvalues are produced, so clustered spectra are safe.
double downdated_eigenvalue(const Vector& lam, const Vector& c, Index i);

}  // namespace precim
