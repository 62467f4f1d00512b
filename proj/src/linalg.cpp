#include "precim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "precim/kernels.hpp"

namespace precim {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
}

SvdResult svd(const Matrix& m) {
    require_finite(m, "svd");
    const Index r = m.rows(), c = m.cols(), k = std::min(r, c);
    if (k == 0) {
        return SvdResult{Matrix::Zero(r, 0), Vector::Zero(0), Matrix::Zero(0, c)};
    }
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdResult out;
    out.u = dec.matrixU();
    out.s = dec.singularValues();
    out.vt = dec.matrixV().transpose();
    return out;
}

double default_pinv_rtol(Index rows, Index cols) {
    return std::numeric_limits<double>::epsilon() *
           static_cast<double>(std::max(rows, cols));
}

Matrix pinv(const Matrix& m, double rtol) {
    if (rtol < 0) throw Error("pinv: rtol must be >= 0");
    SvdResult d = svd(m);
    const Index k = d.s.size();
    if (k == 0) return Matrix::Zero(m.cols(), m.rows());
    const double cutoff = rtol * d.s(0);
    Vector inv = Vector::Zero(k);
    for (Index i = 0; i < k; ++i) {
        if (d.s(i) > cutoff && d.s(i) > 0.0) inv(i) = 1.0 / d.s(i);
    }
    return d.vt.transpose() * inv.asDiagonal() * d.u.transpose();
}

Matrix pinv(const Matrix& m) { return pinv(m, default_pinv_rtol(m.rows(), m.cols())); }

EigSym eig_sym(const Matrix& s, double symmetric_tol) {
    require_finite(s, "eig_sym");
    if (s.rows() != s.cols()) throw NotSymmetricError("eig_sym: matrix not square");
    const Index p = s.rows();
    if (p > 0) {
        const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
        const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
        if (asym > symmetric_tol * scale) {
            throw NotSymmetricError("eig_sym: asymmetry " + std::to_string(asym));
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
    if (es.info() != Eigen::Success) throw Error("eig_sym: eigensolver failed");
    EigSym out;
    out.lambda = es.eigenvalues().reverse();
    out.q = es.eigenvectors().rowwise().reverse();
    return out;
}

Matrix top_k_eigvecs(const Matrix& s, Index k) {
    if (k < 0) throw KTooLargeError("top_k_eigvecs: k < 0");
    if (k > s.rows()) {
        throw KTooLargeError("top_k_eigvecs: k=" + std::to_string(k) +
                             " exceeds dimension " + std::to_string(s.rows()));
    }
    if (k == 0) return Matrix::Zero(s.rows(), 0);
    EigSym es = eig_sym(s);
    Matrix v = es.q.leftCols(k);
    // Sign canonicalization: first nonzero entry of each column positive.
    for (Index c = 0; c < v.cols(); ++c) {
        for (Index r = 0; r < v.rows(); ++r) {
            if (v(r, c) != 0.0) {
                if (v(r, c) < 0.0) v.col(c) = -v.col(c);
                break;
            }
        }
    }
    return v;
}

Matrix sym_sqrt(const Matrix& s) {
    EigSym es = eig_sym(s);
    Vector root = es.lambda.cwiseMax(0.0).cwiseSqrt();
    return es.q * root.asDiagonal() * es.q.transpose();
}

double downdated_eigenvalue(const Vector& lam, const Vector& c, Index i) {
    const Index n = lam.size();
    if (n == 0 || i < 0 || i >= n) throw Error("downdated_eigenvalue: bad index");
    const double csq_total = kernels::sum_sq(c.data(), static_cast<std::size_t>(n));
    Vector c_sq = c.cwiseAbs2();

    const double hi = lam(i);
    const double lo = (i + 1 < n) ? lam(i + 1) : lam(n - 1) - csq_total;
    if (hi - lo <= 0.0) return hi;

    // f(mu) = 1 - sum c_j^2/(lam_j - mu), strictly decreasing between poles:
    // f -> +inf at lo+, f -> -inf at hi-. Bisect on the open interval.
    double a = lo, b = hi;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 0; it < 140; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double f = 1.0 - kernels::secular_sum(c_sq.data(), lam.data(), mid,
                                                    static_cast<std::size_t>(n));
        if (f > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a <= 8.0 * eps * std::max({std::fabs(a), std::fabs(b), 1e-30})) break;
    }
    return 0.5 * (a + b);
}

}  // namespace precim
