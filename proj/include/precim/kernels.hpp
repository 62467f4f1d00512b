#pragma once

#include <cstddef>

// Data-parallel inner-loop primitives.
//
// Every kernel has a scalar reference implementation (namespace
// kernels::scalar, strict left-to-right accumulation order) and, on x86-64,
// an AVX2/FMA variant compiled in its own translation unit. The top-level
// functions dispatch once at startup to the best variant the running CPU
// supports; PRECIM_KERNELS=scalar in the environment forces the reference
// path. SIMD variants reassociate reductions, so they are equivalence-tested
// against the scalar kernels at ~1e-12 relative tolerance rather than
// bit-for-bit.

namespace precim::kernels {

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sum_sq)(const double*, std::size_t);
    double (*sum_abs)(const double*, std::size_t);
    double (*sum_abs_diff)(const double*, const double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
    double (*max_abs_diff)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double*, double, std::size_t);
    void (*acc_sq_diff)(double*, const double*, const double*, std::size_t);
    double (*secular_sum)(const double*, const double*, double, std::size_t);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double sum_abs(const double* a, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double max_abs(const double* a, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
/// acc[i] += (a[i] - b[i])^2
void acc_sq_diff(double* acc, const double* a, const double* b, std::size_t n);
/// sum_i c_sq[i] / (lam[i] - mu); the secular-function resolvent sum.
double secular_sum(const double* c_sq, const double* lam, double mu, std::size_t n);
}  // namespace scalar

#ifdef PRECIM_HAVE_AVX2_TU
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double sum_abs(const double* a, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double max_abs(const double* a, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
void acc_sq_diff(double* acc, const double* a, const double* b, std::size_t n);
double secular_sum(const double* c_sq, const double* lam, double mu, std::size_t n);
}  // namespace avx2
#endif

/// Table of the kernels selected for this process.
const KernelTable& active();

/// Name of the selected variant ("scalar" or "avx2").
const char* active_isa_name();

// Dispatched entry points.
inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sum(const double* a, std::size_t n) { return active().sum(a, n); }
inline double sum_sq(const double* a, std::size_t n) { return active().sum_sq(a, n); }
inline double sum_abs(const double* a, std::size_t n) { return active().sum_abs(a, n); }
inline double sum_abs_diff(const double* a, const double* b, std::size_t n) { return active().sum_abs_diff(a, b, n); }
inline double max_abs(const double* a, std::size_t n) { return active().max_abs(a, n); }
inline double max_abs_diff(const double* a, const double* b, std::size_t n) { return active().max_abs_diff(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void scale(double* x, double alpha, std::size_t n) { active().scale(x, alpha, n); }
inline void acc_sq_diff(double* acc, const double* a, const double* b, std::size_t n) { active().acc_sq_diff(acc, a, b, n); }
inline double secular_sum(const double* c_sq, const double* lam, double mu, std::size_t n) { return active().secular_sum(c_sq, lam, mu, n); }

}  // namespace precim::kernels
