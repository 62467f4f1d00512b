#include "precim/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace precim::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double sum_sq(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

double sum_abs(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i]);
    return acc;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

double max_abs(const double* a, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void acc_sq_diff(double* acc, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc[i] += d * d;
    }
}

double secular_sum(const double* c_sq, const double* lam, double mu, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += c_sq[i] / (lam[i] - mu);
    return acc;
}

}  // namespace scalar

namespace {

KernelTable make_scalar_table() {
    return KernelTable{
        &scalar::dot,          &scalar::sum,       &scalar::sum_sq,
        &scalar::sum_abs,      &scalar::sum_abs_diff,
        &scalar::max_abs,      &scalar::max_abs_diff,
        &scalar::axpy,         &scalar::scale,     &scalar::acc_sq_diff,
        &scalar::secular_sum,
    };
}

#ifdef PRECIM_HAVE_AVX2_TU
KernelTable make_avx2_table() {
    return KernelTable{
        &avx2::dot,          &avx2::sum,       &avx2::sum_sq,
        &avx2::sum_abs,      &avx2::sum_abs_diff,
        &avx2::max_abs,      &avx2::max_abs_diff,
        &avx2::axpy,         &avx2::scale,     &avx2::acc_sq_diff,
        &avx2::secular_sum,
    };
}

bool cpu_has_avx2_fma() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
#endif

struct Selection {
    KernelTable table;
    const char* name;
};

Selection select() {
    const char* forced = std::getenv("PRECIM_KERNELS");
    if (forced && std::strcmp(forced, "scalar") == 0) {
        return {make_scalar_table(), "scalar"};
    }
#ifdef PRECIM_HAVE_AVX2_TU
    if (cpu_has_avx2_fma() && !(forced && std::strcmp(forced, "avx2") != 0)) {
        return {make_avx2_table(), "avx2"};
    }
#endif
    return {make_scalar_table(), "scalar"};
}

const Selection& selection() {
    static const Selection s = select();
    return s;
}

}  // namespace

const KernelTable& active() { return selection().table; }

const char* active_isa_name() { return selection().name; }

}  // namespace precim::kernels
