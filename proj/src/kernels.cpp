#include "decon/kernels.hpp"

#include <atomic>

#if defined(__x86_64__) || defined(_M_X64)
#define DECON_X86 1
#include <immintrin.h>
#else
#define DECON_X86 0
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
#define DECON_NEON 1
#include <arm_neon.h>
#else
#define DECON_NEON 0
#endif

namespace decon::kernels {

// ---------------------------------------------------------------------------
// Scalar reference kernels
// ---------------------------------------------------------------------------

namespace scalar {

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace scalar

// ---------------------------------------------------------------------------
// AVX2 + FMA kernels (4 lanes of f64, 2-way unrolled reductions)
// ---------------------------------------------------------------------------

#if DECON_X86

namespace avx2 {

__attribute__((target("avx2,fma"))) static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

__attribute__((target("avx2,fma"))) double sum(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

__attribute__((target("avx2,fma"))) double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

__attribute__((target("avx2,fma"))) void axpy(double a, const double* x, double* y,
                                              std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma"))) double sq_diff_sum(const double* a, const double* b,
                                                       std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

__attribute__((target("avx2,fma"))) void scale(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace avx2

#endif  // DECON_X86

// ---------------------------------------------------------------------------
// NEON kernels (2 lanes of f64)
// ---------------------------------------------------------------------------

#if DECON_NEON

namespace neon {

double sum(const double* x, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(x + i + 2));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) acc += x[i];
    return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double r = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r += d * d;
    }
    return r;
}

void scale(double a, double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace neon

#endif  // DECON_NEON

// ---------------------------------------------------------------------------
// Runtime dispatch
// ---------------------------------------------------------------------------

namespace {

struct Table {
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sq_diff_sum)(const double*, const double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
};

constexpr Table kScalarTable = {scalar::sum, scalar::dot, scalar::axpy, scalar::sq_diff_sum,
                                scalar::scale};

#if DECON_X86
const Table kAvx2Table = {avx2::sum, avx2::dot, avx2::axpy, avx2::sq_diff_sum, avx2::scale};
#endif
#if DECON_NEON
const Table kNeonTable = {neon::sum, neon::dot, neon::axpy, neon::sq_diff_sum, neon::scale};
#endif

Backend detect_backend() {
#if DECON_X86
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Backend::Avx2;
#endif
#if DECON_NEON
    return Backend::Neon;
#endif
    return Backend::Scalar;
}

const Table* table_for(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return &kScalarTable;
#if DECON_X86
        case Backend::Avx2:
            return &kAvx2Table;
#endif
#if DECON_NEON
        case Backend::Neon:
            return &kNeonTable;
#endif
        default:
            return nullptr;
    }
}

struct Dispatch {
    std::atomic<const Table*> table;
    std::atomic<Backend> backend;
    Dispatch() {
        const Backend b = detect_backend();
        backend.store(b);
        table.store(table_for(b));
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend.load(); }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return "scalar";
        case Backend::Avx2:
            return "avx2";
        case Backend::Neon:
            return "neon";
    }
    return "unknown";
}

bool backend_available(Backend b) {
    if (b == Backend::Scalar) return true;
#if DECON_X86
    if (b == Backend::Avx2)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#endif
#if DECON_NEON
    if (b == Backend::Neon) return true;
#endif
    return false;
}

bool force_backend(Backend b) {
    if (!backend_available(b)) return false;
    dispatch().table.store(table_for(b));
    dispatch().backend.store(b);
    return true;
}

double sum(const double* x, std::size_t n) { return dispatch().table.load()->sum(x, n); }

double dot(const double* x, const double* y, std::size_t n) {
    return dispatch().table.load()->dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    dispatch().table.load()->axpy(a, x, y, n);
}

double sq_diff_sum(const double* a, const double* b, std::size_t n) {
    return dispatch().table.load()->sq_diff_sum(a, b, n);
}

void scale(double a, double* x, std::size_t n) { dispatch().table.load()->scale(a, x, n); }

}  // namespace decon::kernels
