#pragma once

// Data-parallel kernels for the sample-major inner loops (columns of length n,
// n up to 10^6+). Scalar reference implementations live in kernels::scalar;
// vectorized variants (AVX2+FMA on x86-64, NEON on aarch64) are selected once
// at startup from CPU capabilities. All entry points are pure functions of
// their inputs; for a fixed build and machine the selected backend is stable,
// so results are reproducible run to run.

#include <cstddef>

namespace decon::kernels {

// Sum of x[0..n).
double sum(const double* x, std::size_t n);

// Inner product of x and y.
double dot(const double* x, const double* y, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// Sum of (a[i] - b[i])^2.
double sq_diff_sum(const double* a, const double* b, std::size_t n);

// x[i] *= a
void scale(double a, double* x, std::size_t n);

// Reference (scalar) versions, always available; the vectorized backends are
// equivalence-tested against these.
namespace scalar {
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sq_diff_sum(const double* a, const double* b, std::size_t n);
void scale(double a, double* x, std::size_t n);
}  // namespace scalar

enum class Backend { Scalar, Avx2, Neon };

// Backend currently bound to the dispatch table.
Backend active_backend();
const char* backend_name(Backend b);

// True if the given backend can run on this machine.
bool backend_available(Backend b);

// Rebind the dispatch table (no-op if unavailable; returns false then).
// Intended for equivalence tests and benchmarking.
bool force_backend(Backend b);

}  // namespace decon::kernels
