#pragma once
// Batched metric-norm kernels.  Each has a scalar reference and, on x86-64
// builds with AVX2/FMA, a vector variant picked at first use from CPUID.
// FWQ_SIMD=scalar in the environment forces the reference path.

#include <cstddef>

namespace fwq::simd {

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);  // throws DomainError if b is not available
bool avx2_available();
const char* backend_name(Backend b);

// out[i] = sqrt(exp(-2 t_i L) vx_i^2 + exp(2 t_i L) vy_i^2 + vt_i^2), L = log(lambda)
void solv_norms(double log_lambda, const double* t, const double* vx, const double* vy,
                const double* vt, double* out, std::size_t n);

// g holds 6 entries per item (xx, xy, xt, yy, yt, tt); v holds 3 per item.
// out[i] = sqrt(max(v^T G v, 0))
void quad_norms(const double* g, const double* v, double* out, std::size_t n);

namespace scalar {
void solv_norms(double log_lambda, const double* t, const double* vx, const double* vy,
                const double* vt, double* out, std::size_t n);
void quad_norms(const double* g, const double* v, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
void solv_norms(double log_lambda, const double* t, const double* vx, const double* vy,
                const double* vt, double* out, std::size_t n);
void quad_norms(const double* g, const double* v, double* out, std::size_t n);
}  // namespace avx2

}  // namespace fwq::simd
