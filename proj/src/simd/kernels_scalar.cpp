#include <algorithm>
#include <cmath>

#include "fwq/simd.hpp"

namespace fwq::simd::scalar {

void solv_norms(double log_lambda, const double* t, const double* vx, const double* vy,
                const double* vt, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(2.0 * t[i] * log_lambda);
    out[i] = std::sqrt(vx[i] * vx[i] / e + e * vy[i] * vy[i] + vt[i] * vt[i]);
  }
}

void quad_norms(const double* g, const double* v, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* G = g + 6 * i;
    const double x = v[3 * i], y = v[3 * i + 1], z = v[3 * i + 2];
    const double q = G[0] * x * x + G[3] * y * y + G[5] * z * z +
                     2.0 * (G[1] * x * y + G[2] * x * z + G[4] * y * z);
    out[i] = std::sqrt(std::max(q, 0.0));
  }
}

}  // namespace fwq::simd::scalar
