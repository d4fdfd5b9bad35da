#include <atomic>
#include <cstdlib>
#include <cstring>

#include "fwq/errors.hpp"
#include "fwq/simd.hpp"

namespace fwq::simd {

#ifndef FWQ_HAVE_AVX2
namespace avx2 {
// Stubs for builds without the AVX2 translation unit; never selected.
void solv_norms(double l, const double* t, const double* vx, const double* vy, const double* vt, double* o,
                std::size_t n) {
  scalar::solv_norms(l, t, vx, vy, vt, o, n);
}
void quad_norms(const double* g, const double* v, double* o, std::size_t n) { scalar::quad_norms(g, v, o, n); }
}  // namespace avx2
#endif

namespace {

Backend detect() {
  const char* env = std::getenv("FWQ_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Backend::scalar;
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

std::atomic<int>& slot() {
  static std::atomic<int> b{int(detect())};
  return b;
}

}  // namespace

bool avx2_available() {
#if defined(FWQ_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return Backend(slot().load(std::memory_order_relaxed)); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_available()) throw Error(Errc::DomainError, "AVX2 backend not available");
  slot().store(int(b), std::memory_order_relaxed);
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

void solv_norms(double log_lambda, const double* t, const double* vx, const double* vy, const double* vt,
                double* out, std::size_t n) {
  if (active_backend() == Backend::avx2) avx2::solv_norms(log_lambda, t, vx, vy, vt, out, n);
  else scalar::solv_norms(log_lambda, t, vx, vy, vt, out, n);
}

void quad_norms(const double* g, const double* v, double* out, std::size_t n) {
  if (active_backend() == Backend::avx2) avx2::quad_norms(g, v, out, n);
  else scalar::quad_norms(g, v, out, n);
}

}  // namespace fwq::simd
