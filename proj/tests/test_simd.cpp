#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fwq/errors.hpp"
#include "fwq/metric_engine.hpp"
#include "fwq/simd.hpp"

using namespace fwq;

namespace {

struct Batch {
  std::vector<double> t, vx, vy, vt, g, v;
};

Batch random_batch(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> T(-30, 30);
  std::normal_distribution<double> N(0, 1);
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.t.push_back(T(rng));
    b.vx.push_back(N(rng));
    b.vy.push_back(N(rng));
    b.vt.push_back(N(rng));
    // G = A^T A + I is positive definite
    Mat3 A;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = N(rng);
    const Mat3 G = A.transpose() * A + Mat3::Identity();
    for (double x : {G(0, 0), G(0, 1), G(0, 2), G(1, 1), G(1, 2), G(2, 2)}) b.g.push_back(x);
    for (int k = 0; k < 3; ++k) b.v.push_back(N(rng));
  }
  return b;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double w = 0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]) / std::max(1e-300, std::abs(a[i])));
  return w;
}

}  // namespace

TEST_CASE("scalar reference kernels match closed forms") {
  const double L = std::log(2.0);
  const double t[] = {1.0}, vx[] = {2.0}, vy[] = {3.0}, vt[] = {0.5};
  double out[1];
  simd::scalar::solv_norms(L, t, vx, vy, vt, out, 1);
  CHECK(out[0] == doctest::Approx(std::sqrt(4.0 / 4.0 + 9.0 * 4.0 + 0.25)).epsilon(1e-15));
  const double g[] = {1, 0, 0, 4, 0, 9}, v[] = {1, 1, 1};
  simd::scalar::quad_norms(g, v, out, 1);
  CHECK(out[0] == doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!simd::avx2_available()) {
    MESSAGE("AVX2 not available; equivalence skipped");
    return;
  }
  const double L = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  // sizes around the vector width exercise the scalar tail
  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 13u, 1000u}) {
    const Batch b = random_batch(n, 100 + n);
    std::vector<double> s(n), a(n);
    simd::scalar::solv_norms(L, b.t.data(), b.vx.data(), b.vy.data(), b.vt.data(), s.data(), n);
    simd::avx2::solv_norms(L, b.t.data(), b.vx.data(), b.vy.data(), b.vt.data(), a.data(), n);
    CHECK(max_rel(s, a) < 1e-13);
    simd::scalar::quad_norms(b.g.data(), b.v.data(), s.data(), n);
    simd::avx2::quad_norms(b.g.data(), b.v.data(), a.data(), n);
    CHECK(max_rel(s, a) < 1e-13);
  }
}

TEST_CASE("backend switch leaves lengths unchanged") {
  const auto da = std::make_shared<const DAMapModel>(DAMapModel::default_model());
  const MetricField g = MetricField::level(da);
  const MetricField s = MetricField::solv(da->lambda());
  Polyline3 p;
  p.points = {Vec3(0.01, 0.02, -0.5), Vec3(0.2, -0.1, 0.7), Vec3(-0.3, 0.4, 2.0), Vec3(0.05, 0.0, 3.1)};
  const simd::Backend before = simd::active_backend();
  simd::set_backend(simd::Backend::scalar);
  const double ls = length(p, s), lg = length(p, g);
  if (simd::avx2_available()) {
    simd::set_backend(simd::Backend::avx2);
    CHECK(length(p, s) == doctest::Approx(ls).epsilon(1e-12));
    CHECK(length(p, g) == doctest::Approx(lg).epsilon(1e-12));
  } else {
    CHECK_THROWS_AS(simd::set_backend(simd::Backend::avx2), Error);
  }
  simd::set_backend(before);
  CHECK(std::string(simd::backend_name(simd::Backend::avx2)) == "avx2");
}
