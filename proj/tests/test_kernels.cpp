#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "imb/errors.hpp"
#include "imb/kernels.hpp"
#include "imb/parallel.hpp"

using namespace imb;

namespace {

std::vector<double> draw(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double magnitude_sum(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
  return s;
}

}  // namespace

TEST_CASE("scalar reference kernels") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(kernels::scalar::dot(a.data(), b.data(), 3) == 32.0);
  CHECK(kernels::scalar::squared_distance(a.data(), b.data(), 3) == 27.0);
  std::vector<double> y{1, 1, 1};
  kernels::scalar::axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
}

TEST_CASE("span entry points reject length mismatches") {
  const std::vector<double> a{1, 2, 3}, b{4, 5};
  std::vector<double> y{0, 0};
  CHECK_THROWS_AS(kernels::dot(a, b), DimensionError);
  CHECK_THROWS_AS(kernels::squared_distance(a, b), DimensionError);
  CHECK_THROWS_AS(kernels::axpy(1.0, a, y), DimensionError);
}

#if IMB_HAVE_AVX2_KERNELS
TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!kernels::backend_available(kernels::Backend::avx2)) return;
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 64u, 1000u, 1027u}) {
    const auto a = draw(n, rng), b = draw(n, rng);
    const double tol = 1e-14 * (magnitude_sum(a, b) + 1.0);
    CHECK(std::abs(kernels::avx2::dot(a.data(), b.data(), n) - kernels::scalar::dot(a.data(), b.data(), n)) <= tol);
    double sq_mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq_mag += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(std::abs(kernels::avx2::squared_distance(a.data(), b.data(), n) -
                   kernels::scalar::squared_distance(a.data(), b.data(), n)) <= 1e-14 * (sq_mag + 1.0));
    auto y1 = draw(n, rng);
    auto y2 = y1;
    kernels::avx2::axpy(0.37, a.data(), y1.data(), n);
    kernels::scalar::axpy(0.37, a.data(), y2.data(), n);
    CHECK(y1 == y2);  // bit-identical
  }
}

TEST_CASE("backend can be switched at runtime") {
  const auto original = kernels::active_backend();
  const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 4, 3, 2, 1};
  kernels::set_backend(kernels::Backend::scalar);
  CHECK(kernels::active_backend() == kernels::Backend::scalar);
  const double s = kernels::dot(a, b);
  if (kernels::backend_available(kernels::Backend::avx2)) {
    kernels::set_backend(kernels::Backend::avx2);
    CHECK(kernels::dot(a, b) == s);  // small integers: exact in any order
  }
  kernels::set_backend(original);
  CHECK(kernels::backend_name(kernels::Backend::avx2) == "avx2");
}
#endif

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw NumericError("boom");
                  }),
                  NumericError);
  CHECK(thread_budget() >= 1);
}
