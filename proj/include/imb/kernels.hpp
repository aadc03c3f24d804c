#pragma once

// Data-parallel inner loops shared by the dense layers, neighbour searches and t-SNE.
//
// Every kernel has a portable scalar reference in kernels::scalar and, on x86-64, an
// AVX2/FMA variant in kernels::avx2. The public entry points dispatch through a table
// chosen once at start-up from CPUID, overridable with IMB_DPGM_KERNELS=scalar|avx2|auto
// or set_backend().
//
// axpy is bit-identical across backends (one rounding per lane, no contraction).
// dot and squared_distance reassociate the reduction, so the AVX2 results agree with the
// scalar reference to a few ulps of the summed magnitudes rather than bit-exactly.

#include <cstddef>
#include <span>
#include <string_view>

namespace imb::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Throws ContractError when the backend is not available on this CPU.
void set_backend(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define IMB_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#else
#define IMB_HAVE_AVX2_KERNELS 0
#endif

}  // namespace imb::kernels
