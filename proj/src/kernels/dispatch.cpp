#include <atomic>
#include <cstdlib>
#include <string>

#include "imb/errors.hpp"
#include "imb/kernels.hpp"

namespace imb::kernels {
namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
};

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::squared_distance};
#if IMB_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::squared_distance};
#endif

bool cpu_has_avx2() {
#if IMB_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  const bool avx2_ok = cpu_has_avx2();
  if (const char* env = std::getenv("IMB_DPGM_KERNELS")) {
    const std::string choice(env);
    if (choice == "scalar") return Backend::scalar;
    if (choice == "avx2" && avx2_ok) return Backend::avx2;
  }
  return avx2_ok ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

const KernelTable& table() {
#if IMB_HAVE_AVX2_KERNELS
  if (backend_slot().load(std::memory_order_relaxed) == Backend::avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b)
    throw DimensionError(std::string(op) + ": length mismatch " + std::to_string(a) + " vs " +
                         std::to_string(b));
}

}  // namespace

std::string_view backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) {
  return b == Backend::scalar || cpu_has_avx2();
}

Backend active_backend() { return backend_slot().load(); }

void set_backend(Backend b) {
  if (!backend_available(b))
    throw ContractError("kernels: backend " + std::string(backend_name(b)) +
                        " is not supported on this CPU");
  backend_slot().store(b);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  return table().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_length(x.size(), y.size(), "axpy");
  table().axpy(alpha, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "squared_distance");
  return table().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace imb::kernels
