#include <atomic>
#include <cstdlib>
#include <string>

#include "qosmimo/errors.hpp"
#include "qosmimo/kernels.hpp"

namespace qosmimo::kernels {

namespace {

struct Table {
  cdouble (*dot)(const cdouble*, const cdouble*, std::size_t);
  double (*norm2)(const cdouble*, std::size_t);
};

constexpr Table kScalar{&scalar::dot, &scalar::norm2};
constexpr Table kAvx2{&avx2::dot, &avx2::norm2};

Isa detect() {
  if (const char* env = std::getenv("QOSMIMO_ISA"); env && std::string(env) == "scalar") return Isa::kScalar;
  return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<const Table*>& table() {
  static std::atomic<const Table*> t{detect() == Isa::kAvx2 ? &kAvx2 : &kScalar};
  return t;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::kScalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return table().load() == &kAvx2 ? Isa::kAvx2 : Isa::kScalar; }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw UsageError("ISA " + std::string(isa_name(isa)) + " not supported on this CPU");
  table().store(isa == Isa::kAvx2 ? &kAvx2 : &kScalar);
}

cdouble dot(const cdouble* a, const cdouble* b, std::size_t n) { return table().load()->dot(a, b, n); }

double dot_abs2(const cdouble* a, const cdouble* b, std::size_t n) { return std::norm(dot(a, b, n)); }

double norm2(const cdouble* a, std::size_t n) { return table().load()->norm2(a, n); }

void dot_abs2_batch(const cdouble* a, const cdouble* b, std::size_t n, std::size_t stride, std::size_t count,
                    double* out) {
  const Table* t = table().load();
  for (std::size_t j = 0; j < count; ++j) out[j] = std::norm(t->dot(a, b + j * stride, n));
}

}  // namespace qosmimo::kernels
