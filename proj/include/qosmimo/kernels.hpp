#pragma once

// Inner-loop kernels over interleaved std::complex<double> arrays.
//
// Every kernel has a portable scalar reference in kernels::scalar and an
// AVX2/FMA variant in kernels::avx2. The unqualified entry points dispatch
// once, at first use, to the best variant the CPU supports. Setting the
// environment variable QOSMIMO_ISA=scalar pins the reference path.

#include <complex>
#include <cstddef>
#include <string_view>

namespace qosmimo::kernels {

using cdouble = std::complex<double>;

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Overrides dispatch for the whole process. Throws UsageError if unsupported.
void set_isa(Isa isa);

/// sum_i conj(a_i) * b_i
cdouble dot(const cdouble* a, const cdouble* b, std::size_t n);
/// |a^H b|^2
double dot_abs2(const cdouble* a, const cdouble* b, std::size_t n);
/// ||a||^2
double norm2(const cdouble* a, std::size_t n);
/// out[j] = |a^H b_j|^2 for `count` vectors laid out with stride `stride`.
void dot_abs2_batch(const cdouble* a, const cdouble* b, std::size_t n, std::size_t stride,
                    std::size_t count, double* out);

namespace scalar {
cdouble dot(const cdouble* a, const cdouble* b, std::size_t n);
double norm2(const cdouble* a, std::size_t n);
}  // namespace scalar

namespace avx2 {
cdouble dot(const cdouble* a, const cdouble* b, std::size_t n);
double norm2(const cdouble* a, std::size_t n);
}  // namespace avx2

}  // namespace qosmimo::kernels
