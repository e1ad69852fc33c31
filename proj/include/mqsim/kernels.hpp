#pragma once

#include <cstdint>
#include <span>
#include <string_view>

// Dense/sparse arithmetic kernels under everything else in the library.
//
// Two lanes: a scalar reference lane and an AVX2 lane selected at runtime
// (cpuid), overridable via set_backend() or the MQSIM_KERNELS environment
// variable ("scalar" / "avx2"). Elementwise kernels (axpy, axpby, scale)
// are bitwise identical across lanes because neither uses FMA. Reductions
// (dot, nrm2, spmv) differ only in summation order: the scalar lane sums
// left to right; the AVX2 lane keeps four partial sums per 256-bit
// accumulator and folds them low-to-high before adding the tail, so each
// lane is bitwise deterministic run-to-run. All kernels are serial.

namespace mqsim::kernels {

enum class Backend { scalar, avx2 };

/// Backend currently in use (resolved on first call).
Backend active_backend();

/// True if the requested backend is available on this machine.
bool backend_available(Backend b);

/// Switch lanes; returns false (and keeps the current lane) if unavailable.
bool set_backend(Backend b);

std::string_view backend_name(Backend b);

/// <x, y>
double dot(std::span<const double> x, std::span<const double> y);

/// 2-norm, computed as sqrt(dot(x, x)).
double nrm2(std::span<const double> x);

/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

/// y = a * x + b * y
void axpby(double a, std::span<const double> x, double b, std::span<double> y);

/// x *= a
void scale(double a, std::span<double> x);

/// y = A x for a CSR matrix given by raw arrays; row i sums its entries
/// in stored (ascending-column) order.
void spmv_csr(std::int32_t n_rows, const std::int64_t* row_ptr, const std::int32_t* col_idx,
              const double* values, const double* x, double* y);

}  // namespace mqsim::kernels
