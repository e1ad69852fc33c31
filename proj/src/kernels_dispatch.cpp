#include "mqsim/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string_view>

namespace mqsim::kernels {

namespace detail {

double dot_scalar(std::span<const double>, std::span<const double>);
void axpy_scalar(double, std::span<const double>, std::span<double>);
void axpby_scalar(double, std::span<const double>, double, std::span<double>);
void scale_scalar(double, std::span<double>);
void spmv_csr_scalar(std::int32_t, const std::int64_t*, const std::int32_t*, const double*,
                     const double*, double*);

#ifdef MQSIM_HAVE_AVX2
double dot_avx2(std::span<const double>, std::span<const double>);
void axpy_avx2(double, std::span<const double>, std::span<double>);
void axpby_avx2(double, std::span<const double>, double, std::span<double>);
void scale_avx2(double, std::span<double>);
void spmv_csr_avx2(std::int32_t, const std::int64_t*, const std::int32_t*, const double*,
                   const double*, double*);
#endif

}  // namespace detail

namespace {

struct KernelTable {
    double (*dot)(std::span<const double>, std::span<const double>);
    void (*axpy)(double, std::span<const double>, std::span<double>);
    void (*axpby)(double, std::span<const double>, double, std::span<double>);
    void (*scale)(double, std::span<double>);
    void (*spmv)(std::int32_t, const std::int64_t*, const std::int32_t*, const double*,
                 const double*, double*);
};

constexpr KernelTable kScalarTable{detail::dot_scalar, detail::axpy_scalar, detail::axpby_scalar,
                                   detail::scale_scalar, detail::spmv_csr_scalar};

#ifdef MQSIM_HAVE_AVX2
constexpr KernelTable kAvx2Table{detail::dot_avx2, detail::axpy_avx2, detail::axpby_avx2,
                                 detail::scale_avx2, detail::spmv_csr_avx2};
#endif

struct Dispatch {
    Backend backend;
    const KernelTable* table;

    Dispatch() {
        backend = Backend::scalar;
        table = &kScalarTable;
#ifdef MQSIM_HAVE_AVX2
        if (__builtin_cpu_supports("avx2")) {
            backend = Backend::avx2;
            table = &kAvx2Table;
        }
#endif
        if (const char* env = std::getenv("MQSIM_KERNELS")) {
            const std::string_view want(env);
            if (want == "scalar") {
                backend = Backend::scalar;
                table = &kScalarTable;
            }
#ifdef MQSIM_HAVE_AVX2
            else if (want == "avx2" && __builtin_cpu_supports("avx2")) {
                backend = Backend::avx2;
                table = &kAvx2Table;
            }
#endif
        }
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
#ifdef MQSIM_HAVE_AVX2
    if (b == Backend::avx2) return __builtin_cpu_supports("avx2");
#endif
    return false;
}

bool set_backend(Backend b) {
    if (!backend_available(b)) return false;
    Dispatch& d = dispatch();
    d.backend = b;
    d.table = &kScalarTable;
#ifdef MQSIM_HAVE_AVX2
    if (b == Backend::avx2) d.table = &kAvx2Table;
#endif
    return true;
}

std::string_view backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

double dot(std::span<const double> x, std::span<const double> y) {
    return dispatch().table->dot(x, y);
}

double nrm2(std::span<const double> x) { return std::sqrt(dispatch().table->dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
    dispatch().table->axpy(a, x, y);
}

void axpby(double a, std::span<const double> x, double b, std::span<double> y) {
    dispatch().table->axpby(a, x, b, y);
}

void scale(double a, std::span<double> x) { dispatch().table->scale(a, x); }

void spmv_csr(std::int32_t n_rows, const std::int64_t* row_ptr, const std::int32_t* col_idx,
              const double* values, const double* x, double* y) {
    dispatch().table->spmv(n_rows, row_ptr, col_idx, values, x, y);
}

}  // namespace mqsim::kernels
