#include "mqsim/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace mqsim::kernels::detail {

double dot_scalar(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_scalar(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, std::span<const double> x, double b, std::span<double> y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale_scalar(double a, std::span<double> x) {
    for (double& v : x) v *= a;
}

void spmv_csr_scalar(std::int32_t n_rows, const std::int64_t* row_ptr, const std::int32_t* col_idx,
                     const double* values, const double* x, double* y) {
    for (std::int32_t r = 0; r < n_rows; ++r) {
        double s = 0.0;
        for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            s += values[k] * x[col_idx[k]];
        }
        y[r] = s;
    }
}

}  // namespace mqsim::kernels::detail
