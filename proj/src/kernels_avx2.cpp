#ifdef MQSIM_HAVE_AVX2

#include "mqsim/kernels.hpp"

#include <immintrin.h>

#include <cstddef>

// AVX2 lane. Deliberately FMA-free so the elementwise kernels reproduce the
// scalar lane bit for bit; reductions fold the 4-lane accumulator
// low-to-high, then append the scalar tail.

namespace mqsim::kernels::detail {

namespace {

inline double reduce_add_pd(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    // (lo0 + lo1) + (hi0 + hi1), each pair summed low-to-high
    const double a = _mm_cvtsd_f64(lo);
    const double b = _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
    const double c = _mm_cvtsd_f64(hi);
    const double d = _mm_cvtsd_f64(_mm_unpackhi_pd(hi, hi));
    return (a + b) + (c + d);
}

}  // namespace

double dot_avx2(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    const double* py = y.data();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(px + i);
        const __m256d vy = _mm256_loadu_pd(py + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(vx, vy));
    }
    double s = reduce_add_pd(acc);
    for (; i < n; ++i) s += px[i] * py[i];
    return s;
}

void axpy_avx2(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    double* py = y.data();
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(px + i);
        const __m256d vy = _mm256_loadu_pd(py + i);
        _mm256_storeu_pd(py + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) py[i] += a * px[i];
}

void axpby_avx2(double a, std::span<const double> x, double b, std::span<double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    double* py = y.data();
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(px + i);
        const __m256d vy = _mm256_loadu_pd(py + i);
        _mm256_storeu_pd(py + i, _mm256_add_pd(_mm256_mul_pd(va, vx), _mm256_mul_pd(vb, vy)));
    }
    for (; i < n; ++i) py[i] = a * px[i] + b * py[i];
}

void scale_avx2(double a, std::span<double> x) {
    const std::size_t n = x.size();
    double* px = x.data();
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(px + i, _mm256_mul_pd(va, _mm256_loadu_pd(px + i)));
    }
    for (; i < n; ++i) px[i] *= a;
}

void spmv_csr_avx2(std::int32_t n_rows, const std::int64_t* row_ptr, const std::int32_t* col_idx,
                   const double* values, const double* x, double* y) {
    for (std::int32_t r = 0; r < n_rows; ++r) {
        const std::int64_t begin = row_ptr[r];
        const std::int64_t end = row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int64_t k = begin;
        for (; k + 4 <= end; k += 4) {
            const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col_idx + k));
            const __m256d vx = _mm256_i32gather_pd(x, idx, 8);
            const __m256d vv = _mm256_loadu_pd(values + k);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(vv, vx));
        }
        double s = reduce_add_pd(acc);
        for (; k < end; ++k) s += values[k] * x[col_idx[k]];
        y[r] = s;
    }
}

}  // namespace mqsim::kernels::detail

#endif  // MQSIM_HAVE_AVX2
