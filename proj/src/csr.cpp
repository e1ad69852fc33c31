#include "mqsim/csr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mqsim/errors.hpp"
#include "mqsim/kernels.hpp"

namespace mqsim {

CsrMatrix CsrMatrix::from_triplets(std::int32_t n_rows, std::int32_t n_cols,
                                   std::span<const Triplet> entries) {
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
            throw DimensionError("triplet index out of range");
        }
    }
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (entries[a].row != entries[b].row) return entries[a].row < entries[b].row;
        return entries[a].col < entries[b].col;
    });

    CsrMatrix A(n_rows, n_cols);
    A.col_idx.reserve(entries.size());
    A.values.reserve(entries.size());
    std::int32_t current_row = 0;
    for (std::size_t n = 0; n < order.size(); ++n) {
        const Triplet& t = entries[order[n]];
        if (!A.values.empty() && current_row == t.row && A.col_idx.back() == t.col) {
            A.values.back() += t.value;
            continue;
        }
        while (current_row < t.row) A.row_ptr[++current_row] = static_cast<std::int64_t>(A.values.size());
        A.col_idx.push_back(t.col);
        A.values.push_back(t.value);
    }
    while (current_row < n_rows) A.row_ptr[++current_row] = static_cast<std::int64_t>(A.values.size());
    return A;
}

CsrMatrix CsrMatrix::identity(std::int32_t n) {
    CsrMatrix A(n, n);
    A.col_idx.resize(n);
    A.values.assign(n, 1.0);
    for (std::int32_t i = 0; i < n; ++i) {
        A.col_idx[i] = i;
        A.row_ptr[i + 1] = i + 1;
    }
    return A;
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
    CsrMatrix A = identity(static_cast<std::int32_t>(d.size()));
    std::copy(d.begin(), d.end(), A.values.begin());
    return A;
}

void CsrMatrix::apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<std::int32_t>(x.size()) != n_cols || static_cast<std::int32_t>(y.size()) != n_rows) {
        throw DimensionError("spmv: vector length does not match matrix dimensions");
    }
    kernels::spmv_csr(n_rows, row_ptr.data(), col_idx.data(), values.data(), x.data(), y.data());
}

Vector CsrMatrix::apply(std::span<const double> x) const {
    Vector y(static_cast<std::size_t>(n_rows));
    apply(x, y);
    return y;
}

Vector CsrMatrix::diagonal_vector() const {
    Vector d(static_cast<std::size_t>(std::min(n_rows, n_cols)), 0.0);
    for (std::int32_t r = 0; r < n_rows; ++r) {
        for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (col_idx[k] == r) d[r] = values[k];
        }
    }
    return d;
}

CsrMatrix CsrMatrix::transposed() const {
    CsrMatrix T(n_cols, n_rows);
    T.col_idx.resize(values.size());
    T.values.resize(values.size());
    std::vector<std::int64_t> count(n_cols + 1, 0);
    for (std::int32_t c : col_idx) ++count[c + 1];
    for (std::int32_t c = 0; c < n_cols; ++c) count[c + 1] += count[c];
    T.row_ptr.assign(count.begin(), count.end());
    std::vector<std::int64_t> next(count.begin(), count.end() - 1);
    for (std::int32_t r = 0; r < n_rows; ++r) {
        for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            const std::int64_t slot = next[col_idx[k]]++;
            T.col_idx[slot] = r;
            T.values[slot] = values[k];
        }
    }
    return T;
}

double CsrMatrix::max_asymmetry() const {
    if (n_rows != n_cols) throw DimensionError("max_asymmetry requires a square matrix");
    const CsrMatrix T = transposed();
    double worst = 0.0;
    for (std::int32_t r = 0; r < n_rows; ++r) {
        std::int64_t ka = row_ptr[r];
        std::int64_t kb = T.row_ptr[r];
        const std::int64_t ea = row_ptr[r + 1];
        const std::int64_t eb = T.row_ptr[r + 1];
        while (ka < ea || kb < eb) {
            const std::int32_t ca = ka < ea ? col_idx[ka] : n_cols;
            const std::int32_t cb = kb < eb ? T.col_idx[kb] : n_cols;
            if (ca == cb) {
                worst = std::max(worst, std::abs(values[ka] - T.values[kb]));
                ++ka;
                ++kb;
            } else if (ca < cb) {
                worst = std::max(worst, std::abs(values[ka]));
                ++ka;
            } else {
                worst = std::max(worst, std::abs(T.values[kb]));
                ++kb;
            }
        }
    }
    return worst;
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

void CsrMatrix::validate() const {
    if (static_cast<std::int32_t>(row_ptr.size()) != n_rows + 1) {
        throw DimensionError("row_ptr length must be n_rows + 1");
    }
    if (row_ptr.front() != 0) throw DimensionError("row_ptr[0] must be 0");
    if (row_ptr.back() != nnz() || col_idx.size() != values.size()) {
        throw DimensionError("row_ptr[n_rows] must equal nnz");
    }
    for (std::int32_t r = 0; r < n_rows; ++r) {
        if (row_ptr[r] > row_ptr[r + 1]) throw DimensionError("row_ptr must be non-decreasing");
        for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (col_idx[k] < 0 || col_idx[k] >= n_cols) throw DimensionError("column index out of range");
            if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
                throw DimensionError("column indices must strictly increase within a row");
            }
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DimensionError("matrix holds a non-finite value");
    }
}

Vector spmv(const CsrMatrix& A, std::span<const double> x) { return A.apply(x); }

}  // namespace mqsim
