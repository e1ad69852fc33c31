#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mqsim {

using Vector = std::vector<double>;

/// One entry of a COO assembly list; duplicates are summed on conversion.
struct Triplet {
    std::int32_t row;
    std::int32_t col;
    double value;
};

/// Compressed sparse row matrix, the only large-matrix representation here.
///
/// Invariants: row_ptr is non-decreasing with row_ptr[0] = 0 and
/// row_ptr[n_rows] = nnz; column indices strictly increase within a row;
/// all col_idx < n_cols. validate() checks all of them.
struct CsrMatrix {
    std::int32_t n_rows = 0;
    std::int32_t n_cols = 0;
    std::vector<std::int64_t> row_ptr;  // length n_rows + 1
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;

    CsrMatrix() : row_ptr(1, 0) {}
    CsrMatrix(std::int32_t rows, std::int32_t cols) : n_rows(rows), n_cols(cols), row_ptr(rows + 1, 0) {}

    static CsrMatrix from_triplets(std::int32_t n_rows, std::int32_t n_cols,
                                   std::span<const Triplet> entries);
    static CsrMatrix identity(std::int32_t n);
    static CsrMatrix diagonal(std::span<const double> d);

    std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }

    /// y = A x. Throws DimensionError on size mismatch.
    void apply(std::span<const double> x, std::span<double> y) const;
    Vector apply(std::span<const double> x) const;

    Vector diagonal_vector() const;
    CsrMatrix transposed() const;

    /// Max |A_ij - A_ji| over the stored pattern (treats missing entries as 0).
    double max_asymmetry() const;
    /// Max |A_ij| (0 for an empty matrix).
    double max_abs() const;

    /// Throws on any structural-invariant violation.
    void validate() const;
};

/// spmv convenience wrapper with dimension checking.
Vector spmv(const CsrMatrix& A, std::span<const double> x);

}  // namespace mqsim
