#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

Mat zeros(int rows, int cols) { return Mat(rows, Vec(cols, 0.0)); }

Mat identity(int n) {
    Mat I = zeros(n, n);
    for (int i = 0; i < n; ++i) I[i][i] = 1.0;
    return I;
}

Mat from_csr(const mqsim::CsrMatrix& A) {
    Mat D = zeros(A.n_rows, A.n_cols);
    for (std::int32_t r = 0; r < A.n_rows; ++r) {
        for (std::int64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
            D[r][A.col_idx[k]] = A.values[k];
        }
    }
    return D;
}

Vec matvec(const Mat& A, const Vec& x) {
    Vec y(A.size(), 0.0);
    for (std::size_t i = 0; i < A.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += A[i][j] * x[j];
        y[i] = s;
    }
    return y;
}

Mat matmul(const Mat& A, const Mat& B) {
    const std::size_t n = A.size(), m = B[0].size(), k = B.size();
    Mat C = zeros(static_cast<int>(n), static_cast<int>(m));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            const double a = A[i][l];
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) C[i][j] += a * B[l][j];
        }
    }
    return C;
}

Mat transpose(const Mat& A) {
    Mat T = zeros(static_cast<int>(A[0].size()), static_cast<int>(A.size()));
    for (std::size_t i = 0; i < A.size(); ++i) {
        for (std::size_t j = 0; j < A[0].size(); ++j) T[j][i] = A[i][j];
    }
    return T;
}

Vec lu_solve(Mat A, Vec b) {
    const int n = static_cast<int>(A.size());
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[best][col])) best = r;
        }
        if (A[best][col] == 0.0) throw std::runtime_error("oracle lu_solve: singular matrix");
        std::swap(A[col], A[best]);
        std::swap(b[col], b[best]);
        for (int r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            A[r][col] = 0.0;
            for (int c = col + 1; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return x;
}

Eigen jacobi_eigen(Mat A, int max_sweeps) {
    const int n = static_cast<int>(A.size());
    Mat V = identity(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) off += A[p][q] * A[p][q];
        }
        double scale = 0.0;
        for (int p = 0; p < n; ++p) scale = std::max(scale, std::abs(A[p][p]));
        if (off <= 1e-30 * std::max(scale * scale, 1e-300)) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (A[p][q] == 0.0) continue;
                const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V[k][p], vkq = V[k][q];
                    V[k][p] = c * vkp - s * vkq;
                    V[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Eigen e;
    e.values.resize(n);
    for (int i = 0; i < n; ++i) e.values[i] = A[i][i];
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return e.values[a] < e.values[b]; });
    Vec sorted(n);
    Mat vecs = zeros(n, n);
    for (int k = 0; k < n; ++k) {
        sorted[k] = e.values[order[k]];
        for (int i = 0; i < n; ++i) vecs[i][k] = V[i][order[k]];
    }
    e.values = sorted;
    e.vectors = vecs;
    return e;
}

Vec pinv_apply(const Mat& A, const Vec& b, double rel_cutoff) {
    const Eigen e = jacobi_eigen(A);
    const int n = static_cast<int>(b.size());
    double max_ev = 0.0;
    for (double v : e.values) max_ev = std::max(max_ev, std::abs(v));
    Vec x(n, 0.0);
    for (int k = 0; k < n; ++k) {
        if (std::abs(e.values[k]) <= rel_cutoff * max_ev) continue;
        double coef = 0.0;
        for (int i = 0; i < n; ++i) coef += e.vectors[i][k] * b[i];
        coef /= e.values[k];
        for (int i = 0; i < n; ++i) x[i] += coef * e.vectors[i][k];
    }
    return x;
}

Vec solve_spd(const Mat& A, const Vec& b) { return lu_solve(A, b); }

Mat cholesky_lower(Mat A) {
    const int n = static_cast<int>(A.size());
    Mat L = zeros(n, n);
    for (int j = 0; j < n; ++j) {
        double d = A[j][j];
        for (int k = 0; k < j; ++k) d -= L[j][k] * L[j][k];
        if (!(d > 0.0)) throw std::runtime_error("oracle cholesky: matrix not SPD");
        L[j][j] = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = A[i][j];
            for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
            L[i][j] = s / L[j][j];
        }
    }
    return L;
}

double generalized_lambda_max(const Mat& M, const Mat& S) {
    const int n = static_cast<int>(M.size());
    const Mat L = cholesky_lower(M);
    // B = L^{-1} S L^{-T}: forward-solve columns, then rows.
    Mat X = zeros(n, n);  // X = L^{-1} S
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) {
            double s = S[r][c];
            for (int k = 0; k < r; ++k) s -= L[r][k] * X[k][c];
            X[r][c] = s / L[r][r];
        }
    }
    Mat B = zeros(n, n);  // B = X L^{-T}  (solve B L^T = X row-wise)
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double s = X[r][c];
            for (int k = 0; k < c; ++k) s -= B[r][k] * L[c][k];
            B[r][c] = s / L[c][c];
        }
    }
    const Eigen e = jacobi_eigen(B);
    return e.values.back();
}

Mat dense_schur_complement(const Mat& K_cc, const Mat& K_cn, const Mat& K_nn,
                           double pinv_cutoff) {
    const int nc = static_cast<int>(K_cc.size());
    const int nn = static_cast<int>(K_nn.size());
    Mat S = K_cc;
    for (int c = 0; c < nc; ++c) {
        Vec col(nn);
        for (int r = 0; r < nn; ++r) col[r] = K_cn[c][r];  // (K_cn^T) column c
        const Vec y = pinv_apply(K_nn, col, pinv_cutoff);
        for (int r = 0; r < nc; ++r) {
            double s = 0.0;
            for (int k = 0; k < nn; ++k) s += K_cn[r][k] * y[k];
            S[r][c] -= s;
        }
    }
    return S;
}

std::uint64_t Rng::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

Vec Rng::vector(int n, double lo, double hi) {
    Vec v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
}

Mat Rng::spd(int n, double shift) {
    Mat G = zeros(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) G[i][j] = uniform(-1.0, 1.0);
    }
    Mat A = matmul(transpose(G), G);
    for (int i = 0; i < n; ++i) A[i][i] += shift;
    return A;
}

mqsim::CsrMatrix csr_from_dense(const Mat& A, double drop_below_abs) {
    std::vector<mqsim::Triplet> trips;
    for (std::size_t i = 0; i < A.size(); ++i) {
        for (std::size_t j = 0; j < A[i].size(); ++j) {
            if (std::abs(A[i][j]) > drop_below_abs) {
                trips.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), A[i][j]});
            }
        }
    }
    return mqsim::CsrMatrix::from_triplets(static_cast<std::int32_t>(A.size()),
                                           static_cast<std::int32_t>(A[0].size()), trips);
}

mqsim::CsrMatrix laplacian_1d(int n) {
    std::vector<mqsim::Triplet> trips;
    for (int i = 0; i < n; ++i) {
        trips.push_back({i, i, 2.0});
        if (i > 0) trips.push_back({i, i - 1, -1.0});
        if (i + 1 < n) trips.push_back({i, i + 1, -1.0});
    }
    return mqsim::CsrMatrix::from_triplets(n, n, trips);
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double rel_err(const Vec& a, const Vec& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ref[i]) * (a[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace oracle
