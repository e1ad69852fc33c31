#include "mqsim/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mqsim/errors.hpp"
#include "mqsim/partition.hpp"
#include "mqsim/pcg.hpp"

namespace mqsim {

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    throw IoError(IoError::Code::parse, path + ": " + what);
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Code::file_missing, "cannot open '" + path + "'");
    return in;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_matrix_market(const std::string& path, const CsrMatrix& A, bool symmetric) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Code::file_missing, "cannot write '" + path + "'");
    out << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general")
        << "\n";
    std::int64_t count = 0;
    for (std::int32_t r = 0; r < A.n_rows; ++r) {
        for (std::int64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
            if (!symmetric || A.col_idx[k] <= r) ++count;
        }
    }
    out << A.n_rows << " " << A.n_cols << " " << count << "\n";
    for (std::int32_t r = 0; r < A.n_rows; ++r) {
        for (std::int64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
            if (symmetric && A.col_idx[k] > r) continue;
            out << (r + 1) << " " << (A.col_idx[k] + 1) << " " << fmt(A.values[k]) << "\n";
        }
    }
    if (!out) throw IoError(IoError::Code::parse, "short write to '" + path + "'");
}

CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) parse_fail(path, "empty file");
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
        parse_fail(path, "expected a MatrixMarket coordinate banner");
    }
    if (field != "real") parse_fail(path, "only real matrices are supported");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general") parse_fail(path, "unsupported symmetry '" + symmetry + "'");

    do {
        if (!std::getline(in, line)) parse_fail(path, "missing size line");
    } while (!line.empty() && line[0] == '%');

    std::int64_t rows = 0, cols = 0, entries = 0;
    {
        std::istringstream sizes(line);
        if (!(sizes >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0) {
            parse_fail(path, "bad size line '" + line + "'");
        }
    }
    if (rows > INT32_MAX || cols > INT32_MAX) parse_fail(path, "matrix too large");

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(entries) * (symmetric ? 2 : 1));
    for (std::int64_t n = 0; n < entries; ++n) {
        std::int64_t r = 0, c = 0;
        double v = 0.0;
        if (!(in >> r >> c >> v)) parse_fail(path, "bad entry at line " + std::to_string(n + 1));
        if (r < 1 || r > rows || c < 1 || c > cols) {
            parse_fail(path, "entry index out of range at line " + std::to_string(n + 1));
        }
        trips.push_back({static_cast<std::int32_t>(r - 1), static_cast<std::int32_t>(c - 1), v});
        if (symmetric && r != c) {
            trips.push_back({static_cast<std::int32_t>(c - 1), static_cast<std::int32_t>(r - 1), v});
        }
    }
    return CsrMatrix::from_triplets(static_cast<std::int32_t>(rows), static_cast<std::int32_t>(cols),
                                    trips);
}

void write_vector_file(const std::string& path, std::span<const double> v) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Code::file_missing, "cannot write '" + path + "'");
    for (double x : v) out << fmt(x) << "\n";
}

Vector read_vector_file(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    Vector v;
    double x = 0.0;
    while (in >> x) v.push_back(x);
    if (!in.eof()) parse_fail(path, "non-numeric vector entry");
    return v;
}

void write_mask_file(const std::string& path, std::span<const std::uint8_t> mask) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Code::file_missing, "cannot write '" + path + "'");
    for (std::uint8_t m : mask) out << (m ? 1 : 0) << "\n";
}

std::vector<std::uint8_t> read_mask_file(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::vector<std::uint8_t> mask;
    int x = 0;
    while (in >> x) {
        if (x != 0 && x != 1) parse_fail(path, "mask entries must be 0 or 1");
        mask.push_back(static_cast<std::uint8_t>(x));
    }
    if (!in.eof()) parse_fail(path, "non-numeric mask entry");
    return mask;
}

DiscreteSystem load_matrix_market(const ImportPaths& paths, const SourceWaveform& waveform) {
    DiscreteSystem sys;
    sys.M = read_matrix_market(paths.m);
    sys.K_linear = read_matrix_market(paths.k);
    sys.source_pattern = read_vector_file(paths.source_pattern);
    sys.conductive_mask = read_mask_file(paths.conductive_mask);
    sys.waveform = waveform;
    sys.material = MaterialModel::linear(kNuVacuum);  // imports are constant-K
    sys.geometry.kind = GeometryInfo::Kind::imported;

    const std::int32_t n = sys.M.n_rows;
    if (sys.M.n_cols != n || sys.K_linear.n_rows != n || sys.K_linear.n_cols != n ||
        static_cast<std::int32_t>(sys.source_pattern.size()) != n ||
        static_cast<std::int32_t>(sys.conductive_mask.size()) != n) {
        throw IoError(IoError::Code::dimension_mismatch,
                      "imported M, K, source pattern, and mask must share one dimension");
    }
    sys.n_dofs = n;
    sys.M.validate();
    sys.K_linear.validate();

    const std::pair<const CsrMatrix*, const char*> checks[] = {{&sys.M, "M"},
                                                               {&sys.K_linear, "K"}};
    for (const auto& [mat, name] : checks) {
        const double asym = mat->max_asymmetry();
        if (asym > 1e-10 * std::max(mat->max_abs(), 1e-300)) {
            throw IoError(IoError::Code::asymmetry,
                          std::string(name) + " is asymmetric beyond tolerance (max deviation " +
                              fmt(asym) + ")");
        }
    }

    bool any_cond = false, any_air = false;
    for (std::uint8_t m : sys.conductive_mask) (m ? any_cond : any_air) = true;
    if (!any_air) throw IoError(IoError::Code::empty_partition, "empty non-conductive partition");
    if (!any_cond) throw IoError(IoError::Code::empty_partition, "empty conductive partition");

    for (std::int32_t r = 0; r < n; ++r) {
        for (std::int64_t k = sys.M.row_ptr[r]; k < sys.M.row_ptr[r + 1]; ++k) {
            if (sys.M.values[k] == 0.0) continue;
            if (!sys.conductive_mask[r] || !sys.conductive_mask[sys.M.col_idx[k]]) {
                throw IoError(IoError::Code::mass_on_nonconductive,
                              "mass entry at (" + std::to_string(r) + ", " +
                                  std::to_string(sys.M.col_idx[k]) + ") touches a non-conductive dof");
            }
        }
    }

    // Source-consistency validation pass: j_sn must be (numerically) in the
    // range of K_nn or the Schur pseudo-inverse solves cannot converge.
    auto shared = std::make_shared<DiscreteSystem>(sys);
    const PartitionedSystem ps = partition(shared);
    double norm = 0.0;
    for (double v : ps.j_sn_pattern) norm += v * v;
    if (norm > 0.0) {
        const Vector x0(ps.n_n, 0.0);
        const auto [x, rep] = pcg(make_operator(ps.K_nn), ps.j_sn_pattern, x0, 1e-10,
                                  std::max<std::int32_t>(2000, 4 * ps.n_n),
                                  build_jacobi_or_identity(ps.K_nn));
        if (!rep.converged) {
            throw IoError(IoError::Code::inconsistent_source,
                          "inconsistent source: K_nn x = j_sn did not converge (relative residual " +
                              fmt(rep.final_relative_residual) + ")");
        }
    }
    return sys;
}

ImportPaths export_model(const DiscreteSystem& sys, const std::string& dir) {
    std::filesystem::create_directories(dir);
    ImportPaths p;
    p.m = dir + "/M.mtx";
    p.k = dir + "/K.mtx";
    p.source_pattern = dir + "/source.txt";
    p.conductive_mask = dir + "/mask.txt";
    write_matrix_market(p.m, sys.M, true);
    write_matrix_market(p.k, sys.K_linear, true);
    write_vector_file(p.source_pattern, sys.source_pattern);
    write_mask_file(p.conductive_mask, sys.conductive_mask);
    return p;
}

}  // namespace mqsim
