#pragma once

#include <string>

#include "mqsim/system.hpp"

namespace mqsim {

/// Matrix Market coordinate/real writer. `symmetric` stores the lower
/// triangle with a `symmetric` banner; values round-trip exactly (%.17g).
void write_matrix_market(const std::string& path, const CsrMatrix& A, bool symmetric);

/// Reads coordinate real general/symmetric files; symmetric storage is
/// expanded. Throws IoError with code parse / file_missing.
CsrMatrix read_matrix_market(const std::string& path);

/// Plain text, one value per line.
void write_vector_file(const std::string& path, std::span<const double> v);
Vector read_vector_file(const std::string& path);

/// Plain text, one 0/1 flag per line.
void write_mask_file(const std::string& path, std::span<const std::uint8_t> mask);
std::vector<std::uint8_t> read_mask_file(const std::string& path);

struct ImportPaths {
    std::string m;
    std::string k;
    std::string source_pattern;
    std::string conductive_mask;
};

/// Assembled-system import. Validates dimensions, symmetry of M and K
/// (max asymmetry <= 1e-10 * max|entry|), the mass/mask consistency, that
/// both partitions are nonempty, and that the air-block source is consistent
/// (PCG on K_nn x = j_sn converges at 1e-10). The result is treated as
/// linear (constant K).
DiscreteSystem load_matrix_market(const ImportPaths& paths, const SourceWaveform& waveform);

/// Writes M, K, source pattern, and mask of a system into `dir` using the
/// same formats load_matrix_market reads (M.mtx, K.mtx, source.txt, mask.txt).
ImportPaths export_model(const DiscreteSystem& sys, const std::string& dir);

}  // namespace mqsim
