#pragma once

#include <memory>

#include "mqsim/system.hpp"

namespace mqsim {

enum class MassMode { consistent, lumped };

/// The conductive/air block split of a DiscreteSystem. Immutable after
/// construction apart from caller-owned K_cc value buffers.
struct PartitionedSystem {
    std::int32_t n_c = 0;
    std::int32_t n_n = 0;
    MassMode mass_mode = MassMode::consistent;

    CsrMatrix M_cc;   // SPD on the conductive dofs (diagonal when lumped)
    CsrMatrix K_cc0;  // K_cc at reference reluctivity
    CsrMatrix K_cn;   // conductive rows, air columns
    CsrMatrix K_nc;   // = K_cn^T (stored explicitly; spmv stays row-major)
    CsrMatrix K_nn;   // air block

    std::vector<std::int32_t> idx_c;  // partition index -> global dof
    std::vector<std::int32_t> idx_n;
    std::vector<std::int32_t> global_to_local;  // global dof -> index within its side

    Vector j_sn_pattern;
    SourceWaveform waveform;
    std::shared_ptr<const DiscreteSystem> sys;

    bool nonlinear = false;

    /// Per-run scratch for assemble_K_cc; each concurrent run owns one, so
    /// the shared PartitionedSystem stays strictly read-only.
    struct KccScratch {
        Vector global_state;  // air entries stay zero
        Vector global_k_values;
    };
    KccScratch make_scratch() const;

    /// K_cc(a_c): overwrites K_cc.values (pattern fixed = K_cc0's).
    void assemble_K_cc(std::span<const double> a_c, CsrMatrix& K_cc, KccScratch& scratch) const;

    /// Scatter (a_c, a_n) back to a global dof vector.
    Vector expand(std::span<const double> a_c, std::span<const double> a_n) const;

  private:
    friend PartitionedSystem partition(std::shared_ptr<const DiscreteSystem>, MassMode);
    std::vector<std::int64_t> cc_slots_;  // K_cc value slot -> global K value slot
};

/// Splits dofs by conductive_mask and extracts the four K blocks and M_cc.
/// Throws ModelError when either side is empty, when M has entries touching
/// a non-conductive dof, or when the source pattern is nonzero on a
/// conductive dof (the rhs must have the pure (0, j_sn) block form).
PartitionedSystem partition(std::shared_ptr<const DiscreteSystem> sys,
                            MassMode mode = MassMode::consistent);

}  // namespace mqsim
