#include "mqsim/partition.hpp"

#include <cmath>

#include "mqsim/errors.hpp"

namespace mqsim {

namespace {

CsrMatrix lump(const CsrMatrix& M) {
    Vector d(M.n_rows, 0.0);
    for (std::int32_t r = 0; r < M.n_rows; ++r) {
        for (std::int64_t k = M.row_ptr[r]; k < M.row_ptr[r + 1]; ++k) d[r] += M.values[k];
    }
    return CsrMatrix::diagonal(d);
}

}  // namespace

PartitionedSystem partition(std::shared_ptr<const DiscreteSystem> sys, MassMode mode) {
    const DiscreteSystem& s = *sys;
    PartitionedSystem ps;
    ps.sys = sys;
    ps.mass_mode = mode;
    ps.waveform = s.waveform;
    ps.nonlinear = s.nonlinear();

    ps.global_to_local.assign(s.n_dofs, -1);
    for (std::int32_t g = 0; g < s.n_dofs; ++g) {
        if (s.conductive_mask[g]) {
            ps.global_to_local[g] = static_cast<std::int32_t>(ps.idx_c.size());
            ps.idx_c.push_back(g);
        } else {
            ps.global_to_local[g] = static_cast<std::int32_t>(ps.idx_n.size());
            ps.idx_n.push_back(g);
        }
    }
    ps.n_c = static_cast<std::int32_t>(ps.idx_c.size());
    ps.n_n = static_cast<std::int32_t>(ps.idx_n.size());
    if (ps.n_c == 0) throw ModelError("partition: empty conductive partition");
    if (ps.n_n == 0) throw ModelError("partition: empty non-conductive partition");

    // M must live entirely on the conductive block.
    std::vector<Triplet> m_trips;
    for (std::int32_t r = 0; r < s.M.n_rows; ++r) {
        for (std::int64_t k = s.M.row_ptr[r]; k < s.M.row_ptr[r + 1]; ++k) {
            const std::int32_t c = s.M.col_idx[k];
            if (s.M.values[k] == 0.0) continue;
            if (!s.conductive_mask[r] || !s.conductive_mask[c]) {
                throw ModelError("partition: mass entry touches a non-conductive dof");
            }
            m_trips.push_back({ps.global_to_local[r], ps.global_to_local[c], s.M.values[k]});
        }
    }
    ps.M_cc = CsrMatrix::from_triplets(ps.n_c, ps.n_c, m_trips);
    if (mode == MassMode::lumped) ps.M_cc = lump(ps.M_cc);

    // Source must live entirely on the air block.
    ps.j_sn_pattern.assign(ps.n_n, 0.0);
    for (std::int32_t g = 0; g < s.n_dofs; ++g) {
        if (s.source_pattern[g] == 0.0) continue;
        if (s.conductive_mask[g]) {
            throw ModelError("partition: source pattern is nonzero on a conductive dof");
        }
        ps.j_sn_pattern[ps.global_to_local[g]] = s.source_pattern[g];
    }

    // K block extraction. The cc block remembers which global value slot each
    // of its entries came from, so nonlinear reassembly is a gather.
    std::vector<Triplet> cc, cn, nc, nn;
    std::vector<std::pair<std::int64_t, std::int64_t>> cc_origin;  // (key, global slot)
    const CsrMatrix& K = s.K_linear;
    for (std::int32_t r = 0; r < K.n_rows; ++r) {
        const bool rc = s.conductive_mask[r] != 0;
        for (std::int64_t k = K.row_ptr[r]; k < K.row_ptr[r + 1]; ++k) {
            const std::int32_t c = K.col_idx[k];
            const bool cc_flag = s.conductive_mask[c] != 0;
            const std::int32_t rl = ps.global_to_local[r];
            const std::int32_t cl = ps.global_to_local[c];
            if (rc && cc_flag) {
                cc.push_back({rl, cl, K.values[k]});
                cc_origin.push_back({static_cast<std::int64_t>(rl) * ps.n_c + cl, k});
            } else if (rc && !cc_flag) {
                cn.push_back({rl, cl, K.values[k]});
            } else if (!rc && cc_flag) {
                nc.push_back({rl, cl, K.values[k]});
            } else {
                nn.push_back({rl, cl, K.values[k]});
            }
        }
    }
    ps.K_cc0 = CsrMatrix::from_triplets(ps.n_c, ps.n_c, cc);
    ps.K_cn = CsrMatrix::from_triplets(ps.n_c, ps.n_n, cn);
    ps.K_nc = CsrMatrix::from_triplets(ps.n_n, ps.n_c, nc);
    ps.K_nn = CsrMatrix::from_triplets(ps.n_n, ps.n_n, nn);

    // Map each K_cc value slot back to its global slot (patterns coincide,
    // entry for entry, because extraction preserves order within rows).
    ps.cc_slots_.assign(ps.K_cc0.values.size(), -1);
    for (std::size_t idx = 0; idx < cc_origin.size(); ++idx) {
        const std::int32_t rl = static_cast<std::int32_t>(cc_origin[idx].first / ps.n_c);
        const std::int32_t cl = static_cast<std::int32_t>(cc_origin[idx].first % ps.n_c);
        // locate (rl, cl) in K_cc0
        std::int64_t slot = -1;
        for (std::int64_t k = ps.K_cc0.row_ptr[rl]; k < ps.K_cc0.row_ptr[rl + 1]; ++k) {
            if (ps.K_cc0.col_idx[k] == cl) {
                slot = k;
                break;
            }
        }
        ps.cc_slots_[slot] = cc_origin[idx].second;
    }

    return ps;
}

PartitionedSystem::KccScratch PartitionedSystem::make_scratch() const {
    KccScratch s;
    s.global_state.assign(sys->n_dofs, 0.0);
    s.global_k_values.assign(sys->K_linear.values.size(), 0.0);
    return s;
}

void PartitionedSystem::assemble_K_cc(std::span<const double> a_c, CsrMatrix& K_cc,
                                      KccScratch& scratch) const {
    if (K_cc.n_rows != n_c || K_cc.values.size() != K_cc0.values.size()) {
        K_cc = K_cc0;
    }
    if (!nonlinear) {
        std::copy(K_cc0.values.begin(), K_cc0.values.end(), K_cc.values.begin());
        return;
    }
    if (static_cast<std::int32_t>(scratch.global_state.size()) != sys->n_dofs ||
        scratch.global_k_values.size() != sys->K_linear.values.size()) {
        scratch = make_scratch();
    }
    // Air entries of the scratch state stay zero: no conducting cell touches
    // an air dof, so they cannot affect the gathered cc values.
    for (std::int32_t i = 0; i < n_c; ++i) scratch.global_state[idx_c[i]] = a_c[i];
    sys->assemble_K_values(scratch.global_state, scratch.global_k_values);
    for (std::size_t k = 0; k < cc_slots_.size(); ++k) {
        K_cc.values[k] = scratch.global_k_values[cc_slots_[k]];
    }
}

Vector PartitionedSystem::expand(std::span<const double> a_c, std::span<const double> a_n) const {
    Vector a(sys->n_dofs, 0.0);
    for (std::int32_t i = 0; i < n_c; ++i) a[idx_c[i]] = a_c[i];
    for (std::int32_t i = 0; i < n_n; ++i) a[idx_n[i]] = a_n[i];
    return a;
}

}  // namespace mqsim
