#include "mqsim/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "mqsim/errors.hpp"
#include "mqsim/system.hpp"

namespace mqsim {

namespace {

// Slot of column `col` within row `row` of the pattern (-1 when absent).
std::int64_t find_slot(const CsrMatrix& P, std::int32_t row, std::int32_t col) {
    if (row < 0 || col < 0) return -1;
    const auto begin = P.col_idx.begin() + P.row_ptr[row];
    const auto end = P.col_idx.begin() + P.row_ptr[row + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return -1;
    return it - P.col_idx.begin();
}

std::array<std::int64_t, 4> edge_slots_in(const CsrMatrix& P, const EdgeCellMesh::Edge& e) {
    return {find_slot(P, e.i, e.i), find_slot(P, e.i, e.j), find_slot(P, e.j, e.i),
            find_slot(P, e.j, e.j)};
}

void scatter_edge(std::span<double> values, const std::array<std::int64_t, 4>& slots, double k) {
    if (slots[0] >= 0) values[slots[0]] += k;
    if (slots[1] >= 0) values[slots[1]] -= k;
    if (slots[2] >= 0) values[slots[2]] -= k;
    if (slots[3] >= 0) values[slots[3]] += k;
}

}  // namespace

double EdgeCellMesh::cell_b_squared(std::int32_t cell_id, std::span<const double> a) const {
    const Cell& c = cells[cell_id];
    double s = 0.0;
    for (std::int32_t k = 0; k < c.n_edges; ++k) {
        const Edge& e = edges[c.edges[k]];
        const double d = edge_delta(e, a);
        s += d * d * e.inv_h2;
    }
    return c.slope_weight * s;
}

EdgeCellMesh::KPlan EdgeCellMesh::build_k_plan() const {
    std::vector<Triplet> trips;
    trips.reserve(edges.size() * 4);
    for (const Edge& e : edges) {
        if (e.i >= 0) trips.push_back({e.i, e.i, 0.0});
        if (e.j >= 0) trips.push_back({e.j, e.j, 0.0});
        if (e.i >= 0 && e.j >= 0) {
            trips.push_back({e.i, e.j, 0.0});
            trips.push_back({e.j, e.i, 0.0});
        }
    }
    KPlan plan;
    plan.pattern = CsrMatrix::from_triplets(n_dofs, n_dofs, trips);
    plan.edge_slots.reserve(edges.size());
    for (const Edge& e : edges) plan.edge_slots.push_back(edge_slots_in(plan.pattern, e));
    return plan;
}

void EdgeCellMesh::assemble_k_values(const KPlan& plan, const MaterialModel& material,
                                     std::span<const double> a, std::span<double> values) const {
    Vector statics = static_k_values(plan);
    std::copy(statics.begin(), statics.end(), values.begin());
    add_conducting_k_values(plan, material, a, values);
}

Vector EdgeCellMesh::static_k_values(const KPlan& plan) const {
    Vector values(plan.pattern.values.size(), 0.0);
    for (std::size_t eid = 0; eid < edges.size(); ++eid) {
        const Edge& e = edges[eid];
        double k = 0.0;
        if (e.cell0 >= 0 && !cells[e.cell0].conducting) k += e.w0 * kNuVacuum;
        if (e.cell1 >= 0 && !cells[e.cell1].conducting) k += e.w1 * kNuVacuum;
        if (k != 0.0) scatter_edge(values, plan.edge_slots[eid], k);
    }
    return values;
}

void EdgeCellMesh::add_conducting_k_values(const KPlan& plan, const MaterialModel& material,
                                           std::span<const double> a,
                                           std::span<double> values) const {
    for (std::int32_t cid : conducting_cells) {
        const Cell& c = cells[cid];
        const double nu_c = nu(material, cell_b_squared(cid, a));
        for (std::int32_t k = 0; k < c.n_edges; ++k) {
            const std::int32_t eid = c.edges[k];
            const Edge& e = edges[eid];
            const double w = e.cell0 == cid ? e.w0 : e.w1;
            scatter_edge(values, plan.edge_slots[eid], w * nu_c);
        }
    }
}

CsrMatrix EdgeCellMesh::assemble_mass() const {
    // P1 element mass in 1D, Q1 in 2D (cyclic corner order), kappa-weighted.
    static constexpr double kP1[2][2] = {{2.0, 1.0}, {1.0, 2.0}};
    static constexpr double kQ1[4][4] = {{4.0, 2.0, 1.0, 2.0},
                                         {2.0, 4.0, 2.0, 1.0},
                                         {1.0, 2.0, 4.0, 2.0},
                                         {2.0, 1.0, 2.0, 4.0}};
    std::vector<Triplet> trips;
    for (const Cell& c : cells) {
        if (!c.conducting || c.kappa == 0.0) continue;
        const double scale = c.n_nodes == 2 ? c.kappa * c.area / 6.0 : c.kappa * c.area / 36.0;
        for (std::int32_t r = 0; r < c.n_nodes; ++r) {
            if (c.nodes[r] < 0) continue;
            for (std::int32_t s = 0; s < c.n_nodes; ++s) {
                if (c.nodes[s] < 0) continue;
                const double w = c.n_nodes == 2 ? kP1[r][s] : kQ1[r][s];
                trips.push_back({c.nodes[r], c.nodes[s], scale * w});
            }
        }
    }
    return CsrMatrix::from_triplets(n_dofs, n_dofs, trips);
}

EdgeCellMesh::JacobianPlan EdgeCellMesh::build_jacobian_plan() const {
    std::vector<Triplet> trips;
    for (const Edge& e : edges) {
        if (e.i >= 0) trips.push_back({e.i, e.i, 0.0});
        if (e.j >= 0) trips.push_back({e.j, e.j, 0.0});
        if (e.i >= 0 && e.j >= 0) {
            trips.push_back({e.i, e.j, 0.0});
            trips.push_back({e.j, e.i, 0.0});
        }
    }
    for (std::int32_t cid : conducting_cells) {
        const Cell& c = cells[cid];
        for (std::int32_t r = 0; r < c.n_nodes; ++r) {
            if (c.nodes[r] < 0) continue;
            for (std::int32_t s = 0; s < c.n_nodes; ++s) {
                if (c.nodes[s] >= 0) trips.push_back({c.nodes[r], c.nodes[s], 0.0});
            }
        }
    }
    JacobianPlan plan;
    plan.pattern = CsrMatrix::from_triplets(n_dofs, n_dofs, trips);
    plan.edge_slots.reserve(edges.size());
    for (const Edge& e : edges) plan.edge_slots.push_back(edge_slots_in(plan.pattern, e));
    for (std::int32_t cid : conducting_cells) {
        const Cell& c = cells[cid];
        JacobianPlan::CellClique q;
        q.cell = cid;
        q.nodes = c.nodes;
        q.n_nodes = c.n_nodes;
        q.slots.fill(-1);
        for (std::int32_t r = 0; r < c.n_nodes; ++r) {
            for (std::int32_t s = 0; s < c.n_nodes; ++s) {
                q.slots[r * 4 + s] = find_slot(plan.pattern, c.nodes[r], c.nodes[s]);
            }
        }
        plan.cliques.push_back(q);
    }
    return plan;
}

void EdgeCellMesh::assemble_jacobian_values(const JacobianPlan& plan, const MaterialModel& material,
                                            std::span<const double> a,
                                            std::span<double> values) const {
    std::fill(values.begin(), values.end(), 0.0);
    // K(a) part.
    std::vector<double> cell_nu(cells.size(), kNuVacuum);
    for (std::int32_t cid : conducting_cells) {
        cell_nu[cid] = nu(material, cell_b_squared(cid, a));
    }
    for (std::size_t eid = 0; eid < edges.size(); ++eid) {
        const Edge& e = edges[eid];
        double k = 0.0;
        if (e.cell0 >= 0) k += e.w0 * cell_nu[e.cell0];
        if (e.cell1 >= 0) k += e.w1 * cell_nu[e.cell1];
        scatter_edge(values, plan.edge_slots[eid], k);
    }
    // Nonlinear rank-one terms: area * nu'/2 * g g^T with g = grad_a B^2(cell).
    for (const JacobianPlan::CellClique& q : plan.cliques) {
        const Cell& c = cells[q.cell];
        const double dnu = nu_derivative(material, cell_b_squared(q.cell, a));
        if (dnu == 0.0) continue;
        std::array<double, 4> g{0.0, 0.0, 0.0, 0.0};
        for (std::int32_t k = 0; k < c.n_edges; ++k) {
            const Edge& e = edges[c.edges[k]];
            const double ge = 2.0 * c.slope_weight * e.inv_h2 * edge_delta(e, a);
            for (std::int32_t r = 0; r < q.n_nodes; ++r) {
                if (q.nodes[r] == e.i) g[r] += ge;
                if (q.nodes[r] == e.j) g[r] -= ge;
            }
        }
        const double scale = c.area * 0.5 * dnu;
        for (std::int32_t r = 0; r < q.n_nodes; ++r) {
            for (std::int32_t s = 0; s < q.n_nodes; ++s) {
                const std::int64_t slot = q.slots[r * 4 + s];
                if (slot >= 0) values[slot] += scale * g[r] * g[s];
            }
        }
    }
}

bool DiscreteSystem::nonlinear() const {
    return mesh != nullptr && material.kind == MaterialModel::Kind::brauer &&
           !mesh->conducting_cells.empty();
}

CsrMatrix DiscreteSystem::assemble_K(std::span<const double> a) const {
    if (!nonlinear()) return K_linear;
    CsrMatrix K = K_linear;
    assemble_K_values(a, K.values);
    return K;
}

void DiscreteSystem::assemble_K_values(std::span<const double> a, std::span<double> values) const {
    if (!nonlinear()) {
        std::copy(K_linear.values.begin(), K_linear.values.end(), values.begin());
        return;
    }
    std::copy(k_static_values.begin(), k_static_values.end(), values.begin());
    mesh->add_conducting_k_values(*k_plan, material, a, values);
}

}  // namespace mqsim
