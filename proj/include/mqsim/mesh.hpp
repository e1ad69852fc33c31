#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mqsim/csr.hpp"
#include "mqsim/material.hpp"

namespace mqsim {

/// Edge/cell view of the nodal model discretizations (1D slab, 2D plate).
///
/// The stiffness form is a sum over edges, k_e * (a_i - a_j)^2 / 2, with
/// k_e = sum over adjacent cells of area * slope_weight * inv_h2 * nu(cell).
/// The per-cell B^2 proxy feeding nu is the cell average of the squared
/// edge slopes, so K(a)a is the exact gradient of a scalar energy and the
/// Newton matrix is its (symmetric, positive semidefinite) Hessian.
struct EdgeCellMesh {
    struct Edge {
        std::int32_t i = -1;  // dof ids; -1 marks an eliminated Dirichlet node
        std::int32_t j = -1;
        double inv_h2 = 0.0;
        std::int32_t cell0 = -1;
        std::int32_t cell1 = -1;
        double w0 = 0.0;  // area * slope_weight * inv_h2 of cell0
        double w1 = 0.0;
    };

    struct Cell {
        double area = 0.0;
        double kappa = 0.0;  // 0 in air
        bool conducting = false;
        double slope_weight = 1.0;  // 1 / (edges per direction)
        std::array<std::int32_t, 4> edges{-1, -1, -1, -1};
        std::int32_t n_edges = 0;
        std::array<std::int32_t, 4> nodes{-1, -1, -1, -1};  // dof ids, cyclic corner order in 2D
        std::int32_t n_nodes = 0;
    };

    std::int32_t n_dofs = 0;
    std::vector<Edge> edges;
    std::vector<Cell> cells;
    std::vector<std::int32_t> conducting_cells;  // indices into cells

    double edge_delta(const Edge& e, std::span<const double> a) const {
        const double ai = e.i >= 0 ? a[e.i] : 0.0;
        const double aj = e.j >= 0 ? a[e.j] : 0.0;
        return ai - aj;
    }

    /// Cell-averaged squared discrete curl.
    double cell_b_squared(std::int32_t cell_id, std::span<const double> a) const;

    /// Sparsity pattern of K plus per-edge value slots (ii, ij, ji, jj; -1
    /// where the endpoint is eliminated).
    struct KPlan {
        CsrMatrix pattern;  // values used as scratch by assembly
        std::vector<std::array<std::int64_t, 4>> edge_slots;
    };
    KPlan build_k_plan() const;

    /// K values for reluctivity field nu(material, B^2(cell)); air cells use
    /// vacuum reluctivity. Writes into `values` (size = plan nnz).
    void assemble_k_values(const KPlan& plan, const MaterialModel& material,
                           std::span<const double> a, std::span<double> values) const;

    /// Static part of the K values: every non-conducting cell's contribution
    /// (their reluctivity never changes).
    Vector static_k_values(const KPlan& plan) const;

    /// Adds the conducting-cell contributions for state `a` on top of the
    /// static values already present in `values`.
    void add_conducting_k_values(const KPlan& plan, const MaterialModel& material,
                                 std::span<const double> a, std::span<double> values) const;

    /// Consistent conductivity mass matrix (P1 in 1D, Q1 in 2D).
    CsrMatrix assemble_mass() const;

    /// Newton-matrix plan: pattern of K plus the cell node cliques (the
    /// nonlinear rank-one terms), with slot tables for fast reassembly.
    struct JacobianPlan {
        CsrMatrix pattern;
        std::vector<std::array<std::int64_t, 4>> edge_slots;
        // Per conducting cell: its dof list and the dense slot block
        // (n_nodes x n_nodes, row-major) into the pattern.
        struct CellClique {
            std::int32_t cell = -1;
            std::array<std::int32_t, 4> nodes{-1, -1, -1, -1};
            std::int32_t n_nodes = 0;
            std::array<std::int64_t, 16> slots;
        };
        std::vector<CellClique> cliques;
    };
    JacobianPlan build_jacobian_plan() const;

    /// Values of K(a) + sum over conducting cells of
    /// area * nu'(B^2)/2 * g g^T (the exact Hessian of the stiffness energy).
    void assemble_jacobian_values(const JacobianPlan& plan, const MaterialModel& material,
                                  std::span<const double> a, std::span<double> values) const;
};

}  // namespace mqsim
