#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mqsim/csr.hpp"
#include "mqsim/material.hpp"
#include "mqsim/mesh.hpp"
#include "mqsim/waveform.hpp"

namespace mqsim {

/// Flux probe: averages |B| over a set of cells (model problems) or reads a
/// weighted combination of solution values (imported systems, which carry no
/// discrete curl).
struct Probe {
    enum class Kind { cell_flux, dof_value };
    std::string name;
    Kind kind = Kind::cell_flux;
    std::vector<std::int32_t> indices;
    std::vector<double> weights;  // empty = uniform
};

/// What the builders actually realized, cell-exact, so external oracles can
/// reconstruct the continuum problem without re-deriving the snapping.
struct GeometryInfo {
    enum class Kind { slab, plate2d, imported };
    Kind kind = Kind::imported;
    double h = 0.0;      // smallest edge length, m (0 = unknown)
    double kappa = 0.0;  // conductor conductivity, S/m (0 = unknown)

    // slab
    double length = 0.0;
    int n_cells = 0;
    int slab_begin = 0, slab_end = 0;  // conducting cell range [begin, end)
    int coil_begin = 0, coil_end = 0;  // left coil band; the right band mirrors it

    // plate2d
    int nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0;
    int plate_i0 = 0, plate_i1 = 0, plate_j0 = 0, plate_j1 = 0;
    int coil_left_i0 = 0, coil_left_i1 = 0;
    int coil_right_i0 = 0, coil_right_i1 = 0;
    int coil_j0 = 0, coil_j1 = 0;
};

/// The assembled magnetoquasistatic system M da/dt + K(a) a = j_s(t) with
/// Dirichlet boundary dofs eliminated.
struct DiscreteSystem {
    std::int32_t n_dofs = 0;
    CsrMatrix M;         // consistent conductivity mass; zero rows on air dofs
    CsrMatrix K_linear;  // stiffness at reference reluctivity (B^2 = 0)
    Vector source_pattern;
    std::vector<std::uint8_t> conductive_mask;
    SourceWaveform waveform;
    MaterialModel material;
    GeometryInfo geometry;
    std::shared_ptr<const EdgeCellMesh> mesh;  // null for imported systems
    std::vector<Probe> probes;

    // Prebuilt assembly data (empty for imported systems).
    std::shared_ptr<const EdgeCellMesh::KPlan> k_plan;
    Vector k_static_values;

    /// True when reassembling K actually depends on the state.
    bool nonlinear() const;

    /// K(a); returns K_linear for linear/imported systems.
    CsrMatrix assemble_K(std::span<const double> a) const;

    /// Fast path: overwrite `values` (laid out like K_linear.values) with K(a).
    void assemble_K_values(std::span<const double> a, std::span<double> values) const;
};

/// 1D conducting-slab model: air | coil | air | slab | air | coil(-) | air,
/// P1 elements, Dirichlet A = 0 at both ends, mirror-antisymmetric source.
DiscreteSystem build_slab_model(int n_cells, double length, double slab_fraction, double kappa,
                                const MaterialModel& material, const SourceWaveform& waveform);

/// 2D plate geometry knobs (fractions of the domain, snapped to whole cells).
struct PlateGeometry {
    double lx = 0.048, ly = 0.048;  // domain extent, m
    double plate_x0 = 0.32, plate_x1 = 0.68;
    double plate_y0 = 0.34, plate_y1 = 0.66;
    double coil_width = 0.10;  // strip width
    double coil_gap = 0.06;    // air gap between plate and strip
    double coil_y0 = 0.28, coil_y1 = 0.72;
};

/// 2D A_z model: rectangular conducting plate flanked by a +/- coil strip
/// pair, 5-point-stencil stiffness, Q1 consistent mass, Dirichlet boundary.
DiscreteSystem build_plate_model_2d(int nx, int ny, const PlateGeometry& geometry, double kappa,
                                    const MaterialModel& material, const SourceWaveform& waveform);

}  // namespace mqsim
