#include <cmath>
#include <memory>

#include "mqsim/errors.hpp"
#include "mqsim/system.hpp"

namespace mqsim {

DiscreteSystem build_slab_model(int n_cells, double length, double slab_fraction, double kappa,
                                const MaterialModel& material, const SourceWaveform& waveform) {
    if (n_cells < 8) throw ModelError("build_slab_model: n_cells must be >= 8");
    if (!(slab_fraction > 0.0 && slab_fraction < 1.0)) {
        throw ModelError("build_slab_model: slab_fraction must lie in (0, 1)");
    }
    if (!(kappa > 0.0)) throw ModelError("build_slab_model: kappa must be positive");
    if (!(length > 0.0)) throw ModelError("build_slab_model: length must be positive");

    const int n = n_cells;
    const double h = length / n;
    // Mirror-symmetric slab cell range [s0, s1).
    const int s0 = static_cast<int>(std::lround(n * (1.0 - slab_fraction) / 2.0));
    const int s1 = n - s0;
    if (s0 < 1 || s1 > n - 1) {
        throw ModelError("build_slab_model: slab touches the domain boundary (air must surround it)");
    }
    if (s1 <= s0) throw ModelError("build_slab_model: slab_fraction resolves to zero cells");
    if (s0 < 3) {
        throw ModelError("build_slab_model: air region too thin to place the coil with gaps");
    }
    // Coil band in the left air region, one-cell-plus gaps to boundary and slab;
    // the right band mirrors it with opposite polarity.
    const int gap = std::max(1, static_cast<int>(std::lround(s0 / 4.0)));
    const int c0 = gap;
    const int c1 = s0 - gap;
    if (c1 <= c0) throw ModelError("build_slab_model: air region too thin to place the coil");

    auto mesh = std::make_shared<EdgeCellMesh>();
    mesh->n_dofs = n - 1;
    const auto dof = [n](int node) { return node >= 1 && node <= n - 1 ? node - 1 : -1; };

    mesh->cells.resize(n);
    mesh->edges.resize(n);
    const double inv_h2 = 1.0 / (h * h);
    for (int k = 0; k < n; ++k) {
        EdgeCellMesh::Cell& c = mesh->cells[k];
        const bool conducting = k >= s0 && k < s1;
        c.area = h;
        c.conducting = conducting;
        c.kappa = conducting ? kappa : 0.0;
        c.slope_weight = 1.0;
        c.edges = {k, -1, -1, -1};
        c.n_edges = 1;
        c.nodes = {dof(k), dof(k + 1), -1, -1};
        c.n_nodes = 2;
        if (conducting) mesh->conducting_cells.push_back(k);

        EdgeCellMesh::Edge& e = mesh->edges[k];
        e.i = dof(k);
        e.j = dof(k + 1);
        e.inv_h2 = inv_h2;
        e.cell0 = k;
        e.w0 = h * inv_h2;  // area * slope_weight * inv_h2
    }

    DiscreteSystem sys;
    sys.n_dofs = mesh->n_dofs;
    sys.mesh = mesh;
    sys.material = material;
    sys.waveform = waveform;
    sys.M = mesh->assemble_mass();

    auto plan = std::make_shared<EdgeCellMesh::KPlan>(mesh->build_k_plan());
    sys.k_plan = plan;
    sys.k_static_values = mesh->static_k_values(*plan);
    sys.K_linear = plan->pattern;
    {
        const Vector zero_state(sys.n_dofs, 0.0);
        mesh->assemble_k_values(*plan, material, zero_state, sys.K_linear.values);
    }

    sys.source_pattern.assign(sys.n_dofs, 0.0);
    const auto load = [&](int cell, double polarity) {
        for (int node : {cell, cell + 1}) {
            const int d = dof(node);
            if (d >= 0) sys.source_pattern[d] += polarity * h / 2.0;
        }
    };
    for (int k = c0; k < c1; ++k) load(k, 1.0);
    for (int k = n - c1; k < n - c0; ++k) load(k, -1.0);

    sys.conductive_mask.assign(sys.n_dofs, 0);
    for (int k = s0; k < s1; ++k) {
        for (int node : {k, k + 1}) {
            const int d = dof(node);
            if (d >= 0) sys.conductive_mask[d] = 1;
        }
    }

    Probe probe;
    probe.name = "slab_B";
    probe.kind = Probe::Kind::cell_flux;
    for (int k = s0; k < s1; ++k) probe.indices.push_back(k);
    sys.probes.push_back(probe);

    GeometryInfo& g = sys.geometry;
    g.kind = GeometryInfo::Kind::slab;
    g.h = h;
    g.kappa = kappa;
    g.length = length;
    g.n_cells = n;
    g.slab_begin = s0;
    g.slab_end = s1;
    g.coil_begin = c0;
    g.coil_end = c1;
    return sys;
}

}  // namespace mqsim
