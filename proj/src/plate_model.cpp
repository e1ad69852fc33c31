#include <cmath>
#include <memory>

#include "mqsim/errors.hpp"
#include "mqsim/system.hpp"

namespace mqsim {

namespace {

int snap(double fraction, int n) { return static_cast<int>(std::lround(fraction * n)); }

}  // namespace

DiscreteSystem build_plate_model_2d(int nx, int ny, const PlateGeometry& geo, double kappa,
                                    const MaterialModel& material, const SourceWaveform& waveform) {
    if (nx < 8 || ny < 8) throw ModelError("build_plate_model_2d: nx, ny must be >= 8");
    if (!(kappa > 0.0)) throw ModelError("build_plate_model_2d: kappa must be positive");
    if (!(geo.lx > 0.0 && geo.ly > 0.0)) throw ModelError("build_plate_model_2d: domain must be positive");

    const int pi0 = snap(geo.plate_x0, nx), pi1 = snap(geo.plate_x1, nx);
    const int pj0 = snap(geo.plate_y0, ny), pj1 = snap(geo.plate_y1, ny);
    if (pi0 < 1 || pi1 > nx - 1 || pj0 < 1 || pj1 > ny - 1) {
        throw ModelError("build_plate_model_2d: plate touches the domain boundary");
    }
    if (pi1 <= pi0 || pj1 <= pj0) throw ModelError("build_plate_model_2d: plate resolves to zero cells");

    const int cwidth = std::max(1, snap(geo.coil_width, nx));
    const int cgap = std::max(1, snap(geo.coil_gap, nx));
    const int cl1 = pi0 - cgap, cl0 = cl1 - cwidth;
    const int cr0 = pi1 + cgap, cr1 = cr0 + cwidth;
    const int cj0 = snap(geo.coil_y0, ny), cj1 = snap(geo.coil_y1, ny);
    if (cl0 < 1 || cr1 > nx - 1 || cj0 < 1 || cj1 > ny - 1) {
        throw ModelError("build_plate_model_2d: coil strips do not fit inside the air region");
    }
    if (cj1 <= cj0) throw ModelError("build_plate_model_2d: coil strips resolve to zero cells");

    const double hx = geo.lx / nx, hy = geo.ly / ny;
    const double area = hx * hy;

    auto mesh = std::make_shared<EdgeCellMesh>();
    mesh->n_dofs = (nx - 1) * (ny - 1);
    const auto dof = [nx, ny](int i, int j) {
        return i >= 1 && i <= nx - 1 && j >= 1 && j <= ny - 1 ? (j - 1) * (nx - 1) + (i - 1) : -1;
    };
    const auto cell_id = [nx](int i, int j) { return j * nx + i; };
    const auto in_plate = [&](int i, int j) { return i >= pi0 && i < pi1 && j >= pj0 && j < pj1; };

    // Edges: x-edges first (node rows j = 0..ny), then y-edges.
    const auto x_edge_id = [nx](int i, int j) { return j * nx + i; };
    const int n_x_edges = nx * (ny + 1);
    const auto y_edge_id = [nx, n_x_edges](int i, int j) { return n_x_edges + j * (nx + 1) + i; };
    mesh->edges.resize(n_x_edges + (nx + 1) * ny);

    const double inv_hx2 = 1.0 / (hx * hx), inv_hy2 = 1.0 / (hy * hy);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            EdgeCellMesh::Edge& e = mesh->edges[x_edge_id(i, j)];
            e.i = dof(i, j);
            e.j = dof(i + 1, j);
            e.inv_h2 = inv_hx2;
            if (j >= 1) e.cell0 = cell_id(i, j - 1);
            if (j <= ny - 1) e.cell1 = cell_id(i, j);
            e.w0 = e.cell0 >= 0 ? area * 0.5 * inv_hx2 : 0.0;
            e.w1 = e.cell1 >= 0 ? area * 0.5 * inv_hx2 : 0.0;
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            EdgeCellMesh::Edge& e = mesh->edges[y_edge_id(i, j)];
            e.i = dof(i, j);
            e.j = dof(i, j + 1);
            e.inv_h2 = inv_hy2;
            if (i >= 1) e.cell0 = cell_id(i - 1, j);
            if (i <= nx - 1) e.cell1 = cell_id(i, j);
            e.w0 = e.cell0 >= 0 ? area * 0.5 * inv_hy2 : 0.0;
            e.w1 = e.cell1 >= 0 ? area * 0.5 * inv_hy2 : 0.0;
        }
    }

    mesh->cells.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            EdgeCellMesh::Cell& c = mesh->cells[cell_id(i, j)];
            const bool conducting = in_plate(i, j);
            c.area = area;
            c.conducting = conducting;
            c.kappa = conducting ? kappa : 0.0;
            c.slope_weight = 0.5;  // two parallel edges per direction
            c.edges = {x_edge_id(i, j), x_edge_id(i, j + 1), y_edge_id(i, j), y_edge_id(i + 1, j)};
            c.n_edges = 4;
            // cyclic corner order: sw, se, ne, nw
            c.nodes = {dof(i, j), dof(i + 1, j), dof(i + 1, j + 1), dof(i, j + 1)};
            c.n_nodes = 4;
            if (conducting) mesh->conducting_cells.push_back(cell_id(i, j));
        }
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
    const auto load_cell = [&](int i, int j, double polarity) {
        for (auto [ci, cj] : {std::pair{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}) {
            const int d = dof(ci, cj);
            if (d >= 0) sys.source_pattern[d] += polarity * area / 4.0;
        }
    };
    for (int j = cj0; j < cj1; ++j) {
        for (int i = cl0; i < cl1; ++i) load_cell(i, j, 1.0);
        for (int i = cr0; i < cr1; ++i) load_cell(i, j, -1.0);
    }

    sys.conductive_mask.assign(sys.n_dofs, 0);
    for (int cid : mesh->conducting_cells) {
        const EdgeCellMesh::Cell& c = mesh->cells[cid];
        for (int k = 0; k < c.n_nodes; ++k) {
            if (c.nodes[k] >= 0) sys.conductive_mask[c.nodes[k]] = 1;
        }
    }

    Probe plate_probe;
    plate_probe.name = "plate_B";
    plate_probe.kind = Probe::Kind::cell_flux;
    for (int j = pj0; j < pj1; ++j) {
        for (int i = pi0; i < pi1; ++i) plate_probe.indices.push_back(cell_id(i, j));
    }
    sys.probes.push_back(plate_probe);

    Probe gap_probe;
    gap_probe.name = "gap_B";
    gap_probe.kind = Probe::Kind::cell_flux;
    for (int j = pj0; j < pj1; ++j) gap_probe.indices.push_back(cell_id(pi0 - 1, j));
    sys.probes.push_back(gap_probe);

    GeometryInfo& g = sys.geometry;
    g.kind = GeometryInfo::Kind::plate2d;
    g.h = std::min(hx, hy);
    g.kappa = kappa;
    g.nx = nx;
    g.ny = ny;
    g.lx = geo.lx;
    g.ly = geo.ly;
    g.plate_i0 = pi0;
    g.plate_i1 = pi1;
    g.plate_j0 = pj0;
    g.plate_j1 = pj1;
    g.coil_left_i0 = cl0;
    g.coil_left_i1 = cl1;
    g.coil_right_i0 = cr0;
    g.coil_right_i1 = cr1;
    g.coil_j0 = cj0;
    g.coil_j1 = cj1;
    return sys;
}

}  // namespace mqsim
