#include "mqsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mqsim/errors.hpp"
#include "mqsim/version.hpp"

namespace mqsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, path + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& name) {
    KeyValueConfig kv;
    kv.name_ = name;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line_no, name + ":" + std::to_string(line_no) +
                                           ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(line_no, name + ":" + std::to_string(line_no) + ": empty key");
        }
        if (kv.entries_.count(key)) {
            throw ConfigError(line_no, name + ":" + std::to_string(line_no) + ": duplicate key '" +
                                           key + "' (first at line " +
                                           std::to_string(kv.entries_[key].line) + ")");
        }
        kv.entries_[key] = Entry{value, line_no};
    }
    return kv;
}

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.touched = true;
    return &it->second;
}

void KeyValueConfig::fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    const int line = it == entries_.end() ? 0 : it->second.line;
    throw ConfigError(line, name_ + ":" + std::to_string(line) + ": key '" + key + "' " + what);
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

int KeyValueConfig::line_of(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    char* end = nullptr;
    const double v = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || *end != '\0') fail(key, "expects a number, got '" + e->value + "'");
    return v;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    char* end = nullptr;
    const long v = std::strtol(e->value.c_str(), &end, 10);
    if (end == e->value.c_str() || *end != '\0') {
        fail(key, "expects an integer, got '" + e->value + "'");
    }
    return static_cast<int>(v);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "on" || e->value == "true" || e->value == "1") return true;
    if (e->value == "off" || e->value == "false" || e->value == "0") return false;
    fail(key, "expects on/off, got '" + e->value + "'");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) {
    const Entry* e = find(key);
    std::vector<double> out;
    if (!e) return out;
    std::istringstream in(e->value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0') fail(key, "has a non-numeric list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) {
    std::vector<int> out;
    for (double v : get_double_list(key)) out.push_back(static_cast<int>(v));
    return out;
}

std::string KeyValueConfig::require_string(const std::string& key) {
    const Entry* e = find(key);
    if (!e) fail(key, "is required but missing");
    return e->value;
}

double KeyValueConfig::require_double(const std::string& key) {
    if (!has(key)) fail(key, "is required but missing");
    return get_double(key, 0.0);
}

int KeyValueConfig::require_int(const std::string& key) {
    if (!has(key)) fail(key, "is required but missing");
    return get_int(key, 0);
}

void KeyValueConfig::reject_unknown_keys() const {
    for (const auto& [key, entry] : entries_) {
        if (!entry.touched) {
            throw ConfigError(entry.line, name_ + ":" + std::to_string(entry.line) +
                                              ": unknown key '" + key + "'");
        }
    }
}

RunConfig RunConfig::from_file(const std::string& path) {
    KeyValueConfig kv = KeyValueConfig::parse_file(path);
    return from_kv(kv);
}

RunConfig RunConfig::from_kv(KeyValueConfig& kv) {
    RunConfig cfg;

    const std::string kind = kv.get_string("problem.kind", "slab");
    if (kind == "slab") {
        cfg.problem = ProblemKind::slab;
    } else if (kind == "plate2d") {
        cfg.problem = ProblemKind::plate2d;
    } else if (kind == "import") {
        cfg.problem = ProblemKind::import_files;
    } else {
        throw ConfigError(kv.line_of("problem.kind"),
                          kv.source_name() + ":" + std::to_string(kv.line_of("problem.kind")) +
                              ": problem.kind must be slab, plate2d, or import");
    }

    cfg.n_cells = kv.get_int("problem.n_cells", cfg.n_cells);
    cfg.length = kv.get_double("problem.length", cfg.length);
    cfg.slab_fraction = kv.get_double("problem.slab_fraction", cfg.slab_fraction);
    cfg.kappa = kv.get_double("problem.kappa", cfg.kappa);
    cfg.nx = kv.get_int("problem.nx", cfg.nx);
    cfg.ny = kv.get_int("problem.ny", cfg.ny);
    cfg.plate.lx = kv.get_double("problem.lx", cfg.plate.lx);
    cfg.plate.ly = kv.get_double("problem.ly", cfg.plate.ly);
    cfg.plate.plate_x0 = kv.get_double("problem.plate_x0", cfg.plate.plate_x0);
    cfg.plate.plate_x1 = kv.get_double("problem.plate_x1", cfg.plate.plate_x1);
    cfg.plate.plate_y0 = kv.get_double("problem.plate_y0", cfg.plate.plate_y0);
    cfg.plate.plate_y1 = kv.get_double("problem.plate_y1", cfg.plate.plate_y1);
    cfg.plate.coil_width = kv.get_double("problem.coil_width", cfg.plate.coil_width);
    cfg.plate.coil_gap = kv.get_double("problem.coil_gap", cfg.plate.coil_gap);
    cfg.plate.coil_y0 = kv.get_double("problem.coil_y0", cfg.plate.coil_y0);
    cfg.plate.coil_y1 = kv.get_double("problem.coil_y1", cfg.plate.coil_y1);
    if (cfg.problem == ProblemKind::import_files) {
        cfg.import_paths.m = kv.require_string("problem.m_path");
        cfg.import_paths.k = kv.require_string("problem.k_path");
        cfg.import_paths.source_pattern = kv.require_string("problem.source_path");
        cfg.import_paths.conductive_mask = kv.require_string("problem.mask_path");
    }

    const std::string mat = kv.get_string("material.kind", "linear");
    if (mat == "linear") {
        cfg.material = MaterialModel::linear(kv.get_double("material.nu_linear", kNuVacuum));
    } else if (mat == "brauer") {
        cfg.material = MaterialModel::brauer(kv.get_double("material.k1", 0.3774),
                                             kv.get_double("material.k2", 2.970),
                                             kv.get_double("material.k3", 388.33));
    } else {
        throw ConfigError(kv.line_of("material.kind"),
                          kv.source_name() + ": material.kind must be linear or brauer");
    }

    cfg.source.amplitude = kv.get_double("source.amplitude", cfg.source.amplitude);
    cfg.source.tau = kv.get_double("source.tau", cfg.source.tau);

    const std::string solver = kv.get_string("solver.kind", "explicit_schur");
    if (solver == "explicit_schur") {
        cfg.solver = SolverKind::explicit_schur;
    } else if (solver == "implicit_euler") {
        cfg.solver = SolverKind::implicit_euler;
    } else {
        throw ConfigError(kv.line_of("solver.kind"),
                          kv.source_name() + ": solver.kind must be explicit_schur or implicit_euler");
    }

    StepperConfig& st = cfg.stepper;
    st.dt = kv.get_double("stepper.dt", st.dt);
    st.safety = kv.get_double("stepper.safety", st.safety);
    st.tol_pcg = kv.get_double("stepper.tol_pcg", st.tol_pcg);
    st.max_pcg_iter = kv.get_int("stepper.max_pcg_iter", st.max_pcg_iter);
    st.n_cg_acc = kv.get_int("stepper.n_cg_acc", st.n_cg_acc);
    st.max_subspace = kv.get_int("stepper.max_subspace", st.max_subspace);
    st.cfl_recheck_interval = kv.get_int("stepper.cfl_recheck_interval", st.cfl_recheck_interval);
    st.galerkin_audit_samples = kv.get_int("stepper.galerkin_audit_samples", 0);
    st.output_stride = kv.get_int("run.output_stride", st.output_stride);
    st.seed = static_cast<std::uint64_t>(kv.get_int("seed", 2026));
    st.cfl_tol = kv.get_double("stepper.cfl_tol", st.cfl_tol);

    const std::string start = kv.get_string("stepper.start_mode", "cspe");
    if (start == "cspe") {
        st.start_mode = StartMode::cspe;
    } else if (start == "previous") {
        st.start_mode = StartMode::previous;
    } else if (start == "zero") {
        st.start_mode = StartMode::zero;
    } else {
        throw ConfigError(kv.line_of("stepper.start_mode"),
                          kv.source_name() + ": stepper.start_mode must be cspe, previous, or zero");
    }

    const std::string mass = kv.get_string("stepper.mass_mode", "consistent");
    if (mass == "consistent") {
        st.mass_mode = MassMode::consistent;
    } else if (mass == "lumped") {
        st.mass_mode = MassMode::lumped;
    } else {
        throw ConfigError(kv.line_of("stepper.mass_mode"),
                          kv.source_name() + ": stepper.mass_mode must be consistent or lumped");
    }

    const std::string gate = kv.get_string("stepper.append_gate", "conjunctive");
    if (gate == "conjunctive") {
        st.conjunctive_append_gate = true;
    } else if (gate == "growth_only") {
        st.conjunctive_append_gate = false;
    } else {
        throw ConfigError(kv.line_of("stepper.append_gate"),
                          kv.source_name() + ": stepper.append_gate must be conjunctive or growth_only");
    }

    cfg.newton.tol_newton = kv.get_double("newton.tol", cfg.newton.tol_newton);
    cfg.newton.max_newton_iter = kv.get_int("newton.max_iter", cfg.newton.max_newton_iter);
    cfg.newton.tol_linear = kv.get_double("newton.tol_linear", cfg.newton.tol_linear);
    cfg.newton.regularization_eps =
        kv.get_double("newton.regularization_eps", cfg.newton.regularization_eps);
    cfg.newton_dt = kv.get_double("newton.dt", cfg.newton_dt);

    cfg.t_end = kv.get_double("run.t_end", cfg.t_end);
    cfg.sweep_tols = kv.get_double_list("sweep.tol_pcg");
    cfg.sweep_accs = kv.get_int_list("sweep.n_cg_acc");

    kv.reject_unknown_keys();

    if (!(cfg.t_end >= 0.0)) {
        throw ConfigError(kv.line_of("run.t_end"), kv.source_name() + ": run.t_end must be >= 0");
    }
    if (!(st.tol_pcg > 0.0 && st.tol_pcg < 1.0)) {
        throw ConfigError(kv.line_of("stepper.tol_pcg"),
                          kv.source_name() + ": stepper.tol_pcg must lie in (0, 1)");
    }
    if (st.n_cg_acc < 1 || st.max_subspace < 1) {
        throw ConfigError(kv.line_of("stepper.n_cg_acc"),
                          kv.source_name() + ": stepper.n_cg_acc and stepper.max_subspace must be >= 1");
    }
    return cfg;
}

DiscreteSystem RunConfig::build_system() const {
    switch (problem) {
        case ProblemKind::slab:
            return build_slab_model(n_cells, length, slab_fraction, kappa, material, source);
        case ProblemKind::plate2d:
            return build_plate_model_2d(nx, ny, plate, kappa, material, source);
        case ProblemKind::import_files:
            return load_matrix_market(import_paths, source);
    }
    throw ModelError("unreachable problem kind");
}

void write_run_metadata(const std::string& path, const RunConfig& cfg, const RunMetrics& metrics,
                        std::string_view solver_name) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Code::file_missing, "cannot write '" + path + "'");
    out << "# run metadata (same key-value format as the config)\n";
    out << "version = " << kVersion << "\n";
    out << "solver.kind = " << solver_name << "\n";
    out << "problem.kind = "
        << (cfg.problem == ProblemKind::slab
                ? "slab"
                : (cfg.problem == ProblemKind::plate2d ? "plate2d" : "import"))
        << "\n";
    out << "material.kind = "
        << (cfg.material.kind == MaterialModel::Kind::linear ? "linear" : "brauer") << "\n";
    out << "source.amplitude = " << fmt(cfg.source.amplitude) << "\n";
    out << "source.tau = " << fmt(cfg.source.tau) << "\n";
    out << "run.t_end = " << fmt(cfg.t_end) << "\n";
    out << "stepper.tol_pcg = " << fmt(cfg.stepper.tol_pcg) << "\n";
    out << "stepper.n_cg_acc = " << cfg.stepper.n_cg_acc << "\n";
    out << "stepper.start_mode = " << start_mode_name(cfg.stepper.start_mode) << "\n";
    out << "stepper.max_subspace = " << cfg.stepper.max_subspace << "\n";
    out << "stepper.mass_mode = "
        << (cfg.stepper.mass_mode == MassMode::consistent ? "consistent" : "lumped") << "\n";
    out << "seed = " << cfg.stepper.seed << "\n";
    out << "derived.lambda_max = " << fmt(metrics.lambda_max0) << "\n";
    out << "derived.dt_max = " << fmt(metrics.dt_max0) << "\n";
    out << "derived.dt_initial = " << fmt(metrics.dt_initial) << "\n";
    out << "derived.dt_final = " << fmt(metrics.dt_final) << "\n";
    out << "derived.steps = " << metrics.steps << "\n";
    out << "derived.max_subspace_cols = " << metrics.max_subspace_cols << "\n";
    out << "derived.avg_pcg_iters_source = " << fmt(metrics.avg_iters_source) << "\n";
    out << "derived.avg_pcg_iters_coupling = " << fmt(metrics.avg_iters_coupling) << "\n";
    out << "derived.avg_pcg_iters_mass = " << fmt(metrics.avg_iters_mass) << "\n";
    out << "derived.max_constraint_ratio = " << fmt(metrics.max_constraint_ratio) << "\n";
    out << "derived.knn_products = " << metrics.knn_products << "\n";
    out << "derived.accepted_updates = " << metrics.accepted_updates << "\n";
    out << "derived.cfl_rechecks = " << metrics.cfl_rechecks << "\n";
    out << "derived.newton_iters_total = " << metrics.newton_iters_total << "\n";
    for (const std::string& w : metrics.warnings) out << "# warning: " << w << "\n";
}

}  // namespace mqsim
