#pragma once

#include <map>
#include <string>
#include <vector>

#include "mqsim/implicit.hpp"
#include "mqsim/mmio.hpp"
#include "mqsim/schur.hpp"
#include "mqsim/system.hpp"

namespace mqsim {

/// Flat `section.key = value` file: one assignment per line, '#' comments.
/// Unknown keys are rejected (typo safety) with line-anchored messages.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& name = "<string>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::vector<double> get_double_list(const std::string& key);
    std::vector<int> get_int_list(const std::string& key);

    std::string require_string(const std::string& key);
    double require_double(const std::string& key);
    int require_int(const std::string& key);

    /// Throws ConfigError on the first key never read by a getter.
    void reject_unknown_keys() const;
    int line_of(const std::string& key) const;
    const std::string& source_name() const { return name_; }

  private:
    struct Entry {
        std::string value;
        int line;
        mutable bool touched = false;
    };
    std::map<std::string, Entry> entries_;
    std::string name_;

    const Entry* find(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

enum class ProblemKind { slab, plate2d, import_files };
enum class SolverKind { explicit_schur, implicit_euler };

/// Everything one run or sweep needs, parsed and validated.
struct RunConfig {
    ProblemKind problem = ProblemKind::slab;
    // slab
    int n_cells = 128;
    double length = 1.0;
    double slab_fraction = 0.25;
    // plate
    int nx = 32, ny = 32;
    PlateGeometry plate;
    // shared
    double kappa = 5.96e7;
    MaterialModel material = MaterialModel::linear(kNuVacuum);
    SourceWaveform source{1e6, 0.05};
    ImportPaths import_paths;

    SolverKind solver = SolverKind::explicit_schur;
    StepperConfig stepper;
    NewtonConfig newton;
    double newton_dt = 0.0;  // 0 = stepper dt (or CFL dt_max) / 10

    double t_end = 0.12;
    std::vector<double> sweep_tols;
    std::vector<int> sweep_accs;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_kv(KeyValueConfig& kv);

    DiscreteSystem build_system() const;
};

/// Same key-value format as the config, plus derived quantities.
void write_run_metadata(const std::string& path, const RunConfig& cfg, const RunMetrics& metrics,
                        std::string_view solver_name);

}  // namespace mqsim
