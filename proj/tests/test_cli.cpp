#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mqsim/trajectory.hpp"

// End-to-end checks of the installed command-line surface.

namespace {

namespace fs = std::filesystem;

struct CliDir {
    fs::path root;
    CliDir() {
        root = fs::temp_directory_path() / "mqsim_cli_test";
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~CliDir() { fs::remove_all(root); }
    std::string file(const std::string& name) const { return (root / name).string(); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string("'") + MQSIM_CLI_PATH + "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_slab_config(const std::string& path, const std::string& extra = "") {
    std::ofstream out(path);
    out << "problem.kind = slab\nproblem.n_cells = 24\nproblem.length = 0.2\n"
           "problem.slab_fraction = 0.25\nproblem.kappa = 1e7\nmaterial.kind = linear\n"
           "source.amplitude = 1e5\nsource.tau = 2e-3\nrun.t_end = 2e-3\n"
           "run.output_stride = 5\nstepper.tol_pcg = 1e-8\n"
        << extra;
}

}  // namespace

TEST_CASE("cli: run produces trajectory, step report, and metadata") {
    CliDir dir;
    write_slab_config(dir.file("cfg.kv"));
    const int rc = run_cli("--config " + dir.file("cfg.kv") + " --out " + dir.file("out") + " run");
    CHECK(rc == 0);
    CHECK(fs::exists(dir.file("out") + "/trajectory.csv"));
    CHECK(fs::exists(dir.file("out") + "/steps.csv"));
    CHECK(fs::exists(dir.file("out") + "/run_meta.kv"));

    // probe rises monotonically under the ramped drive
    const mqsim::Trajectory tr = mqsim::read_trajectory_csv(dir.file("out") + "/trajectory.csv");
    REQUIRE(tr.times.size() > 3);
    for (std::size_t i = 1; i < tr.times.size(); ++i) {
        CHECK(tr.values[i][0] >= tr.values[i - 1][0] - 1e-12);
    }
}

TEST_CASE("cli: invalid config exits with code 2 and names the line") {
    CliDir dir;
    write_slab_config(dir.file("bad.kv"), "mystery.key = 1\n");
    CHECK(run_cli("--config " + dir.file("bad.kv") + " --out " + dir.file("out") + " run") == 2);
    CHECK(run_cli("--config " + dir.file("missing.kv") + " --out " + dir.file("out") + " run") == 2);
}

TEST_CASE("cli: compare pass/fail exit codes") {
    CliDir dir;
    write_slab_config(dir.file("cfg.kv"));
    REQUIRE(run_cli("--config " + dir.file("cfg.kv") + " --out " + dir.file("a") + " run") == 0);

    // identical trajectories pass at any tolerance
    CHECK(run_cli("compare " + dir.file("a") + "/trajectory.csv " + dir.file("a") +
                  "/trajectory.csv --tol 1e-12") == 0);

    // scaled copy fails a 1% gate
    mqsim::Trajectory tr = mqsim::read_trajectory_csv(dir.file("a") + "/trajectory.csv");
    for (auto& row : tr.values) {
        for (double& v : row) v *= 1.05;
    }
    mqsim::write_trajectory_csv(dir.file("scaled.csv"), tr);
    CHECK(run_cli("compare " + dir.file("scaled.csv") + " " + dir.file("a") +
                  "/trajectory.csv --tol 0.01") == 1);
}

TEST_CASE("cli: export-model output re-imports and runs") {
    CliDir dir;
    write_slab_config(dir.file("cfg.kv"));
    REQUIRE(run_cli("--config " + dir.file("cfg.kv") + " --out " + dir.file("model") +
                    " export-model") == 0);
    std::ofstream imp(dir.file("imp.kv"));
    imp << "problem.kind = import\n"
        << "problem.m_path = " << dir.file("model") << "/M.mtx\n"
        << "problem.k_path = " << dir.file("model") << "/K.mtx\n"
        << "problem.source_path = " << dir.file("model") << "/source.txt\n"
        << "problem.mask_path = " << dir.file("model") << "/mask.txt\n"
        << "source.amplitude = 1e5\nsource.tau = 2e-3\nrun.t_end = 5e-4\n"
           "stepper.tol_pcg = 1e-8\n";
    imp.close();
    CHECK(run_cli("--config " + dir.file("imp.kv") + " --out " + dir.file("out2") + " run") == 0);
    CHECK(fs::exists(dir.file("out2") + "/trajectory.csv"));
}

TEST_CASE("cli: audit passes on a healthy run") {
    CliDir dir;
    write_slab_config(dir.file("cfg.kv"));
    CHECK(run_cli("--config " + dir.file("cfg.kv") + " --out " + dir.file("out") + " audit") == 0);
}

TEST_CASE("cli: step report schema and --seed override land in the metadata") {
    CliDir dir;
    write_slab_config(dir.file("cfg.kv"));
    REQUIRE(run_cli("--config " + dir.file("cfg.kv") + " --out " + dir.file("out") +
                    " --seed 123 run") == 0);
    std::ifstream steps(dir.file("out") + "/steps.csv");
    std::string header;
    std::getline(steps, header);
    CHECK(header == "step,t,rhs_family,pcg_iters,subspace_cols");

    std::ifstream meta(dir.file("out") + "/run_meta.kv");
    std::string text((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
    CHECK(text.find("seed = 123") != std::string::npos);
}
