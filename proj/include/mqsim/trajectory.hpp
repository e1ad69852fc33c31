#pragma once

#include <string>
#include <vector>

#include "mqsim/csr.hpp"

namespace mqsim {

/// Probe samples over time. CSV schema: `t,<probe_1>,...,<probe_k>`.
struct Trajectory {
    std::vector<std::string> probe_names;
    std::vector<double> times;
    std::vector<Vector> values;  // one row per time sample

    void push(double t, Vector row);
};

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

/// Deviation report of trajectory `a` against reference `b`.
///
/// Both are evaluated on the coarser of the two time grids (linear
/// interpolation, overlapping range only). Deviations are normalized by the
/// reference probe's peak magnitude, so a uniformly scaled copy (x 1.05)
/// reports exactly 0.05.
struct CompareReport {
    struct PerProbe {
        std::string name;
        double max_rel = 0.0;
        double rms_rel = 0.0;
    };
    std::vector<PerProbe> probes;
    double worst_max_rel = 0.0;
    int samples = 0;

    bool pass(double tol) const { return worst_max_rel <= tol; }
};

CompareReport compare_trajectories(const Trajectory& a, const Trajectory& b);

}  // namespace mqsim
