#include "mqsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mqsim/errors.hpp"

namespace mqsim {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double interp(const Trajectory& tr, std::size_t probe, double t) {
    const auto& ts = tr.times;
    const auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return tr.values.front()[probe];
    if (it == ts.end()) return tr.values.back()[probe];
    const std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    const std::size_t lo = hi - 1;
    const double span = ts[hi] - ts[lo];
    const double w = span > 0.0 ? (t - ts[lo]) / span : 0.0;
    return (1.0 - w) * tr.values[lo][probe] + w * tr.values[hi][probe];
}

}  // namespace

void Trajectory::push(double t, Vector row) {
    if (row.size() != probe_names.size()) {
        throw DimensionError("trajectory row length does not match probe count");
    }
    times.push_back(t);
    values.push_back(std::move(row));
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw IoError(IoError::Code::file_missing, "cannot write '" + path + "'");
    out << "t";
    for (const auto& name : traj.probe_names) out << "," << name;
    out << "\n";
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        out << fmt(traj.times[r]);
        for (double v : traj.values[r]) out << "," << fmt(v);
        out << "\n";
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoError::Code::file_missing, "cannot open '" + path + "'");
    Trajectory tr;
    std::string line;
    if (!std::getline(in, line)) throw IoError(IoError::Code::parse, path + ": empty file");
    {
        std::istringstream head(line);
        std::string field;
        bool first = true;
        while (std::getline(head, field, ',')) {
            if (first) {
                if (field != "t") throw IoError(IoError::Code::parse, path + ": first column must be t");
                first = false;
            } else {
                tr.probe_names.push_back(field);
            }
        }
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        Vector vals;
        double t = 0.0;
        bool first = true;
        while (std::getline(row, field, ',')) {
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str()) {
                throw IoError(IoError::Code::parse,
                              path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
            }
            if (first) {
                t = v;
                first = false;
            } else {
                vals.push_back(v);
            }
        }
        if (vals.size() != tr.probe_names.size()) {
            throw IoError(IoError::Code::parse,
                          path + ":" + std::to_string(line_no) + ": wrong column count");
        }
        tr.push(t, std::move(vals));
    }
    return tr;
}

CompareReport compare_trajectories(const Trajectory& a, const Trajectory& b) {
    if (a.probe_names != b.probe_names) {
        throw DimensionError("compare: probe schemas do not match");
    }
    if (a.times.empty() || b.times.empty()) {
        throw DimensionError("compare: empty trajectory");
    }
    // Evaluate on the coarser grid, restricted to the overlapping range.
    const Trajectory& coarse = a.times.size() <= b.times.size() ? a : b;
    const double t_lo = std::max(a.times.front(), b.times.front());
    const double t_hi = std::min(a.times.back(), b.times.back());

    CompareReport rep;
    for (std::size_t p = 0; p < a.probe_names.size(); ++p) {
        double peak = 0.0;
        for (const auto& row : b.values) peak = std::max(peak, std::abs(row[p]));
        CompareReport::PerProbe pp;
        pp.name = a.probe_names[p];
        double sq_sum = 0.0;
        int count = 0;
        for (double t : coarse.times) {
            if (t < t_lo || t > t_hi) continue;
            const double dev = std::abs(interp(a, p, t) - interp(b, p, t));
            const double rel = peak > 0.0 ? dev / peak : (dev > 0.0 ? HUGE_VAL : 0.0);
            pp.max_rel = std::max(pp.max_rel, rel);
            sq_sum += rel * rel;
            ++count;
        }
        if (count == 0) throw DimensionError("compare: time ranges do not overlap");
        pp.rms_rel = std::sqrt(sq_sum / count);
        rep.samples = count;
        rep.worst_max_rel = std::max(rep.worst_max_rel, pp.max_rel);
        rep.probes.push_back(pp);
    }
    return rep;
}

}  // namespace mqsim
