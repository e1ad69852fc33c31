#pragma once

namespace mqsim {

/// Ramped source drive: amplitude * (1 - exp(-t / tau)).
struct SourceWaveform {
    double amplitude = 0.0;  // peak source current density scale, A/m^2
    double tau = 1.0;        // ramp time constant, s
};

double source_at(const SourceWaveform& w, double t);

}  // namespace mqsim
