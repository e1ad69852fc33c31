#include "mqsim/waveform.hpp"

#include <cmath>

#include "mqsim/errors.hpp"

namespace mqsim {

double source_at(const SourceWaveform& w, double t) {
    if (!(w.tau > 0.0)) throw ModelError("source waveform requires tau > 0");
    if (t < 0.0) throw ModelError("source waveform evaluated at negative time");
    return w.amplitude * (1.0 - std::exp(-t / w.tau));
}

}  // namespace mqsim
