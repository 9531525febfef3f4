#pragma once

#include <span>
#include <vector>

namespace affectlab::dsp {

// Centered moving average of round(window_s * fs) samples. Near the edges the
// window shrinks to the in-range part, so the output length equals the input.
std::vector<double> moving_average(std::span<const double> signal, double fs, double window_s);

// Zero-phase Butterworth band-pass: 4th-order high-pass at `low` and 4th-order
// low-pass at `high`, run forward then backward over an odd-reflected
// extension of the signal.
std::vector<double> bandpass(std::span<const double> signal, double fs, double low, double high);

// Rescale to [0, 1]. A constant input maps to all zeros.
std::vector<double> minmax_scale(std::span<const double> signal);

}  // namespace affectlab::dsp
