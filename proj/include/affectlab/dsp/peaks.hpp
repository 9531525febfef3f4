#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace affectlab::dsp {

// Local maxima (a flat top counts once, at its middle) with height >=
// min_height. Peaks closer than min_dist_s are resolved in favour of the
// taller one; equal heights keep the earlier. Indices ascending.
std::vector<std::size_t> detect_peaks(std::span<const double> signal, double fs, double min_dist_s,
                                      double min_height);

}  // namespace affectlab::dsp
