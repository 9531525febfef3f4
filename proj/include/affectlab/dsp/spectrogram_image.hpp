#pragma once

#include <span>

#include "affectlab/dsp/spectral.hpp"
#include "affectlab/image/image.hpp"

namespace affectlab::dsp {

// STFT power up to fmax -> log10(p + 1e-12) -> min-max -> Parula, one pixel
// per (bin, frame) with the highest bin in row 0, then bilinear resize to
// size x size. A flat log spectrum maps to Parula's lowest color.
RgbImage spectrogram_image(std::span<const double> signal, double fs, double fmax, const WindowConfig& window,
                           int size = kEmbeddingImageSize);

}  // namespace affectlab::dsp
