#pragma once

#include "affectlab/core/types.hpp"

namespace affectlab {

// High iff rating > midpoint. Ratings exactly at the midpoint are Low.
ClassLabel binarize(double rating, double midpoint, const RatingScale& scale);
ClassLabel binarize(double rating, double midpoint);

EmotionClass emotion_class(ClassLabel valence, ClassLabel arousal);

}  // namespace affectlab
