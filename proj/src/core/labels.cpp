#include "affectlab/core/labels.hpp"

#include "affectlab/core/error.hpp"
#include "affectlab/core/csv.hpp"

namespace affectlab {

ClassLabel binarize(double rating, double midpoint, const RatingScale& scale) {
  if (!scale.contains(rating))
    throw Error("rating " + format_double(rating) + " outside scale [" + format_double(scale.min) + ", " +
                format_double(scale.max) + "]");
  return binarize(rating, midpoint);
}

ClassLabel binarize(double rating, double midpoint) {
  return rating > midpoint ? ClassLabel::High : ClassLabel::Low;
}

EmotionClass emotion_class(ClassLabel valence, ClassLabel arousal) {
  const bool hv = valence == ClassLabel::High;
  const bool ha = arousal == ClassLabel::High;
  if (hv && ha) return EmotionClass::HVHA;
  if (!hv && ha) return EmotionClass::LVHA;
  if (!hv && !ha) return EmotionClass::LVLA;
  return EmotionClass::HVLA;
}

}  // namespace affectlab
