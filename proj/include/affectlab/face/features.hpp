#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "affectlab/core/types.hpp"
#include "affectlab/embedding/provider.hpp"
#include "affectlab/image/image.hpp"
#include "affectlab/learn/pca.hpp"

namespace affectlab::face {

inline constexpr std::size_t kGeometryFeatures = 30;

// Distance definitions are listed in docs/face_geometry.md. Horizontal
// distances are |dx| / w, vertical ones |dy| / h, oblique ones the Euclidean
// length / sqrt(w h), with (w, h) the frame's own face box.
const std::array<std::string, kGeometryFeatures>& geometry_names();

// Left/right symmetric neutral face in the unit box (y down), mirrored about x = 0.5.
const std::array<Point2, kLandmarkCount>& reference_landmarks();

std::array<double, kGeometryFeatures> frame_geometry(const std::array<Point2, kLandmarkCount>& points,
                                                     const FaceBox& box);

// Per-feature mean, 95th percentile (linear interpolation) and population
// std, in that block order: 3 * d values.
FeatureBlock aggregate_track(const std::vector<std::vector<double>>& per_frame,
                             std::span<const std::string> names, const std::string& trial_id = {});

// frame_geometry over every frame, then aggregate_track: 90 features.
FeatureBlock geometry_features(const FaceLandmarkTrack& track);

// Embeds each 224x224 frame (face profile) and aggregates mean/p95/std per
// dimension: 3 * dim values.
Eigen::VectorXd face_embedding_aggregate(std::span<const RgbImage> frames, const embedding::EmbeddingProvider& provider,
                                         const std::string& trial_id = {});

// The aggregate projected by a fitted PCA with at most 30 components.
FeatureBlock face_embedding_features(std::span<const RgbImage> frames, const embedding::EmbeddingProvider& provider,
                                     const learn::PcaModel& pca, const std::string& trial_id = {});

}  // namespace affectlab::face
