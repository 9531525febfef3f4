#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "affectlab/core/types.hpp"

namespace affectlab {

// Headerless numeric CSV: rows = time samples, columns = channels.
// Returns [channel][time]. Non-finite values are an error.
std::vector<std::vector<double>> read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels);

// Landmark CSV: t, x1..x49, y1..y49, bx, by, bw, bh. An optional header row
// is skipped. Rows with empty or non-finite landmark fields are frames where
// the upstream detector failed; they are dropped.
FaceLandmarkTrack read_landmark_csv(const std::filesystem::path& path, const std::string& trial_id);
void write_landmark_csv(const std::filesystem::path& path, const FaceLandmarkTrack& track);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace affectlab
