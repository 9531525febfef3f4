#pragma once

#include <span>
#include <vector>

#include "affectlab/core/types.hpp"

namespace affectlab::harness {

// Concatenation in block order. All blocks must come from the same trial;
// the result's family is the families joined with '+'.
FeatureBlock fuse(std::span<const FeatureBlock> blocks);

// Splits a fused block back into pieces of the given sizes and families.
std::vector<FeatureBlock> slice(const FeatureBlock& fused, std::span<const std::string> families,
                                std::span<const std::size_t> sizes);

}  // namespace affectlab::harness
