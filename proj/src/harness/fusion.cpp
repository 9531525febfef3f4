#include "affectlab/harness/fusion.hpp"

#include "affectlab/core/error.hpp"

namespace affectlab::harness {

FeatureBlock fuse(std::span<const FeatureBlock> blocks) {
  if (blocks.empty()) throw Error("fuse: no blocks");
  FeatureBlock out;
  out.trial_id = blocks.front().trial_id;
  for (const auto& b : blocks) {
    if (b.trial_id != out.trial_id)
      throw Error("fuse: trial id mismatch ('" + out.trial_id + "' vs '" + b.trial_id + "')");
    if (b.names.size() != b.values.size()) throw Error("fuse: block '" + b.family + "' has names/values mismatch");
    out.family += (out.family.empty() ? "" : "+") + b.family;
    out.names.insert(out.names.end(), b.names.begin(), b.names.end());
    out.values.insert(out.values.end(), b.values.begin(), b.values.end());
  }
  return out;
}

std::vector<FeatureBlock> slice(const FeatureBlock& fused, std::span<const std::string> families,
                                std::span<const std::size_t> sizes) {
  if (families.size() != sizes.size()) throw Error("slice: families/sizes mismatch");
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  if (total != fused.size()) throw Error("slice: sizes do not add up to the block length");
  std::vector<FeatureBlock> out;
  std::size_t at = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    FeatureBlock b;
    b.trial_id = fused.trial_id;
    b.family = families[i];
    const auto first = static_cast<std::ptrdiff_t>(at), last = static_cast<std::ptrdiff_t>(at + sizes[i]);
    b.names.assign(fused.names.begin() + first, fused.names.begin() + last);
    b.values.assign(fused.values.begin() + first, fused.values.begin() + last);
    out.push_back(std::move(b));
    at += sizes[i];
  }
  return out;
}

}  // namespace affectlab::harness
