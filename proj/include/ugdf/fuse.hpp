#pragma once

#include "ugdf/scene_gen.hpp"

namespace ugdf::fuse {

// Per-pixel branch confidences in (0,1); same layout as depth maps.
using UncertaintyMap = Tensor<float>;

struct FusionResult {
  scene::DepthMap fused_depth;
  Tensor<float> mask;       // 1 = monocular chosen, 0 = stereo, NaN = invalid
  Tensor<float> threshold;  // sigma_dis, meters
};

// sigma_dis = d_max * exp(2(sm - ss)) / (1 + exp(2(sm - ss)))
Tensor<float> distance_threshold(const UncertaintyMap& sigma_m,
                                 const UncertaintyMap& sigma_s, double d_max);

// mask = 1 where mono depth > threshold, else 0 (ties -> stereo)
Tensor<float> fusion_mask(const scene::DepthMap& mono_depth, const Tensor<float>& threshold);

FusionResult fuse(const scene::DepthMap& mono, const scene::DepthMap& stereo,
                  const Tensor<float>& mask, const Tensor<float>& threshold);

// 50/50 linear blend baseline
scene::DepthMap ensemble_fuse(const scene::DepthMap& mono, const scene::DepthMap& stereo);

}  // namespace ugdf::fuse
