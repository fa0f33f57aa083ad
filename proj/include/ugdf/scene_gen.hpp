#pragma once

#include "ugdf/spike_sim.hpp"
#include "ugdf/tensor.hpp"

namespace ugdf::scene {

// Depth/disparity rasters are [H,W] floats; NaN marks an invalid pixel.
using DepthMap = Tensor<float>;
using DisparityMap = Tensor<float>;

struct CameraRig {
  double focal_px = 800.0;
  double baseline_m = 0.5;
  double d_max = 1000.0;  // depth normalization ceiling
};

enum class TextureMode { kChecker, kNoise, kStripes };

struct SceneConfig {
  int width = 128;
  int height = 64;
  int frames = 100;
  int layer_count = 4;
  double d_near = 5.0;
  double d_far = 500.0;
  TextureMode texture_mode = TextureMode::kChecker;
  double motion_px_per_frame = 1.0;
  uint32_t seed = 0;
};

struct StereoSample {
  spike::IntensityClip left_clip;
  spike::IntensityClip right_clip;
  DepthMap right_depth_gt;
  DisparityMap right_disparity_gt;
};

// Composes textured fronto-parallel layers at log-uniform depths; the right
// view shifts each layer left by its disparity. Deterministic in cfg.seed.
StereoSample generate_scene(const SceneConfig& cfg, const CameraRig& rig);

DisparityMap depth_to_disparity(const DepthMap& depth, const CameraRig& rig);
DepthMap disparity_to_depth(const DisparityMap& disp, const CameraRig& rig);

struct NormalizedDepth {
  Tensor<float> values;  // (0,1], NaN at invalid pixels
  int64_t clamped = 0;   // pixels above d_max clamped to 1.0
};
NormalizedDepth normalize_depth(const DepthMap& depth, const CameraRig& rig);
DepthMap denormalize_depth(const Tensor<float>& normalized, const CameraRig& rig);

}  // namespace ugdf::scene
