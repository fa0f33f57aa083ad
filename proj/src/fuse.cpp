#include "ugdf/fuse.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ugdf::fuse {

namespace {
constexpr float kNan = std::numeric_limits<float>::quiet_NaN();

void check_shapes(const Tensor<float>& a, const Tensor<float>& b, const char* op) {
  if (a.shape != b.shape)
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}
}  // namespace

Tensor<float> distance_threshold(const UncertaintyMap& sigma_m,
                                 const UncertaintyMap& sigma_s, double d_max) {
  check_shapes(sigma_m, sigma_s, "distance_threshold");
  Tensor<float> out(sigma_m.shape);
  for (int64_t i = 0; i < out.size(); ++i) {
    const double z = 2.0 * (static_cast<double>(sigma_m[i]) - static_cast<double>(sigma_s[i]));
    const double e = std::exp(z);
    out[i] = static_cast<float>(d_max * e / (1.0 + e));
  }
  return out;
}

Tensor<float> fusion_mask(const scene::DepthMap& mono_depth, const Tensor<float>& threshold) {
  check_shapes(mono_depth, threshold, "fusion_mask");
  Tensor<float> out(mono_depth.shape);
  for (int64_t i = 0; i < out.size(); ++i)
    out[i] = (mono_depth[i] > threshold[i]) ? 1.0f : 0.0f;
  return out;
}

FusionResult fuse(const scene::DepthMap& mono, const scene::DepthMap& stereo,
                  const Tensor<float>& mask, const Tensor<float>& threshold) {
  check_shapes(mono, stereo, "fuse");
  check_shapes(mono, mask, "fuse");
  FusionResult out;
  out.fused_depth = scene::DepthMap(mono.shape);
  out.mask = mask;
  out.threshold = threshold;
  for (int64_t i = 0; i < mono.size(); ++i) {
    const bool mono_ok = !std::isnan(mono[i]);
    const bool stereo_ok = !std::isnan(stereo[i]);
    if (!mono_ok && !stereo_ok) {
      out.fused_depth[i] = kNan;
      out.mask[i] = kNan;
    } else if (!stereo_ok) {
      out.fused_depth[i] = mono[i];
      out.mask[i] = 1.0f;
    } else if (!mono_ok) {
      out.fused_depth[i] = stereo[i];
      out.mask[i] = 0.0f;
    } else {
      out.fused_depth[i] = mask[i] != 0.0f ? mono[i] : stereo[i];
    }
  }
  return out;
}

scene::DepthMap ensemble_fuse(const scene::DepthMap& mono, const scene::DepthMap& stereo) {
  check_shapes(mono, stereo, "ensemble_fuse");
  scene::DepthMap out(mono.shape);
  for (int64_t i = 0; i < mono.size(); ++i) {
    const bool mono_ok = !std::isnan(mono[i]);
    const bool stereo_ok = !std::isnan(stereo[i]);
    if (mono_ok && stereo_ok)
      out[i] = 0.5f * mono[i] + 0.5f * stereo[i];
    else if (mono_ok)
      out[i] = mono[i];
    else if (stereo_ok)
      out[i] = stereo[i];
    else
      out[i] = kNan;
  }
  return out;
}

}  // namespace ugdf::fuse
