#include "ugdf/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ugdf::scene {

namespace {

struct Layer {
  double depth;
  double disparity;
  double cell_px;      // texture feature size in pixels
  double speed_px;     // horizontal texture scroll per frame
  double lo, hi;       // luminance levels
  double phase;
  // coverage rectangles in left-view pixel coordinates; empty = full screen
  struct Rect {
    double x0, x1;
    int y0, y1;
  };
  std::vector<Rect> rects;

  bool covers(double x, int y) const {
    if (rects.empty()) return true;
    for (const auto& r : rects)
      if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) return true;
    return false;
  }

  double sample(double u, int y, TextureMode mode) const {
    const double s = (u + phase) / cell_px;
    const double t = static_cast<double>(y) / cell_px;
    double on;
    switch (mode) {
      case TextureMode::kChecker:
        on = (static_cast<int64_t>(std::floor(s)) + static_cast<int64_t>(std::floor(t))) % 2 == 0
                 ? 1.0
                 : 0.0;
        break;
      case TextureMode::kStripes:
        on = static_cast<int64_t>(std::floor(s)) % 2 == 0 ? 1.0 : 0.0;
        break;
      case TextureMode::kNoise:
      default:
        // smooth deterministic pseudo-noise in [0,1]
        on = 0.5 + 0.25 * std::sin(2.0 * M_PI * s) * std::cos(2.0 * M_PI * t) +
             0.25 * std::sin(2.0 * M_PI * (0.37 * s + 0.61 * t));
        on = std::clamp(on, 0.0, 1.0);
        break;
    }
    return lo + (hi - lo) * on;
  }
};

}  // namespace

StereoSample generate_scene(const SceneConfig& cfg, const CameraRig& rig) {
  if (rig.focal_px <= 0 || rig.baseline_m <= 0 || rig.d_max <= 0)
    throw std::invalid_argument("generate_scene: rig parameters must be > 0");
  if (cfg.width < 1 || cfg.height < 1 || cfg.frames < 1 || cfg.layer_count < 1)
    throw std::invalid_argument("generate_scene: bad scene dimensions");
  if (!(0 < cfg.d_near && cfg.d_near <= cfg.d_far && cfg.d_far <= rig.d_max))
    throw std::invalid_argument("generate_scene: need 0 < d_near <= d_far <= d_max");

  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<Layer> layers(static_cast<size_t>(cfg.layer_count));
  const double lmin = std::log(cfg.d_near), lmax = std::log(cfg.d_far);
  for (auto& l : layers) {
    l.depth = std::exp(lmin + (lmax - lmin) * u01(rng));
    l.lo = 0.05 + 0.35 * u01(rng);
    l.hi = l.lo + 0.25 + 0.3 * u01(rng);
    l.phase = u01(rng) * 64.0;
  }
  // near-to-far; the farthest layer becomes the full-screen background
  std::sort(layers.begin(), layers.end(),
            [](const Layer& a, const Layer& b) { return a.depth < b.depth; });
  for (auto& l : layers) {
    l.disparity = rig.focal_px * rig.baseline_m / l.depth;
    // perspective cue: feature size and scroll speed shrink with depth
    l.cell_px = std::clamp(rig.focal_px * 0.25 / l.depth, 2.0, 32.0);
    l.speed_px = cfg.motion_px_per_frame * (cfg.d_near / l.depth);
  }
  for (size_t i = 0; i + 1 < layers.size(); ++i) {
    const int nrect = 1 + static_cast<int>(u01(rng) * 2.0);
    for (int r = 0; r < nrect; ++r) {
      Layer::Rect rect;
      const double wfrac = 0.2 + 0.4 * u01(rng);
      const double hfrac = 0.25 + 0.5 * u01(rng);
      rect.x0 = u01(rng) * cfg.width * (1.0 - wfrac);
      rect.x1 = rect.x0 + wfrac * cfg.width;
      rect.y0 = static_cast<int>(u01(rng) * cfg.height * (1.0 - hfrac));
      rect.y1 = rect.y0 + static_cast<int>(hfrac * cfg.height);
      layers[i].rects.push_back(rect);
    }
  }

  StereoSample out;
  out.left_clip.frames = Tensor<float>({cfg.frames, cfg.height, cfg.width});
  out.right_clip.frames = Tensor<float>({cfg.frames, cfg.height, cfg.width});
  out.right_depth_gt = DepthMap({cfg.height, cfg.width});
  out.right_disparity_gt = DisparityMap({cfg.height, cfg.width});

  // right-view GT: nearest layer covering each pixel (coverage shifted left
  // by the layer disparity)
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      const Layer* top = nullptr;
      for (const auto& l : layers)
        if (l.covers(x + l.disparity, y)) {
          top = &l;
          break;
        }
      out.right_depth_gt.at2(y, x) = static_cast<float>(top->depth);
      out.right_disparity_gt.at2(y, x) = static_cast<float>(top->disparity);
    }

  for (int f = 0; f < cfg.frames; ++f)
    for (int y = 0; y < cfg.height; ++y)
      for (int x = 0; x < cfg.width; ++x) {
        for (const auto& l : layers)
          if (l.covers(x, y)) {
            out.left_clip.frames.at3(f, y, x) =
                static_cast<float>(l.sample(x + f * l.speed_px, y, cfg.texture_mode));
            break;
          }
        for (const auto& l : layers)
          if (l.covers(x + l.disparity, y)) {
            out.right_clip.frames.at3(f, y, x) = static_cast<float>(
                l.sample(x + l.disparity + f * l.speed_px, y, cfg.texture_mode));
            break;
          }
      }
  return out;
}

DisparityMap depth_to_disparity(const DepthMap& depth, const CameraRig& rig) {
  DisparityMap out(depth.shape);
  const double fb = rig.focal_px * rig.baseline_m;
  for (int64_t i = 0; i < depth.size(); ++i) {
    const float d = depth[i];
    if (std::isnan(d)) {
      out[i] = d;
      continue;
    }
    if (d <= 0.0f) throw std::domain_error("depth_to_disparity: non-positive depth");
    out[i] = static_cast<float>(fb / d);
  }
  return out;
}

DepthMap disparity_to_depth(const DisparityMap& disp, const CameraRig& rig) {
  DepthMap out(disp.shape);
  const double fb = rig.focal_px * rig.baseline_m;
  for (int64_t i = 0; i < disp.size(); ++i) {
    const float d = disp[i];
    if (std::isnan(d)) {
      out[i] = d;
      continue;
    }
    if (d <= 0.0f) throw std::domain_error("disparity_to_depth: non-positive disparity");
    out[i] = static_cast<float>(fb / d);
  }
  return out;
}

NormalizedDepth normalize_depth(const DepthMap& depth, const CameraRig& rig) {
  NormalizedDepth out;
  out.values = Tensor<float>(depth.shape);
  for (int64_t i = 0; i < depth.size(); ++i) {
    const float d = depth[i];
    if (std::isnan(d)) {
      out.values[i] = d;
      continue;
    }
    if (d <= 0.0f) throw std::domain_error("normalize_depth: non-positive depth");
    const double n = d / rig.d_max;
    if (n > 1.0) {
      out.values[i] = 1.0f;
      ++out.clamped;
    } else {
      out.values[i] = static_cast<float>(n);
    }
  }
  return out;
}

DepthMap denormalize_depth(const Tensor<float>& normalized, const CameraRig& rig) {
  DepthMap out(normalized.shape);
  for (int64_t i = 0; i < normalized.size(); ++i)
    out[i] = std::isnan(normalized[i])
                 ? normalized[i]
                 : static_cast<float>(normalized[i] * rig.d_max);
  return out;
}

}  // namespace ugdf::scene
