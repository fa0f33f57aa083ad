#pragma once

#include <cstdint>

#include "ugdf/tensor.hpp"

namespace ugdf::spike {

// Bit-packed binary spike tensor, (t, row, col) row-major, MSB first.
struct SpikeVoxel {
  int t = 0, h = 0, w = 0;
  std::vector<uint8_t> bits;

  int64_t bit_count() const { return static_cast<int64_t>(t) * h * w; }
  static int64_t packed_bytes(int t, int h, int w) {
    return (static_cast<int64_t>(t) * h * w + 7) / 8;
  }
  bool get(int ti, int ri, int ci) const {
    const int64_t i = (static_cast<int64_t>(ti) * h + ri) * w + ci;
    return (bits[static_cast<size_t>(i >> 3)] >> (7 - (i & 7))) & 1;
  }
  void set(int ti, int ri, int ci, bool v) {
    const int64_t i = (static_cast<int64_t>(ti) * h + ri) * w + ci;
    const uint8_t m = static_cast<uint8_t>(1u << (7 - (i & 7)));
    if (v)
      bits[static_cast<size_t>(i >> 3)] |= m;
    else
      bits[static_cast<size_t>(i >> 3)] &= static_cast<uint8_t>(~m);
  }
};

// Normalized luminance per time step, frames [T,H,W] in [0,1].
struct IntensityClip {
  Tensor<float> frames;
  double dt = 1.0;

  int t() const { return frames.shape[0]; }
  int h() const { return frames.shape[1]; }
  int w() const { return frames.shape[2]; }
};

enum class ResetMode { kToZero, kSubtractThreshold };

struct FiringConfig {
  double theta = 1.0;
  ResetMode reset_mode = ResetMode::kToZero;
};

struct SpikeSequenceSet {
  int window_width = 0;
  std::vector<Tensor<float>> sequences;  // each [n,H,W], values 0/1
};

// Integrate-and-fire: per pixel accumulate I*dt; on reaching theta emit a
// spike and reset per the configured mode.
SpikeVoxel integrate_and_fire(const IntensityClip& clip, const FiringConfig& cfg);

SpikeVoxel pack_voxel(const Tensor<float>& frames);
Tensor<float> unpack_voxel(const SpikeVoxel& voxel);

// s = floor(T/n) windows; trailing frames are dropped.
SpikeSequenceSet chunk_windows(const SpikeVoxel& voxel, int n);

// Per-pixel spike rate over the time axis, [H,W] in [0,1].
Tensor<float> rate_map(const SpikeVoxel& voxel);

// Magnitudes of the first k DFT coefficients over the time axis (DC first),
// each divided by T; output [k,H,W].
Tensor<float> temporal_frequency_features(const SpikeVoxel& voxel, int k);

}  // namespace ugdf::spike
