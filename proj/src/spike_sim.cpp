#include "ugdf/spike_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace ugdf::spike {

SpikeVoxel integrate_and_fire(const IntensityClip& clip, const FiringConfig& cfg) {
  if (cfg.theta <= 0.0) throw std::invalid_argument("integrate_and_fire: theta must be > 0");
  if (clip.frames.rank() != 3 || clip.t() < 1 || clip.h() < 1 || clip.w() < 1)
    throw std::invalid_argument("integrate_and_fire: bad clip shape");
  for (const float v : clip.frames.v)
    if (!(v >= 0.0f && v <= 1.0f))
      throw std::invalid_argument("integrate_and_fire: intensity outside [0,1]");

  const int t = clip.t(), h = clip.h(), w = clip.w();
  SpikeVoxel out;
  out.t = t;
  out.h = h;
  out.w = w;
  out.bits.assign(static_cast<size_t>(SpikeVoxel::packed_bytes(t, h, w)), 0);

#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int ti = 0; ti < t; ++ti) {
        acc += static_cast<double>(clip.frames.at3(ti, r, c)) * clip.dt;
        if (acc >= cfg.theta) {
          out.set(ti, r, c, true);
          if (cfg.reset_mode == ResetMode::kToZero)
            acc = 0.0;
          else
            acc -= cfg.theta;
        }
      }
    }
  return out;
}

SpikeVoxel pack_voxel(const Tensor<float>& frames) {
  if (frames.rank() != 3) throw std::invalid_argument("pack_voxel: rank != 3");
  for (const float v : frames.v)
    if (v != 0.0f && v != 1.0f)
      throw std::invalid_argument("pack_voxel: non-binary element");
  SpikeVoxel out;
  out.t = frames.shape[0];
  out.h = frames.shape[1];
  out.w = frames.shape[2];
  out.bits.assign(static_cast<size_t>(SpikeVoxel::packed_bytes(out.t, out.h, out.w)), 0);
  for (int64_t i = 0; i < frames.size(); ++i)
    if (frames[i] != 0.0f)
      out.bits[static_cast<size_t>(i >> 3)] |= static_cast<uint8_t>(1u << (7 - (i & 7)));
  return out;
}

Tensor<float> unpack_voxel(const SpikeVoxel& voxel) {
  Tensor<float> out({voxel.t, voxel.h, voxel.w});
  for (int64_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<float>((voxel.bits[static_cast<size_t>(i >> 3)] >> (7 - (i & 7))) & 1);
  return out;
}

SpikeSequenceSet chunk_windows(const SpikeVoxel& voxel, int n) {
  if (n < 1 || n > voxel.t)
    throw std::invalid_argument("chunk_windows: window width out of range [1, T]");
  SpikeSequenceSet out;
  out.window_width = n;
  const int s = voxel.t / n;
  out.sequences.reserve(static_cast<size_t>(s));
  for (int k = 0; k < s; ++k) {
    Tensor<float> seq({n, voxel.h, voxel.w});
    for (int ti = 0; ti < n; ++ti)
      for (int r = 0; r < voxel.h; ++r)
        for (int c = 0; c < voxel.w; ++c)
          seq.at3(ti, r, c) = voxel.get(k * n + ti, r, c) ? 1.0f : 0.0f;
    out.sequences.push_back(std::move(seq));
  }
  return out;
}

Tensor<float> rate_map(const SpikeVoxel& voxel) {
  Tensor<float> out({voxel.h, voxel.w});
  for (int ti = 0; ti < voxel.t; ++ti)
    for (int r = 0; r < voxel.h; ++r)
      for (int c = 0; c < voxel.w; ++c)
        if (voxel.get(ti, r, c)) out.v[static_cast<size_t>(r) * voxel.w + c] += 1.0f;
  const float inv = 1.0f / static_cast<float>(voxel.t);
  for (auto& v : out.v) v *= inv;
  return out;
}

Tensor<float> temporal_frequency_features(const SpikeVoxel& voxel, int k) {
  const int t = voxel.t;
  if (k < 1 || k > t / 2 + 1)
    throw std::invalid_argument("temporal_frequency_features: k out of range [1, T/2+1]");

  // per-coefficient cos/sin tables
  std::vector<double> cos_tab(static_cast<size_t>(k) * t), sin_tab(static_cast<size_t>(k) * t);
  for (int f = 0; f < k; ++f)
    for (int ti = 0; ti < t; ++ti) {
      const double ang = -2.0 * M_PI * f * ti / t;
      cos_tab[static_cast<size_t>(f) * t + ti] = std::cos(ang);
      sin_tab[static_cast<size_t>(f) * t + ti] = std::sin(ang);
    }

  Tensor<float> out({k, voxel.h, voxel.w});
#pragma omp parallel for schedule(static)
  for (int r = 0; r < voxel.h; ++r)
    for (int c = 0; c < voxel.w; ++c) {
      // gather the spike train once per pixel
      std::vector<double> s(static_cast<size_t>(t));
      for (int ti = 0; ti < t; ++ti) s[static_cast<size_t>(ti)] = voxel.get(ti, r, c) ? 1.0 : 0.0;
      for (int f = 0; f < k; ++f) {
        double re = 0.0, im = 0.0;
        const double* ct = &cos_tab[static_cast<size_t>(f) * t];
        const double* st = &sin_tab[static_cast<size_t>(f) * t];
        for (int ti = 0; ti < t; ++ti) {
          re += s[static_cast<size_t>(ti)] * ct[ti];
          im += s[static_cast<size_t>(ti)] * st[ti];
        }
        out.at3(f, r, c) = static_cast<float>(std::sqrt(re * re + im * im) / t);
      }
    }
  return out;
}

}  // namespace ugdf::spike
