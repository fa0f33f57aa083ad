#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ugdf/spike_sim.hpp"

using namespace ugdf;
using namespace ugdf::spike;

namespace {

IntensityClip constant_clip(float value, int t = 100, int h = 3, int w = 4) {
  IntensityClip clip;
  clip.frames = Tensor<float>({t, h, w}, value);
  return clip;
}

int64_t spike_count(const SpikeVoxel& v, int r, int c) {
  int64_t n = 0;
  for (int t = 0; t < v.t; ++t) n += v.get(t, r, c) ? 1 : 0;
  return n;
}

int64_t total_spikes(const SpikeVoxel& v) {
  int64_t n = 0;
  for (int t = 0; t < v.t; ++t)
    for (int r = 0; r < v.h; ++r)
      for (int c = 0; c < v.w; ++c) n += v.get(t, r, c) ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("integrate_and_fire: constant intensity fixtures") {
  FiringConfig cfg;  // theta=1, reset-to-zero
  const std::pair<float, int64_t> fixtures[] = {
      {0.0f, 0}, {0.25f, 25}, {0.5f, 50}, {1.0f, 100}};
  for (auto [intensity, expected] : fixtures) {
    auto v = integrate_and_fire(constant_clip(intensity), cfg);
    for (int r = 0; r < v.h; ++r)
      for (int c = 0; c < v.w; ++c) CHECK(spike_count(v, r, c) == expected);
  }
}

TEST_CASE("integrate_and_fire: I=0.5 spikes exactly at even steps") {
  auto v = integrate_and_fire(constant_clip(0.5f, 10, 1, 1), FiringConfig{});
  for (int t = 0; t < 10; ++t) CHECK(v.get(t, 0, 0) == (t % 2 == 1));
}

TEST_CASE("integrate_and_fire: reset mode count identity for constant input") {
  // subtract-threshold keeps the residual, so the count is exactly
  // floor(sum I*dt / theta) for constant I
  FiringConfig cfg;
  cfg.reset_mode = ResetMode::kSubtractThreshold;
  auto v = integrate_and_fire(constant_clip(0.3f, 100, 1, 1), cfg);
  CHECK(spike_count(v, 0, 0) == 30);

  FiringConfig zero;
  auto vz = integrate_and_fire(constant_clip(0.3f, 100, 1, 1), zero);
  CHECK(spike_count(vz, 0, 0) <= 30);
}

TEST_CASE("integrate_and_fire: input validation") {
  FiringConfig bad;
  bad.theta = 0.0;
  CHECK_THROWS_AS(integrate_and_fire(constant_clip(0.5f), bad), std::invalid_argument);
  auto clip = constant_clip(0.5f);
  clip.frames[0] = 1.5f;
  CHECK_THROWS_AS(integrate_and_fire(clip, FiringConfig{}), std::invalid_argument);
  clip.frames[0] = -0.1f;
  CHECK_THROWS_AS(integrate_and_fire(clip, FiringConfig{}), std::invalid_argument);
}

TEST_CASE("integrate_and_fire: monotonicity in intensity, both reset modes") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    auto lo = random_uniform<float>({20, 4, 5}, rng, 0.0f, 0.8f);
    auto hi = lo;
    auto bump = random_uniform<float>({20, 4, 5}, rng, 0.0f, 0.2f);
    for (int64_t i = 0; i < hi.size(); ++i) hi[i] += bump[i];
    for (ResetMode mode : {ResetMode::kToZero, ResetMode::kSubtractThreshold}) {
      FiringConfig cfg;
      cfg.reset_mode = mode;
      auto v_lo = integrate_and_fire({lo, 1.0}, cfg);
      auto v_hi = integrate_and_fire({hi, 1.0}, cfg);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 5; ++c)
          CHECK(spike_count(v_hi, r, c) >= spike_count(v_lo, r, c));
    }
  }
}

TEST_CASE("integrate_and_fire: spike count bound and determinism") {
  std::mt19937 rng(43);
  auto frames = random_uniform<float>({50, 3, 3}, rng, 0.0f, 1.0f);
  FiringConfig cfg;
  cfg.theta = 0.7;
  auto v1 = integrate_and_fire({frames, 1.0}, cfg);
  auto v2 = integrate_and_fire({frames, 1.0}, cfg);
  CHECK(v1.bits == v2.bits);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double mass = 0;
      for (int t = 0; t < 50; ++t) mass += frames.at3(t, r, c);
      CHECK(spike_count(v1, r, c) <=
            static_cast<int64_t>(std::floor(mass / cfg.theta)) + 1);
    }
}

TEST_CASE("pack/unpack: fixtures and round trip") {
  Tensor<float> zeros({2, 2, 2});
  auto pz = pack_voxel(zeros);
  CHECK(pz.bits == std::vector<uint8_t>{0});

  Tensor<float> one({2, 2, 2});
  one.at3(0, 0, 0) = 1.0f;
  CHECK(pack_voxel(one).bits == std::vector<uint8_t>{0x80});

  std::mt19937 rng(47);
  Tensor<float> rnd({3, 5, 7});
  std::bernoulli_distribution bit(0.4);
  for (auto& x : rnd.v) x = bit(rng) ? 1.0f : 0.0f;
  auto packed = pack_voxel(rnd);
  CHECK(static_cast<int64_t>(packed.bits.size()) == SpikeVoxel::packed_bytes(3, 5, 7));
  auto un = unpack_voxel(packed);
  CHECK(un.shape == rnd.shape);
  CHECK(un.v == rnd.v);

  rnd[0] = 0.5f;
  CHECK_THROWS_AS(pack_voxel(rnd), std::invalid_argument);
}

TEST_CASE("chunk_windows: counts and frame preservation") {
  std::mt19937 rng(53);
  Tensor<float> frames({100, 2, 3});
  std::bernoulli_distribution bit(0.5);
  for (auto& x : frames.v) x = bit(rng) ? 1.0f : 0.0f;
  auto voxel = pack_voxel(frames);

  auto s24 = chunk_windows(voxel, 24);
  CHECK(s24.sequences.size() == 4);
  CHECK(s24.window_width == 24);
  auto s100 = chunk_windows(voxel, 100);
  CHECK(s100.sequences.size() == 1);
  auto s16 = chunk_windows(voxel, 16);
  CHECK(s16.sequences.size() == 6);

  // concatenating the windows reproduces the first s*n frames
  for (int wi = 0; wi < 4; ++wi)
    for (int t = 0; t < 24; ++t)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c)
          CHECK(s24.sequences[wi].at3(t, r, c) == frames.at3(wi * 24 + t, r, c));

  CHECK_THROWS_AS(chunk_windows(voxel, 0), std::invalid_argument);
  CHECK_THROWS_AS(chunk_windows(voxel, 101), std::invalid_argument);
}

TEST_CASE("rate_map: fixtures") {
  Tensor<float> frames({100, 1, 2});
  for (int t = 0; t < 50; ++t) frames.at3(t, 0, 0) = 1.0f;  // 50 spikes
  for (int t = 0; t < 100; ++t) frames.at3(t, 0, 1) = 1.0f;  // 100 spikes
  auto rm = rate_map(pack_voxel(frames));
  CHECK(rm.at2(0, 0) == doctest::Approx(0.5));
  CHECK(rm.at2(0, 1) == doctest::Approx(1.0));

  auto zero = rate_map(pack_voxel(Tensor<float>({10, 2, 2})));
  for (const float v : zero.v) CHECK(v == 0.0f);
}

TEST_CASE("temporal_frequency_features: constant and alternating trains") {
  Tensor<float> ones({100, 1, 1}, 1.0f);
  auto f = temporal_frequency_features(pack_voxel(ones), 2);
  CHECK(f.at3(0, 0, 0) == doctest::Approx(1.0));
  CHECK(f.at3(1, 0, 0) == doctest::Approx(0.0).epsilon(1e-6));

  auto fz = temporal_frequency_features(pack_voxel(Tensor<float>({100, 1, 1})), 4);
  for (const float v : fz.v) CHECK(v == doctest::Approx(0.0));

  // 1,0,1,0,... over T=100: DC 0.5, Nyquist (k=50) 0.5, zero elsewhere
  Tensor<float> alt({100, 1, 1});
  for (int t = 0; t < 100; t += 2) alt.at3(t, 0, 0) = 1.0f;
  auto fa = temporal_frequency_features(pack_voxel(alt), 51);
  CHECK(fa.at3(0, 0, 0) == doctest::Approx(0.5));
  CHECK(fa.at3(50, 0, 0) == doctest::Approx(0.5));
  for (int k = 1; k < 50; ++k)
    CHECK(fa.at3(k, 0, 0) == doctest::Approx(0.0).epsilon(1e-6));

  CHECK_THROWS_AS(temporal_frequency_features(pack_voxel(ones), 0), std::invalid_argument);
  CHECK_THROWS_AS(temporal_frequency_features(pack_voxel(ones), 52), std::invalid_argument);
}
