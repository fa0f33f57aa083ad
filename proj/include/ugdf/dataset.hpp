#pragma once

#include "ugdf/io.hpp"
#include "ugdf/scene_gen.hpp"
#include "ugdf/spike_sim.hpp"

namespace ugdf::data {

struct BuildConfig {
  int scene_count = 60;
  scene::SceneConfig scene;  // per-scene seeds are derived from `seed`
  scene::CameraRig rig;
  spike::FiringConfig firing;
  double train_frac = 0.7;
  double test_frac = 0.2;
  double val_frac = 0.1;
  uint32_t seed = 1;
  std::string out_dir;
};

// Generates scenes, runs integrate-and-fire on both views, writes SPKV/DPTH
// files under out_dir and returns the manifest (also written to
// out_dir/manifest.jsonl). Split allocation floors test/val counts and gives
// the remainder to train.
std::vector<io::ManifestRecord> build_dataset(const BuildConfig& cfg);

struct SplitCounts {
  int train = 0, test = 0, val = 0;
};
SplitCounts split_counts(int total, double train_frac, double test_frac, double val_frac);

}  // namespace ugdf::data
