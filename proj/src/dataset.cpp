#include "ugdf/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace ugdf::data {

SplitCounts split_counts(int total, double train_frac, double test_frac, double val_frac) {
  if (std::abs(train_frac + test_frac + val_frac - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
  SplitCounts out;
  out.test = static_cast<int>(std::floor(total * test_frac));
  out.val = static_cast<int>(std::floor(total * val_frac));
  out.train = total - out.test - out.val;
  return out;
}

std::vector<io::ManifestRecord> build_dataset(const BuildConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.scene_count < 1) throw std::invalid_argument("build_dataset: scene_count < 1");
  fs::create_directories(cfg.out_dir);

  const auto counts =
      split_counts(cfg.scene_count, cfg.train_frac, cfg.test_frac, cfg.val_frac);

  std::vector<io::ManifestRecord> records;
  for (int i = 0; i < cfg.scene_count; ++i) {
    scene::SceneConfig sc = cfg.scene;
    sc.seed = cfg.seed ^ (0x9e3779b9u * static_cast<uint32_t>(i + 1));
    auto sample = scene::generate_scene(sc, cfg.rig);

    auto left_voxel = spike::integrate_and_fire(sample.left_clip, cfg.firing);
    auto right_voxel = spike::integrate_and_fire(sample.right_clip, cfg.firing);

    const std::string stem = "sample_" + std::to_string(i);
    io::ManifestRecord rec;
    rec.left_spkv = (fs::path(cfg.out_dir) / (stem + "_left.spkv")).string();
    rec.right_spkv = (fs::path(cfg.out_dir) / (stem + "_right.spkv")).string();
    rec.right_depth = (fs::path(cfg.out_dir) / (stem + "_depth.dpth")).string();
    rec.rig = cfg.rig;
    rec.seed = sc.seed;
    rec.split = i < counts.train ? "train" : (i < counts.train + counts.test ? "test" : "val");

    io::write_spkv(rec.left_spkv, left_voxel);
    io::write_spkv(rec.right_spkv, right_voxel);
    io::write_dpth(rec.right_depth, sample.right_depth_gt);
    records.push_back(std::move(rec));
  }
  io::write_manifest((fs::path(cfg.out_dir) / "manifest.jsonl").string(), records);
  return records;
}

}  // namespace ugdf::data
