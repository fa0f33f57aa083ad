#pragma once

#include <map>
#include <string>

#include "ugdf/scene_gen.hpp"
#include "ugdf/spike_sim.hpp"
#include "ugdf/tensor.hpp"

namespace ugdf::io {

// Malformed files throw FormatError carrying the byte offset of the first
// violation.
struct FormatError : std::runtime_error {
  int64_t byte_offset;
  FormatError(const std::string& msg, int64_t offset)
      : std::runtime_error(msg + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
};

// SPKV: magic "SPKV1\0"; u32 LE T, H, W; ceil(T*H*W/8) payload bytes,
// (t,row,col) row-major, MSB first.
void write_spkv(const std::string& path, const spike::SpikeVoxel& voxel);
spike::SpikeVoxel read_spkv(const std::string& path);

// DPTH: magic "DPTH1\0"; u32 LE H, W; H*W LE f32, meters, row-major; NaN =
// invalid pixel.
void write_dpth(const std::string& path, const scene::DepthMap& depth);
struct DpthFile {
  scene::DepthMap depth;
  int64_t invalid_count = 0;
};
DpthFile read_dpth(const std::string& path);

// Parameter checkpoint: magic "UGDF1\0"; u32 array count; per array u32 name
// length, name bytes, u32 rank, u32 extents, LE f32 values.
void write_checkpoint(const std::string& path,
                      const std::vector<std::pair<std::string, Tensor<float>>>& arrays);
std::vector<std::pair<std::string, Tensor<float>>> read_checkpoint(const std::string& path);

// Line-delimited dataset manifest, one JSON record per sample.
struct ManifestRecord {
  std::string left_spkv;
  std::string right_spkv;
  std::string right_depth;
  scene::CameraRig rig;
  std::string split;  // train | val | test
  uint32_t seed = 0;
};
void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> read_manifest(const std::string& path);

}  // namespace ugdf::io
