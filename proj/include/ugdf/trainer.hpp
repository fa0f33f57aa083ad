#pragma once

#include "ugdf/dataset.hpp"
#include "ugdf/fuse.hpp"
#include "ugdf/loss.hpp"
#include "ugdf/metrics.hpp"
#include "ugdf/net.hpp"

namespace ugdf::train {

struct TrainConfig {
  std::string manifest_path;
  net::NetConfig net;
  std::string mode = "ugdf";  // base | ugdf
  int iterations = 300;
  double lr = 1e-3;
  double lr_decay = 0.33;  // multiplier applied once at decay_at
  int decay_at = -1;       // default: iterations * 35 / 200
  uint32_t seed = 1;
  std::string out_dir;
};

struct TrainResult {
  std::vector<loss::LossBreakdown<float>> history;
  std::string checkpoint_path;
  double forward_ms_mean = 0;
};

TrainResult train(const TrainConfig& cfg);

// Per-sample inference products for one manifest record.
struct BranchMaps {
  scene::DepthMap gt;
  scene::DepthMap mono;
  scene::DepthMap stereo;
  scene::DepthMap fused;
  scene::DepthMap ensemble;
  fuse::UncertaintyMap sigma_m;
  fuse::UncertaintyMap sigma_s;
  Tensor<float> fusion_mask;
  Tensor<float> threshold;
};
BranchMaps infer_sample(net::UgdfNet<float>& model, const io::ManifestRecord& rec);

struct EvalConfig {
  std::string manifest_path;
  std::string checkpoint_path;
  net::NetConfig net;
  std::string split = "test";
  std::vector<double> bin_edges;  // default {0,25,50,100,200,d_max}
};

struct EvalResult {
  std::map<std::string, eval::MetricsReport> branch_reports;
  eval::IntervalReport intervals;
  int sample_count = 0;
};

EvalResult evaluate(const EvalConfig& cfg);

}  // namespace ugdf::train
