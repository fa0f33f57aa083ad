#include "ugdf/trainer.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace ugdf::train {

namespace {

struct Sample {
  spike::SpikeVoxel left;
  spike::SpikeVoxel right;
  scene::DepthMap depth_gt;
  scene::CameraRig rig;
};

Sample load_sample(const io::ManifestRecord& rec) {
  Sample s;
  s.left = io::read_spkv(rec.left_spkv);
  s.right = io::read_spkv(rec.right_spkv);
  s.depth_gt = io::read_dpth(rec.right_depth).depth;
  s.rig = rec.rig;
  return s;
}

Tensor<float> finite_mask(const Tensor<float>& t) {
  Tensor<float> m(t.shape);
  for (int64_t i = 0; i < t.size(); ++i) m[i] = std::isfinite(t[i]) ? 1.0f : 0.0f;
  return m;
}

constexpr float kMinDisparityPx = 0.5f;

// stereo disparity -> normalized depth, differentiable
Var<float> stereo_depth_norm(const Var<float>& disp_full, const scene::CameraRig& rig) {
  const float fb = static_cast<float>(rig.focal_px * rig.baseline_m);
  Tensor<float> num(disp_full->val.shape, fb / static_cast<float>(rig.d_max));
  auto clamped = ops::clamp(disp_full, kMinDisparityPx, 1e9f);
  auto norm = ops::div(make_var<float>(std::move(num), false), clamped);
  return ops::clamp(norm, 1e-4f, 1.0f);
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  if (cfg.mode != "base" && cfg.mode != "ugdf")
    throw std::invalid_argument("train: mode must be base or ugdf");

  auto manifest = io::read_manifest(cfg.manifest_path);
  std::vector<Sample> samples;
  for (const auto& rec : manifest)
    if (rec.split == "train") samples.push_back(load_sample(rec));
  if (samples.empty()) throw std::runtime_error("train: manifest has no train split");

  net::UgdfNet<float> model(cfg.net);
  AdamState<float> adam(model.parameters());
  adam.lr = static_cast<float>(cfg.lr);
  const int decay_at = cfg.decay_at >= 0 ? cfg.decay_at : cfg.iterations * 35 / 200;

  std::ofstream log((fs::path(cfg.out_dir) / "train_log.jsonl").string());
  std::mt19937 order_rng(cfg.seed);
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  loss::LossWeights<float> weights;
  weights.alpha.assign(static_cast<size_t>(cfg.net.hourglass_count), 1.0f);
  if (cfg.net.hourglass_count == 3) weights.alpha = {0.5f, 0.7f, 1.0f};

  TrainResult result;
  double forward_ms_total = 0;
  size_t cursor = order.size();

  for (int it = 0; it < cfg.iterations; ++it) {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), order_rng);
      cursor = 0;
    }
    const Sample& s = samples[order[cursor++]];
    if (it == decay_at) adam.lr *= static_cast<float>(cfg.lr_decay);

    const auto t0 = std::chrono::steady_clock::now();
    auto out = model.forward(s.left, s.right, /*training=*/true);
    forward_ms_total +=
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    auto gt_disp = scene::depth_to_disparity(s.depth_gt, s.rig);
    auto gt_norm = scene::normalize_depth(s.depth_gt, s.rig).values;
    auto mask = finite_mask(gt_norm);

    auto l_disp = loss::disparity_loss(out.stereo_disp_full, gt_disp, mask, weights);
    auto l_depth = loss::silog_depth_loss(out.mono_depth_norm, gt_norm, mask, weights.eta);
    auto total = ops::add(l_disp, l_depth);

    loss::LossBreakdown<float> bd;
    bd.disp = l_disp->val[0];
    bd.depth = l_depth->val[0];
    if (cfg.mode == "ugdf") {
      auto ster_norm = stereo_depth_norm(out.stereo_disp_full.back(), s.rig);
      auto l_munc = loss::uncertainty_loss(out.mono_depth_norm, gt_norm, out.mono_sigma, mask);
      auto l_sunc = loss::uncertainty_loss(ster_norm, gt_norm, out.stereo_sigma, mask);
      total = ops::add(total, ops::add(l_munc, l_sunc));
      bd.mono_unc = l_munc->val[0];
      bd.ster_unc = l_sunc->val[0];
    }
    bd.total = total->val[0];
    result.history.push_back(bd);

    zero_grad(model.parameters());
    backward(total);
    adam_step(model.parameters(), adam);

    nlohmann::json j{{"step", it},
                     {"loss_disp", bd.disp},
                     {"loss_depth", bd.depth},
                     {"total", bd.total},
                     {"lr", adam.lr}};
    if (cfg.mode == "ugdf") {
      j["loss_mono_unc"] = bd.mono_unc;
      j["loss_ster_unc"] = bd.ster_unc;
    }
    log << j.dump() << "\n";
  }

  result.forward_ms_mean = forward_ms_total / std::max(1, cfg.iterations);
  result.checkpoint_path = (fs::path(cfg.out_dir) / "model.ckpt").string();
  io::write_checkpoint(result.checkpoint_path, model.state_arrays());
  return result;
}

BranchMaps infer_sample(net::UgdfNet<float>& model, const io::ManifestRecord& rec) {
  const Sample s = load_sample(rec);
  auto out = model.forward(s.left, s.right, /*training=*/false);

  const int h = s.depth_gt.shape[0], w = s.depth_gt.shape[1];
  BranchMaps maps;
  maps.gt = s.depth_gt;
  maps.mono = scene::DepthMap({h, w});
  maps.stereo = scene::DepthMap({h, w});
  maps.sigma_m = fuse::UncertaintyMap({h, w});
  maps.sigma_s = fuse::UncertaintyMap({h, w});
  const float fb = static_cast<float>(s.rig.focal_px * s.rig.baseline_m);
  for (int64_t i = 0; i < maps.mono.size(); ++i) {
    maps.mono[i] = out.mono_depth_norm->val[i] * static_cast<float>(s.rig.d_max);
    maps.stereo[i] = fb / std::max(out.stereo_disp_full.back()->val[i], kMinDisparityPx);
    maps.sigma_m[i] = out.mono_sigma->val[i];
    maps.sigma_s[i] = out.stereo_sigma->val[i];
  }
  maps.threshold = fuse::distance_threshold(maps.sigma_m, maps.sigma_s, s.rig.d_max);
  maps.fusion_mask = fuse::fusion_mask(maps.mono, maps.threshold);
  maps.fused = fuse::fuse(maps.mono, maps.stereo, maps.fusion_mask, maps.threshold).fused_depth;
  maps.ensemble = fuse::ensemble_fuse(maps.mono, maps.stereo);
  return maps;
}

EvalResult evaluate(const EvalConfig& cfg) {
  auto manifest = io::read_manifest(cfg.manifest_path);
  std::vector<io::ManifestRecord> records;
  for (const auto& rec : manifest)
    if (rec.split == cfg.split) records.push_back(rec);
  if (records.empty())
    throw std::runtime_error("evaluate: no samples in split '" + cfg.split + "'");

  net::UgdfNet<float> model(cfg.net);
  model.load_state_arrays(io::read_checkpoint(cfg.checkpoint_path));

  std::vector<double> edges = cfg.bin_edges;
  if (edges.empty()) edges = {0.0, 25.0, 50.0, 100.0, 200.0, records[0].rig.d_max};

  std::map<std::string, eval::MetricsAccum> accs;
  std::map<std::string, std::vector<float>> pooled;
  std::vector<float> pooled_gt;
  for (const auto& rec : records) {
    auto maps = infer_sample(model, rec);
    const std::map<std::string, const scene::DepthMap*> branches{
        {"mono", &maps.mono},
        {"stereo", &maps.stereo},
        {"fused", &maps.fused},
        {"ensemble", &maps.ensemble}};
    for (const auto& [name, pred] : branches) {
      accs[name].merge(eval::accumulate_metrics(*pred, maps.gt));
      auto& dst = pooled[name];
      dst.insert(dst.end(), pred->v.begin(), pred->v.end());
    }
    pooled_gt.insert(pooled_gt.end(), maps.gt.v.begin(), maps.gt.v.end());
  }

  EvalResult out;
  out.sample_count = static_cast<int>(records.size());
  for (const auto& [name, acc] : accs) out.branch_reports[name] = acc.report();

  const int n = static_cast<int>(pooled_gt.size());
  scene::DepthMap gt_flat({n});
  gt_flat.v = pooled_gt;
  std::map<std::string, scene::DepthMap> preds_flat;
  for (auto& [name, vals] : pooled) {
    scene::DepthMap m({n});
    m.v = vals;
    preds_flat[name] = std::move(m);
  }
  out.intervals = eval::interval_accuracy(preds_flat, gt_flat, edges);
  return out;
}

}  // namespace ugdf::train
