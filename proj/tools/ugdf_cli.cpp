// ugdf: spike-camera depth estimation toolkit command line.
//
// Subcommands: simulate, build-dataset, train, eval, fuse, gradcheck, report.
// Option precedence is flags > config file > built-in defaults; every run
// echoes its fully resolved configuration to <out>/config.json.

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ugdf/dataset.hpp"
#include "ugdf/gradcheck.hpp"
#include "ugdf/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ugdf;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "out";
  int64_t seed = -1;   // -1: keep config/default
  int threads = 0;     // 0: library default
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("--config", "cannot open " + path);
  json j;
  is >> j;
  return j;
}

template <class T>
T cfg_get(const json& j, const std::string& section, const std::string& key, T fallback) {
  if (j.contains(section) && j[section].contains(key)) return j[section][key].get<T>();
  return fallback;
}

net::NetConfig resolve_net(const json& j) {
  net::NetConfig n;
  n.base_channels = cfg_get(j, "net", "base_channels", n.base_channels);
  n.max_disp = cfg_get(j, "net", "max_disp", n.max_disp);
  n.hourglass_count = cfg_get(j, "net", "hourglass_count", n.hourglass_count);
  n.window_width = cfg_get(j, "net", "window_width", n.window_width);
  n.fft_k = cfg_get(j, "net", "fft_k", n.fft_k);
  n.hidden_rnn_channels = cfg_get(j, "net", "hidden_rnn_channels", n.hidden_rnn_channels);
  n.encode_channels = cfg_get(j, "net", "encode_channels", n.encode_channels);
  n.hourglass_channels = cfg_get(j, "net", "hourglass_channels", n.hourglass_channels);
  n.theta = cfg_get(j, "net", "theta", n.theta);
  n.seed = cfg_get(j, "net", "seed", n.seed);
  return n;
}

json net_to_json(const net::NetConfig& n) {
  return json{{"base_channels", n.base_channels},
              {"max_disp", n.max_disp},
              {"hourglass_count", n.hourglass_count},
              {"window_width", n.window_width},
              {"fft_k", n.fft_k},
              {"hidden_rnn_channels", n.hidden_rnn_channels},
              {"encode_channels", n.encode_channels},
              {"hourglass_channels", n.hourglass_channels},
              {"theta", n.theta},
              {"seed", n.seed}};
}

scene::SceneConfig resolve_scene(const json& j) {
  scene::SceneConfig s;
  s.width = cfg_get(j, "scene", "width", s.width);
  s.height = cfg_get(j, "scene", "height", s.height);
  s.frames = cfg_get(j, "scene", "frames", s.frames);
  s.layer_count = cfg_get(j, "scene", "layer_count", s.layer_count);
  s.d_near = cfg_get(j, "scene", "d_near", s.d_near);
  s.d_far = cfg_get(j, "scene", "d_far", s.d_far);
  s.motion_px_per_frame = cfg_get(j, "scene", "motion_px_per_frame", s.motion_px_per_frame);
  const std::string tex = cfg_get<std::string>(j, "scene", "texture", "checker");
  if (tex == "checker")
    s.texture_mode = scene::TextureMode::kChecker;
  else if (tex == "noise")
    s.texture_mode = scene::TextureMode::kNoise;
  else if (tex == "stripes")
    s.texture_mode = scene::TextureMode::kStripes;
  else
    throw CLI::ValidationError("scene.texture", "unknown texture mode " + tex);
  s.seed = cfg_get<uint32_t>(j, "scene", "seed", s.seed);
  return s;
}

json scene_to_json(const scene::SceneConfig& s) {
  const char* tex = s.texture_mode == scene::TextureMode::kChecker  ? "checker"
                    : s.texture_mode == scene::TextureMode::kNoise ? "noise"
                                                                   : "stripes";
  return json{{"width", s.width},
              {"height", s.height},
              {"frames", s.frames},
              {"layer_count", s.layer_count},
              {"d_near", s.d_near},
              {"d_far", s.d_far},
              {"texture", tex},
              {"motion_px_per_frame", s.motion_px_per_frame},
              {"seed", s.seed}};
}

scene::CameraRig resolve_rig(const json& j) {
  scene::CameraRig r;
  r.focal_px = cfg_get(j, "rig", "focal_px", r.focal_px);
  r.baseline_m = cfg_get(j, "rig", "baseline_m", r.baseline_m);
  r.d_max = cfg_get(j, "rig", "d_max", r.d_max);
  return r;
}

json rig_to_json(const scene::CameraRig& r) {
  return json{{"focal_px", r.focal_px}, {"baseline_m", r.baseline_m}, {"d_max", r.d_max}};
}

void echo_config(const GlobalOpts& g, const std::string& command, const json& resolved) {
  fs::create_directories(g.out_dir);
  json j = resolved;
  j["command"] = command;
  j["threads"] = g.threads;
  std::ofstream os(fs::path(g.out_dir) / "config.json");
  os << j.dump(2) << "\n";
}

void apply_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

// --- subcommand bodies ------------------------------------------------------

int run_simulate(const GlobalOpts& g) {
  const json file_cfg = load_config(g.config_path);
  scene::SceneConfig sc = resolve_scene(file_cfg);
  scene::CameraRig rig = resolve_rig(file_cfg);
  spike::FiringConfig firing;
  firing.theta = cfg_get(file_cfg, "firing", "theta", firing.theta);
  if (g.seed >= 0) sc.seed = static_cast<uint32_t>(g.seed);

  echo_config(g, "simulate",
              json{{"scene", scene_to_json(sc)},
                   {"rig", rig_to_json(rig)},
                   {"firing", {{"theta", firing.theta}}}});

  auto sample = scene::generate_scene(sc, rig);
  auto left = spike::integrate_and_fire(sample.left_clip, firing);
  auto right = spike::integrate_and_fire(sample.right_clip, firing);
  const fs::path out(g.out_dir);
  io::write_spkv((out / "left.spkv").string(), left);
  io::write_spkv((out / "right.spkv").string(), right);
  io::write_dpth((out / "right_depth.dpth").string(), sample.right_depth_gt);

  json summary{{"left_spkv", (out / "left.spkv").string()},
               {"right_spkv", (out / "right.spkv").string()},
               {"right_depth", (out / "right_depth.dpth").string()},
               {"spikes_left", [&] {
                  int64_t n = 0;
                  for (uint8_t b : left.bits) n += __builtin_popcount(b);
                  return n;
                }()}};
  std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_build_dataset(const GlobalOpts& g, int scene_count) {
  const json file_cfg = load_config(g.config_path);
  data::BuildConfig cfg;
  cfg.scene = resolve_scene(file_cfg);
  cfg.rig = resolve_rig(file_cfg);
  cfg.firing.theta = cfg_get(file_cfg, "firing", "theta", cfg.firing.theta);
  cfg.scene_count = scene_count > 0
                        ? scene_count
                        : cfg_get(file_cfg, "dataset", "scene_count", cfg.scene_count);
  cfg.train_frac = cfg_get(file_cfg, "dataset", "train_frac", cfg.train_frac);
  cfg.test_frac = cfg_get(file_cfg, "dataset", "test_frac", cfg.test_frac);
  cfg.val_frac = cfg_get(file_cfg, "dataset", "val_frac", cfg.val_frac);
  cfg.seed = cfg_get<uint32_t>(file_cfg, "dataset", "seed", 1);
  if (g.seed >= 0) cfg.seed = static_cast<uint32_t>(g.seed);
  cfg.out_dir = g.out_dir;

  echo_config(g, "build-dataset",
              json{{"scene", scene_to_json(cfg.scene)},
                   {"rig", rig_to_json(cfg.rig)},
                   {"firing", {{"theta", cfg.firing.theta}}},
                   {"dataset",
                    {{"scene_count", cfg.scene_count},
                     {"train_frac", cfg.train_frac},
                     {"test_frac", cfg.test_frac},
                     {"val_frac", cfg.val_frac},
                     {"seed", cfg.seed}}}});

  auto records = data::build_dataset(cfg);
  int train = 0, test = 0, val = 0;
  for (const auto& r : records)
    (r.split == "train" ? train : r.split == "test" ? test : val) += 1;
  json summary{{"manifest", (fs::path(g.out_dir) / "manifest.jsonl").string()},
               {"scenes", cfg.scene_count},
               {"train", train},
               {"test", test},
               {"val", val}};
  std::ofstream(fs::path(g.out_dir) / "summary.json") << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_train(const GlobalOpts& g, const std::string& manifest, std::string mode,
              int iterations, int epochs, double lr, int window_width) {
  const json file_cfg = load_config(g.config_path);
  train::TrainConfig cfg;
  cfg.manifest_path = manifest;
  cfg.net = resolve_net(file_cfg);
  cfg.mode = !mode.empty() ? mode : cfg_get<std::string>(file_cfg, "train", "mode", cfg.mode);
  cfg.iterations =
      iterations > 0 ? iterations : cfg_get(file_cfg, "train", "iterations", cfg.iterations);
  cfg.lr = lr > 0 ? lr : cfg_get(file_cfg, "train", "lr", cfg.lr);
  cfg.lr_decay = cfg_get(file_cfg, "train", "lr_decay", cfg.lr_decay);
  cfg.decay_at = cfg_get(file_cfg, "train", "decay_at", cfg.decay_at);
  cfg.seed = cfg_get<uint32_t>(file_cfg, "train", "seed", cfg.seed);
  if (window_width > 0) cfg.net.window_width = window_width;
  if (g.seed >= 0) {
    cfg.seed = static_cast<uint32_t>(g.seed);
    cfg.net.seed = static_cast<uint32_t>(g.seed);
  }
  cfg.out_dir = g.out_dir;
  if (epochs > 0) {
    int train_count = 0;
    for (const auto& r : io::read_manifest(manifest))
      if (r.split == "train") ++train_count;
    cfg.iterations = epochs * train_count;
  }

  echo_config(g, "train",
              json{{"net", net_to_json(cfg.net)},
                   {"train",
                    {{"manifest", cfg.manifest_path},
                     {"mode", cfg.mode},
                     {"iterations", cfg.iterations},
                     {"lr", cfg.lr},
                     {"lr_decay", cfg.lr_decay},
                     {"decay_at", cfg.decay_at},
                     {"seed", cfg.seed}}}});

  auto result = train::train(cfg);
  json summary{{"checkpoint", result.checkpoint_path},
               {"iterations", cfg.iterations},
               {"first_loss", result.history.front().total},
               {"final_loss", result.history.back().total},
               {"forward_ms_mean", result.forward_ms_mean}};
  std::ofstream(fs::path(g.out_dir) / "summary.json") << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

json report_to_json(const eval::MetricsReport& r) {
  return json{{"abs_rel", r.abs_rel}, {"rmse", r.rmse},         {"sq_rel", r.sq_rel},
              {"rmse_log", r.rmse_log}, {"a1", r.a1},           {"a2", r.a2},
              {"a3", r.a3},             {"valid_pixels", r.valid_pixels}};
}

int run_eval(const GlobalOpts& g, const std::string& manifest, const std::string& checkpoint,
             const std::string& branch, const std::string& split, bool with_intervals) {
  const json file_cfg = load_config(g.config_path);
  train::EvalConfig cfg;
  cfg.manifest_path = manifest;
  cfg.checkpoint_path = checkpoint;
  cfg.net = resolve_net(file_cfg);
  cfg.split = split;
  if (file_cfg.contains("eval") && file_cfg["eval"].contains("bin_edges"))
    cfg.bin_edges = file_cfg["eval"]["bin_edges"].get<std::vector<double>>();

  echo_config(g, "eval",
              json{{"net", net_to_json(cfg.net)},
                   {"eval",
                    {{"manifest", manifest},
                     {"checkpoint", checkpoint},
                     {"branch", branch},
                     {"split", split}}}});

  auto result = train::evaluate(cfg);
  std::map<std::string, eval::MetricsReport> rows;
  if (branch == "all")
    rows = result.branch_reports;
  else if (result.branch_reports.count(branch))
    rows[branch] = result.branch_reports.at(branch);
  else
    throw CLI::ValidationError("--branch", "must be mono|stereo|fused|ensemble|all");

  const std::string table = eval::format_report_table(rows);
  std::cout << table;
  std::ofstream(fs::path(g.out_dir) / "metrics.txt") << table;
  std::ofstream(fs::path(g.out_dir) / "metrics.jsonl") << eval::format_report_jsonl(rows);
  if (with_intervals)
    std::ofstream(fs::path(g.out_dir) / "intervals.csv")
        << eval::format_interval_csv(result.intervals);
  return 0;
}

int run_fuse(const GlobalOpts& g, const std::string& mono_path, const std::string& stereo_path,
             const std::string& sigma_m_path, const std::string& sigma_s_path, double d_max) {
  echo_config(g, "fuse",
              json{{"fuse",
                    {{"mono", mono_path},
                     {"stereo", stereo_path},
                     {"sigma_m", sigma_m_path},
                     {"sigma_s", sigma_s_path},
                     {"d_max", d_max}}}});
  auto mono = io::read_dpth(mono_path).depth;
  auto stereo = io::read_dpth(stereo_path).depth;
  auto sm = io::read_dpth(sigma_m_path).depth;
  auto ss = io::read_dpth(sigma_s_path).depth;
  auto threshold = fuse::distance_threshold(sm, ss, d_max);
  auto mask = fuse::fusion_mask(mono, threshold);
  auto result = fuse::fuse(mono, stereo, mask, threshold);
  auto ensemble = fuse::ensemble_fuse(mono, stereo);
  const fs::path out(g.out_dir);
  io::write_dpth((out / "fused.dpth").string(), result.fused_depth);
  io::write_dpth((out / "mask.dpth").string(), result.mask);
  io::write_dpth((out / "threshold.dpth").string(), result.threshold);
  io::write_dpth((out / "ensemble.dpth").string(), ensemble);
  int64_t mono_px = 0, total = 0;
  for (const float v : result.mask.v)
    if (!std::isnan(v)) {
      mono_px += v != 0.0f;
      ++total;
    }
  json summary{{"fused", (out / "fused.dpth").string()},
               {"mono_selected", mono_px},
               {"valid_pixels", total}};
  std::ofstream(out / "summary.json") << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_gradcheck(const GlobalOpts& g) {
  echo_config(g, "gradcheck", json::object());
  std::mt19937 rng(g.seed >= 0 ? static_cast<uint32_t>(g.seed) : 7u);
  struct Entry {
    const char* name;
    double err;
  };
  std::vector<Entry> entries;
  auto run1 = [&](const char* name, auto fn, Tensor<double> in) {
    entries.push_back({name, grad_check<double>(
                                 [fn](const std::vector<Var<double>>& v) { return fn(v[0]); },
                                 {std::move(in)})});
  };
  auto a = random_uniform<double>({3, 5}, rng);
  auto pos = random_uniform<double>({3, 5}, rng, 0.5, 2.0);
  run1("add", [&](Var<double> x) { return ops::add(x, make_var<double>(pos)); }, a);
  run1("sub", [&](Var<double> x) { return ops::sub(x, make_var<double>(pos)); }, a);
  run1("mul", [&](Var<double> x) { return ops::mul(x, make_var<double>(pos)); }, a);
  run1("div", [&](Var<double> x) { return ops::div(x, make_var<double>(pos)); }, a);
  run1("abs", [](Var<double> x) { return ops::abs_op(x); }, pos);
  run1("log", [](Var<double> x) { return ops::log_op(x); }, pos);
  run1("exp", [](Var<double> x) { return ops::exp_op(x); }, a);
  run1("relu", [](Var<double> x) { return ops::relu(x); }, pos);
  run1("sigmoid", [](Var<double> x) { return ops::sigmoid(x); }, a);
  run1("mish", [](Var<double> x) { return ops::mish(x); }, a);
  run1("softmax", [](Var<double> x) { return ops::softmax_over_axis(x, 1); }, a);
  run1("sum", [](Var<double> x) { return ops::sum_all(x); }, a);
  run1("mean", [](Var<double> x) { return ops::mean_all(x); }, a);
  run1("bilinear_upsample_2x", [](Var<double> x) { return ops::bilinear_upsample_2x(x); },
       random_uniform<double>({2, 3, 4}, rng));
  {
    auto x = random_uniform<double>({2, 5, 6}, rng);
    auto w = random_uniform<double>({3, 2, 3, 3}, rng);
    auto b = random_uniform<double>({3}, rng);
    entries.push_back({"conv2d", grad_check<double>(
                                     [](const std::vector<Var<double>>& v) {
                                       return ops::conv2d(v[0], v[1], v[2], 1, 1);
                                     },
                                     {x, w, b})});
  }
  {
    auto x = random_uniform<double>({2, 4, 4, 4}, rng);
    auto w = random_uniform<double>({3, 2, 3, 3, 3}, rng);
    auto b = random_uniform<double>({3}, rng);
    entries.push_back({"conv3d", grad_check<double>(
                                     [](const std::vector<Var<double>>& v) {
                                       return ops::conv3d(v[0], v[1], v[2], 2, 1);
                                     },
                                     {x, w, b})});
  }
  {
    auto x = random_uniform<double>({2, 2, 3, 3}, rng);
    auto w = random_uniform<double>({2, 3, 3, 3, 3}, rng);
    auto b = random_uniform<double>({3}, rng);
    entries.push_back({"transposed_conv3d",
                       grad_check<double>(
                           [](const std::vector<Var<double>>& v) {
                             return ops::transposed_conv3d(v[0], v[1], v[2], {4, 6, 6});
                           },
                           {x, w, b})});
  }
  {
    auto gm = random_uniform<double>({3}, rng, 0.5, 1.5);
    auto bt = random_uniform<double>({3}, rng);
    entries.push_back({"batch_norm", grad_check<double>(
                                         [](const std::vector<Var<double>>& v) {
                                           ops::BatchNormState<double> st(3);
                                           return ops::batch_norm(v[0], v[1], v[2], st, true);
                                         },
                                         {random_uniform<double>({3, 4, 5}, rng), gm, bt})});
  }
  entries.push_back(
      {"concat_channels", grad_check<double>(
                              [](const std::vector<Var<double>>& v) {
                                return ops::concat_channels<double>({v[0], v[1]});
                              },
                              {random_uniform<double>({2, 3, 3}, rng),
                               random_uniform<double>({2, 3, 3}, rng)})});
  entries.push_back({"cost_volume", grad_check<double>(
                                        [](const std::vector<Var<double>>& v) {
                                          return ops::cost_volume(v[0], v[1], 3);
                                        },
                                        {random_uniform<double>({2, 3, 5}, rng),
                                         random_uniform<double>({2, 3, 5}, rng)})});
  run1("disparity_expectation",
       [](Var<double> x) {
         return ops::disparity_expectation(ops::softmax_over_axis(x, 0));
       },
       random_uniform<double>({4, 3, 3}, rng));

  bool ok = true;
  json lines = json::array();
  for (const auto& e : entries) {
    const bool pass = e.err <= 1e-4;
    ok = ok && pass;
    std::printf("%-22s max_rel_err %.3e  %s\n", e.name, e.err, pass ? "ok" : "FAIL");
    lines.push_back({{"op", e.name}, {"max_rel_err", e.err}, {"pass", pass}});
  }
  std::ofstream(fs::path(g.out_dir) / "gradcheck.json") << lines.dump(2) << "\n";
  return ok ? 0 : 1;
}

int run_report(const GlobalOpts& g, const std::string& manifest, const std::string& checkpoint,
               const std::string& split) {
  return run_eval(g, manifest, checkpoint, "all", split, /*with_intervals=*/true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spike-camera dual-branch depth estimation toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config file")->expected(1);
  app.add_option("--seed", g.seed, "override the run seed");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads,
                 "worker thread cap (1 gives bitwise-deterministic runs)");

  auto* sim = app.add_subcommand("simulate", "generate a scene and spike voxels");
  auto* build = app.add_subcommand("build-dataset", "generate a full train/test/val dataset");
  int scene_count = 0;
  build->add_option("--scenes", scene_count, "number of scenes to generate");

  auto* tr = app.add_subcommand("train", "train the dual-branch network");
  std::string manifest, mode, branch = "all", split = "test", checkpoint;
  int iterations = 0, epochs = 0, window_width = 0;
  double lr = 0;
  tr->add_option("--manifest", manifest, "dataset manifest")->required();
  tr->add_option("--mode", mode, "base | ugdf");
  tr->add_option("--iterations", iterations, "training iterations");
  tr->add_option("--epochs", epochs, "training epochs (overrides --iterations)");
  tr->add_option("--lr", lr, "initial learning rate");
  tr->add_option("--window-width", window_width, "spike window width n");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  ev->add_option("--manifest", manifest, "dataset manifest")->required();
  ev->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  ev->add_option("--branch", branch, "mono | stereo | fused | ensemble | all");
  ev->add_option("--split", split, "train | val | test");

  auto* fu = app.add_subcommand("fuse", "fuse precomputed depth maps");
  std::string mono_path, stereo_path, sigma_m_path, sigma_s_path;
  double d_max = 1000.0;
  fu->add_option("--mono", mono_path, "monocular depth DPTH")->required();
  fu->add_option("--stereo", stereo_path, "stereo depth DPTH")->required();
  fu->add_option("--sigma-m", sigma_m_path, "monocular uncertainty DPTH")->required();
  fu->add_option("--sigma-s", sigma_s_path, "stereo uncertainty DPTH")->required();
  fu->add_option("--d-max", d_max, "depth normalization ceiling (meters)");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every operator");

  auto* rp = app.add_subcommand("report", "full report: all branches plus interval CSV");
  rp->add_option("--manifest", manifest, "dataset manifest")->required();
  rp->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  rp->add_option("--split", split, "train | val | test");

  CLI11_PARSE(app, argc, argv);

  try {
    apply_threads(g.threads);
    if (*sim) return run_simulate(g);
    if (*build) return run_build_dataset(g, scene_count);
    if (*tr) return run_train(g, manifest, mode, iterations, epochs, lr, window_width);
    if (*ev) return run_eval(g, manifest, checkpoint, branch, split, false);
    if (*fu) return run_fuse(g, mono_path, stereo_path, sigma_m_path, sigma_s_path, d_max);
    if (*gc) return run_gradcheck(g);
    if (*rp) return run_report(g, manifest, checkpoint, split);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
